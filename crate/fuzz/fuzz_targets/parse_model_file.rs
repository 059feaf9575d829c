#![no_main]

use gistage_core::io::ModelFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = ModelFile::parse_str(text) {
            // Accepted documents describe a valid model and config, and the
            // writer's rendering must parse back to the same document.
            let rendered = file.to_toml_string();
            let reparsed = ModelFile::parse_str(&rendered).expect("writer output must parse");
            assert_eq!(file, reparsed);
        }
    }
});
