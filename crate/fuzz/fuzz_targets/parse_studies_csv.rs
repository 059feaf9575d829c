#![no_main]

use gistage_core::io::{parse_studies_reader, studies_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Parsing must never panic; on success the writer's output must
    // round-trip through the parser unchanged.
    if let Ok(studies) = parse_studies_reader(data) {
        let rendered = studies_to_csv(&studies);
        let reparsed = parse_studies_reader(rendered.as_bytes()).expect("writer output must parse");
        assert_eq!(studies, reparsed);
    }
});
