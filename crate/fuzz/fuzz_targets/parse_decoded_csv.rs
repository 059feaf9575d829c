#![no_main]

use gistage_core::io::{decoded_to_csv, parse_decoded_reader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(studies) = parse_decoded_reader(data) {
        let rendered = decoded_to_csv(&studies).expect("parsed studies have equal lengths");
        let reparsed = parse_decoded_reader(rendered.as_bytes()).expect("writer output must parse");
        assert_eq!(studies, reparsed);
    }
});
