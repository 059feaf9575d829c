#![no_main]

use gistage_core::io::parse_events_reader;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_events_reader(data);
});
