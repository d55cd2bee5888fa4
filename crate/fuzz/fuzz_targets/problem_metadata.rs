#![no_main]

use libfuzzer_sys::fuzz_target;
use lrk_core::problems::ProblemMetadata;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ProblemMetadata::parse(text);
    }
});
