#![no_main]

use libfuzzer_sys::fuzz_target;
use lrk_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // resolution must reject or accept, never panic
        let _ = cfg.plan();
    }
});
