#![no_main]

use libfuzzer_sys::fuzz_target;
use qeed::io::SweepConfig;

// Sweep-config decoding and grid expansion must never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = serde_json::from_str::<SweepConfig>(text) else {
        return;
    };
    let _ = config.grid.values();
});
