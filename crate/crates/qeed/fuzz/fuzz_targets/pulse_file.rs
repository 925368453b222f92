#![no_main]

use libfuzzer_sys::fuzz_target;
use qeed::io::PulseFile;

// Arbitrary bytes through the pulse-file decoder: parsing, validation, and
// realization as a pulse must never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = serde_json::from_str::<PulseFile>(text) else {
        return;
    };
    if file.validate().is_ok() {
        if let Ok(pulse) = file.to_pulse() {
            let _ = pulse.omega(0.5 * pulse.duration);
            let _ = pulse.rotation_angle();
        }
    }
});
