#![no_main]

use libfuzzer_sys::fuzz_target;
use qeed::curve::ParametricCurve;
use qeed::io::CurveFile;

// Sampled-curve decoding and interpolation must never panic, including on
// degenerate point sets (repeated points, NaN, huge values).
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = serde_json::from_str::<CurveFile>(text) else {
        return;
    };
    if file.points.iter().flatten().any(|v| !v.is_finite()) {
        return;
    }
    if let Ok(curve) = ParametricCurve::from_samples(file.points) {
        let (lo, hi) = curve.lambda_range();
        let mid = 0.5 * (lo + hi);
        let _ = curve.position(mid);
        let _ = curve.derivative(mid);
        let _ = curve.closure_gap();
    }
});
