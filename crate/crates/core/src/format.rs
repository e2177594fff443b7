//! Fixed-precision number rendering for reproducible text outputs.

/// Significant digits kept in every CSV, JSON and mesh number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("scientific rendering parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest text that reads back as `round_sig(x)`.
pub fn num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || (r.abs() >= 1e-5 && r.abs() < 1e15) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds every number inside a JSON value in place.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}
