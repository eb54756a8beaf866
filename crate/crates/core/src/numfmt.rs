//! Round-trip exact number formatting shared by every text output.

/// Shortest decimal that parses back to the same `f64`. Magnitudes outside
/// `[1e-5, 1e16)` use exponent notation; zero of either sign prints as `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a.is_finite() && (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
