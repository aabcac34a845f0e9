//! Numeric text formatting shared by the CSV emitters.

/// Formats an `f64` as round-trip-safe decimal with 17 significant digits.
///
/// Every finite double parses back to the identical bit pattern, so files
/// written by different runs (or re-implementations in other languages that
/// follow the same rule) can be compared byte for byte.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Parses a decimal written by [`fmt_f64`] (or any plain decimal).
pub fn parse_f64(text: &str) -> Option<f64> {
    let trimmed = text.trim();
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}
