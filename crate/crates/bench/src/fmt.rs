//! CSV output helpers: RFC-4180 fields with `.` decimal separator and six
//! significant digits.

/// Formats a float with six significant digits (plain decimal notation).
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    let mut out = format!("{x:.decimals$}");
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Quotes a CSV field when it contains separators, quotes, or newlines.
pub fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}
