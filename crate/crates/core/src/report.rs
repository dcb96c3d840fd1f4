//! Report formatting shared by the CSV and JSON writers.

/// Fixed six-decimal rendering; ties round half to even on the exact binary
/// value. Non-finite values render as `nan`, `inf` or `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn fmt_opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_places_half_even() {
        assert_eq!(fmt_real(0.0078125), "0.007812");
        assert_eq!(fmt_real(0.0234375), "0.023438");
        assert_eq!(fmt_real(-1e-9), "0.000000");
        assert_eq!(fmt_real(2f64.ln()), "0.693147");
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(fmt_opt_real(None), "");
    }
}
