//! Fixed-precision float output.

/// Round to 9 significant digits.
///
/// Serializing the result with the shortest round-trip representation prints
/// at most 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Text form of [`sig9`]; non-finite values print as `NaN`/`inf`.
pub fn fmt9(x: f64) -> String {
    format!("{}", sig9(x))
}

/// Largest rounding error [`sig9`] introduces for values of magnitude up to `bound`.
pub fn sig9_error_bound(bound: f64) -> f64 {
    5e-9 * bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt9(1.414_213_680_224_251_8e-3), "0.00141421368");
        assert_eq!(fmt9(-std::f64::consts::FRAC_PI_4), "-0.785398163");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(f64::NAN), "NaN");
        assert_eq!(fmt9(12.5), "12.5");
    }

    #[test]
    fn error_bound_holds() {
        for x in [0.1234567891, std::f64::consts::PI, 1e-3 + 1e-15, 2.999999999] {
            assert!((sig9(x) - x).abs() <= sig9_error_bound(x.abs()));
        }
    }
}
