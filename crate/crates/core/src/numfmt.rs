//! Fixed decimal formatting for CSV outputs.

/// Significant digits written for every float in CSV files. Seventeen digits
/// make the decimal text round-trip to the identical `f64`.
pub const SIG_DIGITS: usize = 17;

/// Formats `x` in plain decimal notation (never exponent form) with at least
/// `sig` significant digits.
pub fn decimal(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:e}", x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// [`decimal`] at [`SIG_DIGITS`].
pub fn exact(x: f64) -> String {
    decimal(x, SIG_DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_decimal_without_exponent() {
        assert_eq!(decimal(0.42, 4), "0.4200");
        assert_eq!(decimal(1234.5, 3), "1234");
        assert!(!exact(1.0e-12).contains('e'));
        assert_eq!(exact(0.0), "0");
    }

    proptest! {
        #[test]
        fn round_trips_bit_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let text = exact(x);
            let back: f64 = text.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
