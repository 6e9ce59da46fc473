//! Locale-independent number formatting with a fixed number of significant
//! digits, in the style of C's `%.12g`.

/// Significant digits used for every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits, dropping
/// trailing zeros. Uses exponent notation outside `1e-4 ≤ |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    format_sig_digits(x, SIGNIFICANT_DIGITS)
}

pub fn format_sig_digits(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format_sig(x).parse().expect("formatted number parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(format_sig(0.4), "0.4");
        assert_eq!(format_sig(5.0 / 3.0), "1.66666666667");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(9.999999999999995), "10");
        assert_eq!(format_sig(100.0), "100");
    }

    proptest! {
        #[test]
        fn round_trip_within_twelve_digits(x in -1e20f64..1e20) {
            let y: f64 = format_sig(x).parse().unwrap();
            prop_assert!((x - y).abs() <= 1e-11 * x.abs());
            prop_assert_eq!(format_sig(y), format_sig(x));
        }
    }
}
