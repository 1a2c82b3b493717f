//! Number rendering shared by every tabular output.

/// Formats `x` with six significant digits, `%g` style: fixed notation
/// for decimal exponents in [-4, 6), scientific otherwise, trailing zeros
/// trimmed. Non-finite values render as `NaN`, `inf` or `-inf`.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to the value [`sig6`] renders.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    sig6(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_like_printf_g() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
        assert_eq!(sig6(123456.0), "123456");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(0.0000123), "1.23e-05");
        assert_eq!(sig6(99999.95), "99999.9");
        assert_eq!(sig6(999999.5), "1e+06");
        assert_eq!(sig6(f64::NAN), "NaN");
    }

    #[test]
    fn round_trip_is_stable() {
        for x in [1.0 / 3.0, 12345.678, 1e-7, -42.0] {
            assert_eq!(sig6(round_sig6(x)), sig6(x));
        }
    }
}
