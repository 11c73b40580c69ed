/// Shortest `%.{digits}g`-style rendering: `digits` significant digits,
/// trailing zeros dropped, scientific notation outside `1e-5 ..= 1e{digits}`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(120.0, 9), "120");
        assert_eq!(format_sig(0.015_290_448_367, 9), "0.0152904484");
        assert_eq!(format_sig(2.0 / 3.0, 9), "0.666666667");
        assert_eq!(format_sig(-1.5, 9), "-1.5");
        assert_eq!(format_sig(16000.0, 9), "16000");
        assert_eq!(format_sig(9.999_999_999_6, 9), "10");
        assert_eq!(format_sig(1.234e-7, 9), "1.234e-7");
        assert_eq!(format_sig(1e12, 9), "1e12");
        assert_eq!(format_sig(0.0, 9), "0");
    }
}
