/// Formats a value rounded to 9 significant digits, without exponent
/// notation and without trailing zeros.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("float round trip");
    let s = format!("{rounded}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-0.5), "-0.5");
        assert_eq!(sig9(0.1234567891234), "0.123456789");
        assert_eq!(sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(sig9(-0.000012345678912), "-0.0000123456789");
    }
}
