//! Fixed-precision number formatting for reports.

/// `x` with 17 significant digits: positional notation for moderate
/// exponents, scientific otherwise. Identical inputs give identical text.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::sig17;

    #[test]
    fn digits() {
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(1.0), "1.0000000000000000");
        assert_eq!(sig17(-0.5), "-0.50000000000000000");
        assert_eq!(sig17(123.25), "123.25000000000000");
        assert_eq!(sig17(1e-9), "1.0000000000000001e-9");
        assert_eq!(sig17(std::f64::consts::PI), "3.1415926535897931");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e7, 6.02e23, -4.9e-300] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
