//! Exact rational numbers for densities, probabilities and scores.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{LdaError, Result};

pub type Rational = Ratio<i128>;

/// Parses `"0.125"`, `"-3"`, `"2/15"` or `"1e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || LdaError::InvalidParameter(format!("not an exact number: `{text}`"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad())?;
        let d: i128 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: i128 = if all.is_empty() { 0 } else { all.parse().map_err(|_| bad())? };
    let scale_exp = frac_part.len() as i32 - exponent;
    if negative {
        numer = -numer;
    }
    let pow = |e: i32| -> Result<i128> {
        10i128.checked_pow(e as u32).ok_or_else(bad)
    };
    Ok(if scale_exp >= 0 {
        Rational::new(numer, pow(scale_exp)?)
    } else {
        Rational::from_integer(numer.checked_mul(pow(-scale_exp)?).ok_or_else(bad)?)
    })
}

/// Exact rational value of a finite `f64`, via its shortest round-trip decimal form.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(LdaError::InvalidParameter(format!("not a finite number: {x}")));
    }
    parse_rational(&format!("{x}"))
}

/// Number of digits after the decimal point in the shortest decimal form, or
/// `None` if the expansion does not terminate.
pub fn decimal_places(r: &Rational) -> Option<u32> {
    let mut den = *r.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    (den == 1).then(|| twos.max(fives))
}

/// Decimal string when the expansion terminates, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    match decimal_places(r) {
        Some(0) => r.numer().to_string(),
        Some(k) => {
            let scaled = r * Rational::from_integer(10i128.pow(k));
            let n = scaled.to_integer();
            let sign = if n < 0 { "-" } else { "" };
            let digits = format!("{:0>width$}", n.abs(), width = k as usize + 1);
            let (int_part, frac_part) = digits.split_at(digits.len() - k as usize);
            format!("{sign}{int_part}.{frac_part}")
        }
        None => format!("{}/{}", r.numer(), r.denom()),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values.into_iter().fold(1i128, |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an integer; `scale` must be a multiple of the denominator.
pub(crate) fn scaled_integer(r: &Rational, scale: i128) -> Result<i128> {
    let v = r * Rational::from_integer(scale);
    if !v.is_integer() {
        return Err(LdaError::Internal(format!("{r} does not scale to an integer by {scale}")));
    }
    Ok(v.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert_eq!(parse_rational("2/15").unwrap(), Rational::new(2, 15));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::new(1, 1000));
        assert_eq!(parse_rational("2.5E2").unwrap(), Rational::from_integer(250));
        for bad in ["", "abc", "1/0", "1.2.3", "-", "0x10"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_places_ignore_trailing_zeros() {
        assert_eq!(decimal_places(&parse_rational("0.30").unwrap()), Some(1));
        assert_eq!(decimal_places(&parse_rational("0.0625").unwrap()), Some(4));
        assert_eq!(decimal_places(&parse_rational("7").unwrap()), Some(0));
        assert_eq!(decimal_places(&Rational::new(1, 3)), None);
    }

    #[test]
    fn formats() {
        assert_eq!(format_rational(&Rational::new(1, 4)), "0.25");
        assert_eq!(format_rational(&Rational::new(-1, 20)), "-0.05");
        assert_eq!(format_rational(&Rational::new(2, 15)), "2/15");
        assert_eq!(format_rational(&Rational::from_integer(-2)), "-2");
        assert_eq!(format_rational(&rational_from_f64(0.1).unwrap()), "0.1");
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(n in -10_000_000i128..10_000_000, d in 1i128..100_000) {
            let r = Rational::new(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
