//! Decimal rendering with 17 significant digits.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with 17 significant digits and trailing zeros removed. Infinities
/// render as `inf` / `-inf`, NaN as `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };
    if !(-7..21).contains(&exp) {
        let (lead, rest) = digits.split_at(1);
        return if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        };
    }
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}")
}

/// A float that serializes through [`format_number`]; non-finite values
/// become JSON strings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_number(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&format_number(self.0))
        }
    }
}

/// Serializes a slice of floats as an array of [`Num`].
pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(4.0), "4");
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1234.5), "1234.5");
        assert_eq!(format_number(1e21), "1e21");
        assert_eq!(format_number(4.76837158203125e-7), "0.000000476837158203125");
        assert_eq!(format_number(2f64.powi(-30)), "9.3132257461547852e-10");
        assert_eq!(format_number(0.000123), "0.00012300000000000001");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(1.0 / 3.0), "0.33333333333333331");
    }

    #[test]
    fn json_rendering() {
        let v = serde_json::to_string(&(Num(3.0), Num(f64::INFINITY), nums(&[0.5, 2.0]))).unwrap();
        assert_eq!(v, r#"[3,"inf",[0.5,2]]"#);
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 7.0, 6.02214076e23, 1e-300, 123456.789] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }
}
