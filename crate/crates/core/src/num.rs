//! Extended-real formatting shared by every output format.
//!
//! Finite numbers are written with 12 significant digits; infinities are the
//! strings `"inf"` / `"-inf"`.

use serde::{Deserialize, Deserializer, Serializer};

/// Format with 12 significant digits, `%g`-style.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip of formatted float");
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(format!("{:.*}", decimals, rounded))
    } else {
        format!("{}e{}", trim_fraction(mant.to_string()), exp)
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt12(x).parse().unwrap_or(x)
}

/// Parse a number, accepting the `inf` / `-inf` / `nan` sentinels.
pub fn parse_ext_real(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        "nan" | "NaN" => Some(f64::NAN),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// JSON value for an extended real.
pub fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::Value::from(round12(x))
    } else {
        serde_json::Value::String(fmt12(x))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Num(f64),
    Str(String),
}

fn from_raw<E: serde::de::Error>(raw: Raw) -> Result<f64, E> {
    match raw {
        Raw::Num(v) => Ok(v),
        Raw::Str(s) => parse_ext_real(&s)
            .ok_or_else(|| E::custom(format!("expected a number or inf/-inf, got `{s}`"))),
    }
}

/// Serde adapter for `f64` fields holding extended reals.
pub mod ext_real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(round12(*x))
        } else {
            s.serialize_str(&fmt12(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_raw(Raw::deserialize(d)?)
    }
}

/// Serde adapter for `Vec<f64>` of extended reals.
pub mod ext_real_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            if x.is_finite() {
                seq.serialize_element(&round12(*x))?;
            } else {
                seq.serialize_element(&fmt12(*x))?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Raw>::deserialize(d)?.into_iter().map(from_raw).collect()
    }
}

/// Serde adapter for `Option<f64>` of extended reals.
pub mod ext_real_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => ext_real::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Raw>::deserialize(d)?.map(from_raw).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(0.1053605156578263), "0.105360515658");
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(-1.5e-7), "-1.5e-7");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        assert_eq!(fmt12(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt12(0.0), "0");
    }

    #[test]
    fn sentinels_parse() {
        assert_eq!(parse_ext_real("inf"), Some(f64::INFINITY));
        assert_eq!(parse_ext_real("-inf"), Some(f64::NEG_INFINITY));
        assert_eq!(parse_ext_real("0.25"), Some(0.25));
        assert_eq!(parse_ext_real("1e400"), None);
        assert_eq!(parse_ext_real("x"), None);
    }

    #[test]
    fn serde_adapter() {
        #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "ext_real")]
            a: f64,
            #[serde(with = "ext_real_vec")]
            b: Vec<f64>,
        }
        let w = W {
            a: f64::INFINITY,
            b: vec![1.0 / 3.0, f64::NEG_INFINITY],
        };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"a":"inf","b":[0.333333333333,"-inf"]}"#);
        let back: W = serde_json::from_str(&text).unwrap();
        assert_eq!(back.a, f64::INFINITY);
        assert_eq!(back.b[1], f64::NEG_INFINITY);
    }
}
