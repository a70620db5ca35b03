//! Serde adapters for floats that may be infinite or NaN. JSON has no
//! literal for these, so they travel as the strings "inf", "-inf", "nan".

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn to_repr(x: f64) -> Repr {
    if x.is_finite() {
        Repr::Num(x)
    } else if x.is_nan() {
        Repr::Text("nan".into())
    } else if x > 0.0 {
        Repr::Text("inf".into())
    } else {
        Repr::Text("-inf".into())
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("not a number: {other:?}"))),
        },
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    to_repr(*x).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    from_repr(Repr::deserialize(d)?)
}

pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (to_repr(x.0), to_repr(x.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Repr, Repr)>::deserialize(d)?;
        Ok((from_repr(a)?, from_repr(b)?))
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Serialize, Deserialize)]
    struct T {
        #[serde(with = "super")]
        x: f64,
        #[serde(with = "super::pair")]
        ci: (f64, f64),
    }

    #[test]
    fn round_trips_non_finite() {
        let t = T { x: f64::INFINITY, ci: (0.25, f64::NEG_INFINITY) };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"x":"inf","ci":[0.25,"-inf"]}"#);
        let back: T = serde_json::from_str(&s).unwrap();
        assert_eq!(back.x, f64::INFINITY);
        assert_eq!(back.ci, (0.25, f64::NEG_INFINITY));
        let nan: T = serde_json::from_str(r#"{"x":"nan","ci":[1,2]}"#).unwrap();
        assert!(nan.x.is_nan());
    }
}
