//! JSON helpers shared by the file formats.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

/// Shortest decimal that parses back to the same `f64`.
fn exact(x: f64) -> String {
    if x == 0.0 {
        // Signed zeros carry no information here.
        return "0".to_string();
    }
    format!("{x:?}").trim_end_matches(".0").to_string()
}

fn parse<E: serde::de::Error>(s: &str) -> Result<f64, E> {
    s.parse::<f64>().map_err(|e| E::custom(format!("bad number {s:?}: {e}")))
}

/// A complex number as `["re", "im"]` with exact decimal strings.
pub mod complex_string {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [super::exact(z.re), super::exact(z.im)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        Ok(C64::new(super::parse(&re)?, super::parse(&im)?))
    }
}

/// A list of complex numbers in the format of [`complex_string`].
pub mod complex_string_list {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[String; 2]> = zs.iter().map(|z| [super::exact(z.re), super::exact(z.im)]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw: Vec<[String; 2]> = Vec::deserialize(d)?;
        raw.iter().map(|[re, im]| Ok(C64::new(super::parse(re)?, super::parse(im)?))).collect()
    }
}

/// A ratio that may be infinite: written as `null` when not finite.
pub mod ratio {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() { s.serialize_f64(*x) } else { s.serialize_none() }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// A list in the format of [`ratio`].
pub mod ratio_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Option<f64>> = xs.iter().map(|x| x.is_finite().then_some(*x)).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trip() {
        for x in [0.1, -3.0, 1e-300, 2f64.sqrt(), 123456789.0, -0.0] {
            let s = exact(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(exact(-3.0), "-3");
        assert_eq!(exact(-0.0), "0");
    }
}
