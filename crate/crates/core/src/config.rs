//! System files (JSON or TOML) and serde helpers that keep rationals exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynsys::DynSystem;
use crate::error::{Error, Result};
use crate::homopoly::{HomoForm, PolyMap};
use crate::macaulay::RConvention;

/// Rationals as `"a/b"` strings.
pub mod rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let t = String::deserialize(d)?;
        parse_rational(&t).map_err(serde::de::Error::custom)
    }
}

pub mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

fn default_tol() -> f64 {
    1e-9
}

fn default_seed() -> u64 {
    7
}

/// `{ "N", "d", "forms", "hypersurface", "r_convention", "tol", "seed" }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: u32,
    pub forms: Vec<String>,
    #[serde(default)]
    pub hypersurface: Option<String>,
    #[serde(default)]
    pub r_convention: RConvention,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(forms: &[&str]) -> SystemConfig {
        SystemConfig {
            n: forms.len().saturating_sub(1),
            d: 0,
            forms: forms.iter().map(|s| s.to_string()).collect(),
            hypersurface: None,
            r_convention: RConvention::default(),
            tol: default_tol(),
            seed: default_seed(),
        }
    }

    pub fn from_json(text: &str) -> Result<SystemConfig> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_toml(text: &str) -> Result<SystemConfig> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((1, 1));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    /// Chooses the format from the extension; anything but `.toml` is JSON.
    pub fn load(path: &Path) -> Result<SystemConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            SystemConfig::from_toml(&text)
        } else {
            SystemConfig::from_json(&text)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn map(&self) -> Result<PolyMap> {
        if self.forms.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: self.forms.len(),
            });
        }
        let map = PolyMap::parse(&self.forms).map_err(|e| annotate(e, "forms"))?;
        if self.d != 0 && map.degree() != self.d {
            return Err(Error::DegreeMismatch(format!(
                "declared d = {} but forms have degree {}",
                self.d,
                map.degree()
            )));
        }
        Ok(map)
    }

    pub fn build(&self) -> Result<DynSystem> {
        let map = self.map()?;
        let g = self
            .hypersurface
            .as_deref()
            .map(|t| HomoForm::parse(t, Some(self.n + 1), None).map_err(|e| annotate(e, "hypersurface")))
            .transpose()?;
        Ok(DynSystem::new(map, g)?.with_convention(self.r_convention))
    }

    pub fn from_system(system: &DynSystem) -> SystemConfig {
        SystemConfig {
            n: system.dim(),
            d: system.degree(),
            forms: system.map().to_strings(),
            hypersurface: system.hypersurface().map(|g| g.to_string()),
            r_convention: system.convention(),
            tol: default_tol(),
            seed: default_seed(),
        }
    }
}

fn annotate(e: Error, field: &str) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{field}: {message}"),
        },
        other => other,
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"N": 1, "d": 2, "forms": ["x^2 + 1/2*y^2", "y^2"], "hypersurface": null, "r_convention": "paper"}"#;
        let c = SystemConfig::from_json(text).unwrap();
        let s = c.build().unwrap();
        assert_eq!(s.convention(), RConvention::Classical);
        let again = SystemConfig::from_json(&SystemConfig::from_system(&s).to_json()).unwrap();
        assert_eq!(again.build().unwrap().map(), s.map());
    }

    #[test]
    fn toml_and_errors() {
        let c = SystemConfig::from_toml("N = 1\nd = 2\nforms = [\"x^2\", \"y^2\"]\n").unwrap();
        assert_eq!(c.build().unwrap().resultant(), &crate::arith::int(1));
        match SystemConfig::from_json("{\"N\": 1,\n \"d\": }") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match SystemConfig::from_toml("N = 1\nd = 2\nforms = [\"x^2\" \"y^2\"]\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = SystemConfig::new(&["x^2 + $", "y^2"]);
        assert!(bad.build().unwrap_err().is_parse());
        let not_morphism = SystemConfig::new(&["x^2", "x*y"]);
        assert!(matches!(not_morphism.build(), Err(Error::NotAMorphism)));
    }
}
