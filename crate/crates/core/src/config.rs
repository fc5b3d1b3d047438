//! Model specification files.
//!
//! A model file is TOML with the susceptible fraction and one family name
//! and parameter list per law:
//!
//! ```toml
//! p = 0.7
//!
//! [family]
//! F = "truncated_exponential"   # uniform | exponential | truncated_exponential | endpoint_power
//! G = "uniform"
//!
//! [params]
//! F = [1.0, 4.61]               # rate, tau
//! G = [0.0, 1.0]                # a, b
//! ```
//!
//! Parameter order per family: `uniform` (a, b), `exponential` (rate),
//! `truncated_exponential` (rate, tau), `endpoint_power` (tau, beta).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distmodel::{CureModel, DistributionSpec};
use crate::error::{Error, Result};

/// One value per law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerLaw<T> {
    #[serde(rename = "F")]
    pub lifetime: T,
    #[serde(rename = "G")]
    pub censoring: T,
}

/// Parsed model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub p: f64,
    pub family: PerLaw<String>,
    pub params: PerLaw<Vec<f64>>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read model file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_model(model: &CureModel) -> Self {
        let (f, g) = (model.lifetime(), model.censoring());
        Self {
            p: model.p(),
            family: PerLaw { lifetime: f.family_name().into(), censoring: g.family_name().into() },
            params: PerLaw { lifetime: f.params(), censoring: g.params() },
        }
    }

    pub fn to_model(&self) -> Result<CureModel> {
        let f = DistributionSpec::from_family(&self.family.lifetime, &self.params.lifetime)?;
        let g = DistributionSpec::from_family(&self.family.censoring, &self.params.censoring)?;
        CureModel::new(f, g, self.p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model files always serialize")
    }
}

/// Reads and validates a model file.
pub fn load_model(path: &Path) -> Result<CureModel> {
    ModelFile::load(path)?.to_model()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = r#"
p = 0.7
[family]
F = "truncated_exponential"
G = "uniform"
[params]
F = [1.0, 4.61]
G = [0.0, 1.0]
"#;

    #[test]
    fn parses_and_round_trips() {
        let file = ModelFile::parse(TABLE1).unwrap();
        let model = file.to_model().unwrap();
        assert_eq!(model.p(), 0.7);
        assert_eq!(model.censoring().params(), vec![0.0, 1.0]);
        let again = ModelFile::parse(&ModelFile::from_model(&model).to_toml()).unwrap();
        assert_eq!(again, file);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ModelFile::parse("p = 0.7"), Err(Error::Config(_))));
        let bad_family = TABLE1.replace("\"uniform\"", "\"gamma\"");
        assert!(ModelFile::parse(&bad_family).unwrap().to_model().is_err());
        let bad_arity = TABLE1.replace("[0.0, 1.0]", "[1.0]");
        assert!(matches!(ModelFile::parse(&bad_arity).unwrap().to_model(), Err(Error::Config(_))));
        let bad_p = TABLE1.replace("p = 0.7", "p = 1.5");
        assert!(ModelFile::parse(&bad_p).unwrap().to_model().is_err());
        let extra = format!("{TABLE1}\nq = 1\n");
        assert!(ModelFile::parse(&extra).is_err());
        assert!(ModelFile::load(Path::new("/nonexistent/model.toml")).is_err());
    }
}
