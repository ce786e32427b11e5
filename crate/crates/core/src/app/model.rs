//! The JSON model file shared by every subcommand.
//!
//! ```json
//! {
//!   "states": ["a", "b"],
//!   "kernel": [[0.7, 0.3], [0.6, 0.4]],
//!   "observables": {"f": [1.0, -2.0]},
//!   "subset": ["a"],
//!   "lattice": {"d": 1, "F": [[-1], [1]]}
//! }
//! ```
//!
//! Only `states` and `kernel` are required.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::markov::{Observable, StochasticKernel, SubsetMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub d: usize,
    /// One step of length `d` per state.
    #[serde(rename = "F")]
    pub steps: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default)]
    pub observables: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))
    }

    /// Key-ordered JSON form, the basis of the input digest.
    pub fn canonical(&self) -> Value {
        serde_json::to_value(self).expect("model serializes")
    }

    pub fn kernel(&self) -> Result<StochasticKernel> {
        if self.states.len() != self.kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                found: self.kernel.len(),
            });
        }
        StochasticKernel::new(self.states.clone(), &self.kernel)
    }

    pub fn observable(&self, name: &str) -> Result<Observable> {
        let values = self
            .observables
            .get(name)
            .ok_or_else(|| Error::Model(format!("no observable named {name:?}")))?;
        if values.len() != self.states.len() {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                found: values.len(),
            });
        }
        Ok(Observable::new(values))
    }

    /// The subset given on the command line, or else the one in the file.
    pub fn subset(&self, kernel: &StochasticKernel, labels: Option<&[String]>) -> Result<Option<SubsetMask>> {
        labels
            .or(self.subset.as_deref())
            .map(|l| SubsetMask::from_labels(kernel, l))
            .transpose()
    }

    pub fn lattice(&self) -> Result<LatticeModel> {
        let spec = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::Model("model has no lattice section".into()))?;
        if let Some(bad) = spec.steps.iter().find(|s| s.len() != spec.d) {
            return Err(Error::DimensionMismatch {
                expected: spec.d,
                found: bad.len(),
            });
        }
        LatticeModel::new(self.kernel()?, &spec.steps)
    }

    /// Checks everything the file declares: kernel, observable lengths, subset labels and lattice.
    pub fn validate(&self) -> Result<()> {
        let kernel = self.kernel()?;
        for name in self.observables.keys() {
            self.observable(name)?;
        }
        self.subset(&kernel, None)?;
        if self.lattice.is_some() {
            self.lattice()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_STATE: &str = r#"{
        "states": ["a", "b"],
        "kernel": [[0.7, 0.3], [0.6, 0.4]],
        "observables": {"f": [1.0, -2.0]},
        "subset": ["a"]
    }"#;

    #[test]
    fn parses_and_validates() {
        let m = ModelFile::parse(TWO_STATE).unwrap();
        m.validate().unwrap();
        let k = m.kernel().unwrap();
        assert_eq!(m.subset(&k, None).unwrap().unwrap().indices(), vec![0]);
        let over = vec!["b".to_string()];
        assert_eq!(m.subset(&k, Some(&over)).unwrap().unwrap().indices(), vec![1]);
        assert_eq!(m.observable("f").unwrap().get(1), -2.0);
        assert!(m.observable("g").is_err());
    }

    #[test]
    fn canonical_form_ignores_key_order() {
        let a = ModelFile::parse(TWO_STATE).unwrap();
        let b = ModelFile::parse(
            r#"{"subset": ["a"], "observables": {"f": [1.0, -2.0]},
                "kernel": [[0.7, 0.3], [0.6, 0.4]], "states": ["a", "b"]}"#,
        )
        .unwrap();
        assert_eq!(a.canonical().to_string(), b.canonical().to_string());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ModelFile::parse("{"), Err(Error::Model(_))));
        let bad = ModelFile::parse(r#"{"states": ["a", "b"], "kernel": [[0.5, 0.6], [0.5, 0.5]]}"#).unwrap();
        assert!(matches!(bad.validate(), Err(Error::NonStochastic { .. })));
        let label = ModelFile::parse(r#"{"states": ["a"], "kernel": [[1.0]], "subset": ["z"]}"#).unwrap();
        assert_eq!(label.validate(), Err(Error::UnknownState("z".into())));
        let short = ModelFile::parse(r#"{"states": ["a"], "kernel": [[1.0]], "observables": {"f": [1, 2]}}"#).unwrap();
        assert!(matches!(short.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lattice_section() {
        let m = ModelFile::parse(
            r#"{"states": ["down", "up"], "kernel": [[0.5, 0.5], [0.5, 0.5]],
                "lattice": {"d": 1, "F": [[-1], [1]]}}"#,
        )
        .unwrap();
        assert_eq!(m.lattice().unwrap().dim(), 1);
    }
}
