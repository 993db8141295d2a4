//! JSON ensemble and operator files.
//!
//! ```json
//! {"parties": [2, 2],
//!  "states": [
//!    {"prior": 0.5, "matrix": {"dim": 4, "re": [[...]], "im": [[...]]}},
//!    {"prior": 0.5, "builder": {"kind": "ghz", "m": 2, "d": 2}},
//!    {"builder": {"kind": "example1_state", "m": 2, "d": 2, "which": 1}}]}
//! ```
//!
//! `which` is one-based. A prior may be left out only for the example
//! builders, which then use the example's own prior.

use serde::{Deserialize, Serialize};
use seqlocc::constructions::{example1_priors, example1_state, example2_priors, example2_state, identity_mix};
use seqlocc::record::MatrixRecord;
use seqlocc::{HermitianOperator, Ordering, PartyStructure, StateEnsemble};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub parties: Vec<usize>,
    pub states: Vec<StateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<Builder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    Ghz { m: usize, d: usize },
    BasisProduct { m: usize, d: usize, i: usize },
    IdentityMix { m: usize, d: usize, weights: [f64; 2] },
    Example1State { m: usize, d: usize, which: usize },
    Example2State { m: usize, d: usize, which: usize },
}

impl Builder {
    fn shape(&self) -> (usize, usize) {
        match *self {
            Self::Ghz { m, d }
            | Self::BasisProduct { m, d, .. }
            | Self::IdentityMix { m, d, .. }
            | Self::Example1State { m, d, .. }
            | Self::Example2State { m, d, .. } => (m, d),
        }
    }

    fn build(&self) -> Result<HermitianOperator, String> {
        let one_based = |which: usize, n: usize| {
            if (1..=n).contains(&which) {
                Ok(which - 1)
            } else {
                Err(format!("which = {which} outside 1..={n}"))
            }
        };
        let op = match *self {
            Self::Ghz { m, d } => HermitianOperator::ghz(m, d),
            Self::BasisProduct { m, d, i } => HermitianOperator::basis_product_projector(m, d, i),
            Self::IdentityMix { m, d, weights } => identity_mix(m, d, weights),
            Self::Example1State { m, d, which } => example1_state(m, d, one_based(which, 2)?),
            Self::Example2State { m, d, which } => example2_state(m, d, one_based(which, d + 2)?),
        };
        op.map_err(|e| e.to_string())
    }

    fn default_prior(&self) -> Option<f64> {
        match *self {
            Self::Example1State { m, d, which } => example1_priors(m, d).get(which.checked_sub(1)?).copied(),
            Self::Example2State { m, d, which } => example2_priors(m, d).get(which.checked_sub(1)?).copied(),
            _ => None,
        }
    }
}

/// Parses JSON, naming the offending field on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("{path}: {}", e.inner())
        }
    })
}

impl EnsembleFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        parse_json(text)
    }

    pub fn to_ensemble(&self) -> Result<StateEnsemble, String> {
        if self.states.is_empty() {
            return Err("states: at least one state is required".into());
        }
        let structure = PartyStructure::new(self.parties.clone(), 1, Ordering::StepMajor)
            .map_err(|e| format!("parties: {e}"))?;
        let mut items = Vec::with_capacity(self.states.len());
        for (k, s) in self.states.iter().enumerate() {
            let at = |field: &str, msg: String| format!("states[{k}].{field}: {msg}");
            let (op, default_prior) = match (&s.matrix, &s.builder) {
                (Some(m), None) => {
                    let matrix = m.to_matrix().map_err(|e| at("matrix", e.to_string()))?;
                    let op = HermitianOperator::from_matrix(structure.clone(), matrix)
                        .map_err(|e| at("matrix", e.to_string()))?;
                    (op, None)
                }
                (None, Some(b)) => {
                    let (m, d) = b.shape();
                    if self.parties.len() != m || self.parties.iter().any(|&x| x != d) {
                        return Err(at(
                            "builder",
                            format!("m = {m}, d = {d} does not match parties {:?}", self.parties),
                        ));
                    }
                    (b.build().map_err(|e| at("builder", e))?, b.default_prior())
                }
                (Some(_), Some(_)) => return Err(format!("states[{k}]: give either matrix or builder, not both")),
                (None, None) => return Err(format!("states[{k}]: matrix or builder required")),
            };
            let prior = s
                .prior
                .or(default_prior)
                .ok_or_else(|| at("prior", "required for this state".into()))?;
            items.push((prior, op));
        }
        StateEnsemble::new(items).map_err(|e| format!("states: {e}"))
    }

    /// Explicit-matrix file for an ensemble.
    pub fn from_ensemble(e: &StateEnsemble) -> Self {
        Self {
            parties: e.structure().party_dims().to_vec(),
            states: e
                .iter()
                .map(|(p, rho)| StateRecord {
                    prior: Some(p),
                    matrix: Some(MatrixRecord::from_matrix(rho.matrix())),
                    builder: None,
                })
                .collect(),
        }
    }
}

/// A single operator for cone analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub parties: Vec<usize>,
    #[serde(default = "one")]
    pub steps: usize,
    #[serde(default = "step_major")]
    pub ordering: Ordering,
    pub matrix: MatrixRecord,
}

fn one() -> usize {
    1
}

fn step_major() -> Ordering {
    Ordering::StepMajor
}

impl OperatorFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        parse_json(text)
    }

    pub fn to_operator(&self) -> Result<HermitianOperator, String> {
        let structure = PartyStructure::new(self.parties.clone(), self.steps, self.ordering)
            .map_err(|e| format!("parties: {e}"))?;
        let matrix = self.matrix.to_matrix().map_err(|e| format!("matrix: {e}"))?;
        HermitianOperator::from_matrix(structure, matrix).map_err(|e| format!("matrix: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_with_default_priors() {
        let text = r#"{"parties": [2, 2], "states": [
            {"builder": {"kind": "example1_state", "m": 2, "d": 2, "which": 1}},
            {"builder": {"kind": "example1_state", "m": 2, "d": 2, "which": 2}}]}"#;
        let e = EnsembleFile::parse(text).unwrap().to_ensemble().unwrap();
        assert!((e.prior(0) - 8.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let text = r#"{"parties": [2, 2], "states": [{"prior": 1.0, "builder": {"kind": "ghz", "m": 2}}]}"#;
        let err = EnsembleFile::parse(text).unwrap_err();
        assert!(err.starts_with("states[0].builder"), "{err}");

        let text = r#"{"parties": [2, 2], "states": [{"builder": {"kind": "ghz", "m": 2, "d": 2}}]}"#;
        let err = EnsembleFile::parse(text).unwrap().to_ensemble().unwrap_err();
        assert!(err.starts_with("states[0].prior"), "{err}");

        let text = r#"{"parties": [2, 2], "states": [{"prior": 1.0, "matrix": {"dim": 4,
            "re": [[1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}}]}"#;
        let err = EnsembleFile::parse(text).unwrap().to_ensemble().unwrap_err();
        assert!(err.starts_with("states[0].matrix"), "{err}");
    }

    #[test]
    fn explicit_round_trip() {
        let text = r#"{"parties": [2, 2], "states": [
            {"prior": 0.25, "builder": {"kind": "basis_product", "m": 2, "d": 2, "i": 1}},
            {"prior": 0.75, "builder": {"kind": "identity_mix", "m": 2, "d": 2, "weights": [1, 1]}}]}"#;
        let e = EnsembleFile::parse(text).unwrap().to_ensemble().unwrap();
        let file = EnsembleFile::from_ensemble(&e);
        let json = serde_json::to_string(&file).unwrap();
        let back = EnsembleFile::parse(&json).unwrap().to_ensemble().unwrap();
        assert_eq!(back, e);
    }
}
