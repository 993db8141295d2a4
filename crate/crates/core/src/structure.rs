//! Party structure of a multi-party, multi-step Hilbert space.
//!
//! A sequence of `L` states shared by `m` parties lives on
//! `(C^{d_1} ⊗ … ⊗ C^{d_m})^{⊗L}`. Two subsystem orderings are in use:
//! step-major, where the `m` subsystems of step 1 come first, and
//! party-major, where each party's `L` subsystems are contiguous. Both
//! orderings put the most significant digit first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    StepMajor,
    PartyMajor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyStructure {
    party_dims: Vec<usize>,
    steps: usize,
    ordering: Ordering,
    max_dim: usize,
}

impl PartyStructure {
    pub fn new(party_dims: Vec<usize>, steps: usize, ordering: Ordering) -> Result<Self> {
        Self::with_max_dim(party_dims, steps, ordering, DEFAULT_MAX_DIM)
    }

    /// Single-step structure with `m` parties of local dimension `d`.
    pub fn uniform(m: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; m], 1, Ordering::StepMajor)
    }

    pub fn with_max_dim(
        party_dims: Vec<usize>,
        steps: usize,
        ordering: Ordering,
        max_dim: usize,
    ) -> Result<Self> {
        if party_dims.len() < 2 {
            return Err(Error::InvalidStructure(format!(
                "need at least two parties, got {}",
                party_dims.len()
            )));
        }
        if let Some(d) = party_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidStructure(format!(
                "local dimensions must be at least 2, got {d}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidStructure("step count must be at least 1".into()));
        }
        let dim = checked_total(&party_dims, steps)
            .filter(|&dim| dim <= max_dim)
            .ok_or(Error::DimensionBound {
                dim: checked_total(&party_dims, steps).unwrap_or(usize::MAX),
                max: max_dim,
            })?;
        debug_assert!(dim >= 4);
        Ok(Self { party_dims, steps, ordering, max_dim })
    }

    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn parties(&self) -> usize {
        self.party_dims.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Dimension of one step, `∏_k d_k`.
    pub fn step_dim(&self) -> usize {
        self.party_dims.iter().product()
    }

    /// Dimension `d_k^L` of everything party `k` holds.
    pub fn party_total_dim(&self, k: usize) -> usize {
        self.party_dims[k].pow(self.steps as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.step_dim().pow(self.steps as u32)
    }

    /// With a single step both orderings coincide.
    pub fn is_party_major(&self) -> bool {
        self.steps == 1 || self.ordering == Ordering::PartyMajor
    }

    pub fn is_step_major(&self) -> bool {
        self.steps == 1 || self.ordering == Ordering::StepMajor
    }

    pub fn with_ordering(&self, ordering: Ordering) -> Self {
        Self { ordering, ..self.clone() }
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::with_max_dim(self.party_dims.clone(), steps, self.ordering, self.max_dim)
    }

    /// Same party dimensions and step count, ignoring ordering and cap.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.party_dims == other.party_dims && self.steps == other.steps
    }

    /// Radices of the subsystems in the given ordering, most significant first.
    pub(crate) fn subsystem_dims(&self, ordering: Ordering) -> Vec<usize> {
        match ordering {
            Ordering::StepMajor => (0..self.steps)
                .flat_map(|_| self.party_dims.iter().copied())
                .collect(),
            Ordering::PartyMajor => self
                .party_dims
                .iter()
                .flat_map(|&d| std::iter::repeat_n(d, self.steps))
                .collect(),
        }
    }
}

fn checked_total(party_dims: &[usize], steps: usize) -> Option<usize> {
    let step = party_dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))?;
    step.checked_pow(steps as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_single_party() {
        assert!(PartyStructure::new(vec![2], 1, Ordering::StepMajor).is_err());
    }

    #[test]
    fn rejects_small_local_dim() {
        assert!(PartyStructure::new(vec![2, 1], 1, Ordering::StepMajor).is_err());
    }

    #[test]
    fn rejects_zero_steps() {
        assert!(PartyStructure::new(vec![2, 2], 0, Ordering::StepMajor).is_err());
    }

    #[test]
    fn dimension_bound() {
        let err = PartyStructure::new(vec![4, 4, 4], 3, Ordering::StepMajor).unwrap_err();
        assert_eq!(err, Error::DimensionBound { dim: 262_144, max: DEFAULT_MAX_DIM });
        assert!(PartyStructure::with_max_dim(vec![2, 2], 2, Ordering::StepMajor, 8).is_err());
    }

    #[test]
    fn subsystem_layout() {
        let s = PartyStructure::new(vec![2, 3], 2, Ordering::StepMajor).unwrap();
        assert_eq!(s.total_dim(), 36);
        assert_eq!(s.subsystem_dims(Ordering::StepMajor), vec![2, 3, 2, 3]);
        assert_eq!(s.subsystem_dims(Ordering::PartyMajor), vec![2, 2, 3, 3]);
        assert_eq!(s.party_total_dim(1), 9);
    }
}
