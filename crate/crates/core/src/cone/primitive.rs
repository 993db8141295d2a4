//! The registered block-positive primitive `𝟙_{d'}^m − d'Φ_{d'}^m`.
//!
//! Block positive because `max_{product} ⟨Φ_{d'}^m⟩ = 1/d'` for every `m ≥ 2`.

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::structure::{Ordering, PartyStructure, DEFAULT_MAX_DIM};

/// `𝟙 − d'Φ_{d'}^m` on `m` parties of dimension `d'`, one step.
pub fn known_primitive_bp(m: usize, dprime: usize) -> Result<HermitianOperator> {
    if m < 2 || dprime < 2 {
        return Err(Error::InvalidStructure(format!(
            "primitive needs m >= 2 and d' >= 2, got m = {m}, d' = {dprime}"
        )));
    }
    let structure = PartyStructure::uniform(m, dprime)?;
    HermitianOperator::identity(structure).combine(1.0, &HermitianOperator::ghz(m, dprime)?, -(dprime as f64))
}

/// The primitive with `d' = d^t`, each party's `t` step-subsystems grouped,
/// returned on party dims `d` over `t` steps in step-major ordering.
pub fn primitive_over_steps(m: usize, d: usize, t: usize) -> Result<HermitianOperator> {
    if t == 0 {
        return Err(Error::InvalidStructure("primitive over zero steps is the scalar 0".into()));
    }
    let dprime = d
        .checked_pow(t as u32)
        .ok_or(Error::DimensionBound { dim: usize::MAX, max: DEFAULT_MAX_DIM })?;
    let grouped = known_primitive_bp(m, dprime)?;
    let structure = PartyStructure::new(vec![d; m], t, Ordering::PartyMajor)?;
    Ok(grouped.reinterpret(structure)?.to_step_major())
}
