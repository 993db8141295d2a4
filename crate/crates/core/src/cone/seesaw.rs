//! Alternating minimization of `⟨⊗ψ_k|A|⊗ψ_k⟩` over product pure states.
//!
//! Each update replaces one party's vector by the minimum eigenvector of the
//! operator with all other parties contracted, so the value never increases.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{hermitian_eig_min, HermitianOperator};
use crate::product::ProductPureState;
use crate::random::{random_unit_vector, stream_rng};

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_SWEEPS: usize = 200;
pub const DEFAULT_SEED: u64 = 20240;
pub const DEFAULT_IMPROVEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawParams {
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// A sweep improving the value by less than this ends the restart.
    pub improvement_tol: f64,
}

impl Default for SeesawParams {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            sweeps: DEFAULT_SWEEPS,
            seed: DEFAULT_SEED,
            improvement_tol: DEFAULT_IMPROVEMENT_TOL,
        }
    }
}

/// One alternating run from a given start.
#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub value: f64,
    pub state: ProductPureState,
    /// Value after every single-party update.
    pub history: Vec<f64>,
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct SeesawOutcome {
    pub value: f64,
    pub state: ProductPureState,
    /// Zero-based restart that produced the minimum.
    pub restart: usize,
    pub sweeps: usize,
}

/// Runs the alternating updates from `start`.
pub fn seesaw_from(op: &HermitianOperator, start: ProductPureState, sweeps: usize, improvement_tol: f64) -> Result<SeesawRun> {
    let op = op.to_party_major();
    let m = op.structure().parties();
    if m < 2 {
        return Err(Error::InvalidStructure("product minimization needs at least two parties".into()));
    }
    let mut state = start;
    let mut value = state.expectation(&op)?;
    let mut history = Vec::with_capacity(sweeps * m);
    let mut done = 0;
    for _ in 0..sweeps {
        let before = value;
        for k in 0..m {
            let local = op.contract_all_but_one(&state, k)?;
            let (lambda, v) = hermitian_eig_min(&local)?;
            let norm = v.norm();
            state.set_factor(k, v / Complex64::new(norm, 0.0));
            value = lambda;
            history.push(value);
        }
        done += 1;
        if before - value < improvement_tol {
            break;
        }
    }
    Ok(SeesawRun { value, state, history, sweeps: done })
}

/// Random product start for restart `r`.
pub fn random_start(op: &HermitianOperator, seed: u64, restart: usize) -> Result<ProductPureState> {
    let s = op.structure();
    let mut rng = stream_rng(seed, restart as u64);
    ProductPureState::new((0..s.parties()).map(|k| random_unit_vector(&mut rng, s.party_total_dim(k))).collect())
}

/// Best value over seeded restarts, run in parallel; ties go to the lowest restart.
pub fn seesaw_min_product(op: &HermitianOperator, params: &SeesawParams) -> Result<SeesawOutcome> {
    if params.restarts == 0 {
        return Err(Error::InvalidStructure("see-saw needs at least one restart".into()));
    }
    let op = op.to_party_major();
    let runs = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let start = random_start(&op, params.seed, r)?;
            seesaw_from(&op, start, params.sweeps, params.improvement_tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.value < a.1.value { b } else { a })
        .expect("at least one restart");
    Ok(SeesawOutcome { value: best.value, state: best.state, restart, sweeps: best.sweeps })
}
