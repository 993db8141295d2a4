//! Minimum-error discrimination: the global guessing probability `p_G`.
//!
//! Every solver returns an optimal measurement together with a dual operator
//! `Y` satisfying `Y ⪰ η_i ρ_i`, so `Tr(Y)` is a certified upper bound and
//! the achieved success probability a certified lower bound.

mod barrier;
mod fixed_point;
mod helstrom;

use serde::Serialize;

pub use barrier::BarrierSolver;
pub use fixed_point::FixedPointSolver;
pub use helstrom::{helstrom_two_state, HelstromSolver};

use crate::ensemble::{Measurement, SequenceEnsemble, StateEnsemble};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

/// Eigenvalue floor for dual feasibility of `Y − η_i ρ_i`.
pub const DUAL_PSD_TOL: f64 = 1e-8;
pub const DEFAULT_PG_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgOptions {
    /// Required duality gap `Tr(Y) − value`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Largest dimension the interior-point solver accepts.
    pub max_dim: usize,
}

impl Default for PgOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_PG_TOL, max_iterations: DEFAULT_MAX_ITERATIONS, max_dim: 32 }
    }
}

impl PgOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PgResult {
    /// Success probability achieved by `measurement`.
    pub value: f64,
    pub measurement: Measurement,
    /// Dual operator with `Y ⪰ η_i ρ_i` for all `i`.
    pub dual: HermitianOperator,
    /// `Tr(Y) − value`.
    pub gap: f64,
    pub iterations: usize,
    pub solver: &'static str,
}

impl PgResult {
    /// Certified upper bound `Tr(Y)`.
    pub fn upper(&self) -> f64 {
        self.dual.trace()
    }

    /// `min_i λ_min(Y − η_i ρ_i)`.
    pub fn dual_feasibility(&self, ensemble: &StateEnsemble) -> Result<f64> {
        (0..ensemble.len())
            .map(|i| Ok(self.dual.sub(&ensemble.weighted_state(i))?.min_eigenvalue()))
            .try_fold(f64::INFINITY, |acc, v: Result<f64>| Ok(acc.min(v?)))
    }

    pub fn summary(&self) -> PgSummary {
        PgSummary { value: self.value, upper: self.upper(), gap: self.gap, solver: self.solver.to_string() }
    }
}

/// The numbers of a `PgResult` without the operators.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PgSummary {
    pub value: f64,
    pub upper: f64,
    pub gap: f64,
    pub solver: String,
}

/// A minimum-error discrimination solver.
pub trait PgSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, ensemble: &StateEnsemble, options: &PgOptions) -> Result<PgResult>;
}

/// Named solvers, selectable at runtime.
pub struct PgSolverRegistry {
    solvers: Vec<Box<dyn PgSolver>>,
}

impl Default for PgSolverRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(BarrierSolver));
        registry.register(Box::new(FixedPointSolver));
        registry.register(Box::new(HelstromSolver));
        registry
    }
}

impl PgSolverRegistry {
    pub fn empty() -> Self {
        Self { solvers: Vec::new() }
    }

    /// Registers a solver, replacing any solver with the same name.
    pub fn register(&mut self, solver: Box<dyn PgSolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn PgSolver> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }
}

/// `p_G` with the default interior-point solver.
pub fn solve_pg(ensemble: &StateEnsemble, tol: f64) -> Result<PgResult> {
    BarrierSolver.solve(ensemble, &PgOptions::with_tol(tol))
}

/// Result for one-state ensembles: `{𝟙}` is optimal and `Y = ρ_1`.
pub(crate) fn single_state_result(ensemble: &StateEnsemble, solver: &'static str) -> PgResult {
    PgResult {
        value: 1.0,
        measurement: Measurement::trivial(ensemble.structure().clone()),
        dual: ensemble.weighted_state(0),
        gap: 0.0,
        iterations: 0,
        solver,
    }
}

/// Comparison of `p_G(⊗E^l)` with `∏_l p_G(E^l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgFactorizationReport {
    pub sequence: PgSummary,
    pub per_step: Vec<PgSummary>,
    pub product: f64,
    pub difference: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Solves the flattened sequence ensemble and every step, and compares.
pub fn check_pg_factorization(
    sequence: &SequenceEnsemble,
    solver: &dyn PgSolver,
    options: &PgOptions,
) -> Result<PgFactorizationReport> {
    let per_step = sequence
        .factors()
        .iter()
        .map(|f| solver.solve(f, options))
        .collect::<Result<Vec<_>>>()?;
    let seq = if sequence.steps() == 1 {
        per_step[0].clone()
    } else {
        solver.solve(&sequence.flatten()?, options)?
    };
    let product: f64 = per_step.iter().map(|r| r.value).product();
    let difference = (seq.value - product).abs();
    Ok(PgFactorizationReport {
        sequence: seq.summary(),
        per_step: per_step.iter().map(PgResult::summary).collect(),
        product,
        difference,
        tol: options.tol,
        holds: difference <= options.tol,
    })
}
