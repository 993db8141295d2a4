//! Iterative fixed-point measurement updates
//! `M_i ← Λ^{-1} η_iρ_i M_i η_iρ_i Λ^{-1}` with `Λ = (Σ_j η_jρ_j M_j η_jρ_j)^{1/2}`.
//!
//! The dual witness is `Y = sym(Σ_i η_iρ_i M_i)`, lifted by the largest
//! violation of `Y ⪰ η_iρ_i` so it is always feasible.

use num_complex::Complex64;

use super::{single_state_result, PgOptions, PgResult, PgSolver};
use crate::ensemble::{Measurement, StateEnsemble};
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigh, symmetrize, trace_of_product, CMatrix, HermitianOperator};

const SUPPORT_CUTOFF: f64 = 1e-14;

pub struct FixedPointSolver;

impl PgSolver for FixedPointSolver {
    fn name(&self) -> &'static str {
        "fixed-point"
    }

    fn solve(&self, ensemble: &StateEnsemble, options: &PgOptions) -> Result<PgResult> {
        if ensemble.len() == 1 {
            return Ok(single_state_result(ensemble, self.name()));
        }
        let dim = ensemble.structure().total_dim();
        let n = ensemble.len();
        let weighted: Vec<CMatrix> = (0..n).map(|i| ensemble.weighted_state(i).into_matrix()).collect();
        let mut povm = vec![CMatrix::identity(dim, dim) * Complex64::new(1.0 / n as f64, 0.0); n];
        let mut best: Option<(f64, f64, CMatrix, Vec<CMatrix>)> = None;

        for iteration in 0..options.max_iterations {
            let value: f64 = weighted.iter().zip(&povm).map(|(c, m)| trace_of_product(c, m)).sum();
            let y = symmetrize(weighted.iter().zip(&povm).fold(CMatrix::zeros(dim, dim), |acc, (c, m)| acc + c * m));
            let violation = weighted
                .iter()
                .map(|c| -hermitian_eigh(&(&y - c)).0[0])
                .fold(0.0, f64::max);
            let dual = &y + CMatrix::identity(dim, dim) * Complex64::new(violation, 0.0);
            let trace: f64 = dual.diagonal().iter().map(|z| z.re).sum();
            let gap = (trace - value).max(0.0);
            if best.as_ref().is_none_or(|b| gap < b.1) {
                best = Some((value, gap, dual, povm.clone()));
            }
            if gap <= options.tol {
                let (value, gap, dual, povm) = best.expect("just set");
                let structure = ensemble.structure().clone();
                let measurement = Measurement::new(
                    povm.into_iter().map(|m| HermitianOperator::from_raw(structure.clone(), m)).collect(),
                )?;
                return Ok(PgResult {
                    value,
                    measurement,
                    dual: HermitianOperator::from_raw(structure, dual),
                    gap,
                    iterations: iteration + 1,
                    solver: self.name(),
                });
            }
            povm = update(&weighted, &povm);
        }
        Err(Error::NonConvergence {
            iterations: options.max_iterations,
            best_gap: best.map_or(f64::INFINITY, |b| b.1),
        })
    }
}

fn update(weighted: &[CMatrix], povm: &[CMatrix]) -> Vec<CMatrix> {
    let dim = povm[0].nrows();
    let n = povm.len();
    let sandwiched: Vec<CMatrix> = weighted.iter().zip(povm).map(|(c, m)| symmetrize(c * m * c)).collect();
    let total = sandwiched.iter().fold(CMatrix::zeros(dim, dim), |acc, s| acc + s);
    let (values, vectors) = hermitian_eigh(&total);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let mut inv_sqrt = CMatrix::zeros(dim, dim);
    let mut kernel = CMatrix::zeros(dim, dim);
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let outer = v * v.adjoint();
        if lambda > SUPPORT_CUTOFF * top.max(1e-300) {
            inv_sqrt += outer * Complex64::new(1.0 / lambda.sqrt(), 0.0);
        } else {
            kernel += outer;
        }
    }
    let share = kernel * Complex64::new(1.0 / n as f64, 0.0);
    sandwiched
        .iter()
        .map(|s| symmetrize(&inv_sqrt * s * &inv_sqrt + &share))
        .collect()
}
