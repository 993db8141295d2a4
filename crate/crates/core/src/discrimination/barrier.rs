//! Log-barrier interior-point method on the dual problem
//! `min Tr(Y) s.t. Y − η_i ρ_i ≻ 0`.
//!
//! For barrier weight `t` the centering problem is
//! `t·Tr(Y) − Σ_i log det(Y − η_i ρ_i)`, solved by damped Newton steps over
//! the real coordinates of `Y`. At every center the inverse slacks
//! `W_i = (Y − η_i ρ_i)^{-1}` give an exactly normalized primal measurement
//! `M_i = S^{-1/2} W_i S^{-1/2}` with `S = Σ_i W_i`, so each outer iteration
//! yields a feasible primal-dual pair and a rigorous gap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{single_state_result, PgOptions, PgResult, PgSolver};
use crate::ensemble::{Measurement, StateEnsemble};
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigh, spectral_map, symmetrize, trace_of_product, CMatrix, HermitianOperator};

const BARRIER_GROWTH: f64 = 8.0;
const MAX_CENTERING_STEPS: usize = 60;
const CENTERED: f64 = 1e-12;
const MAX_BARRIER_WEIGHT: f64 = 1e15;

pub struct BarrierSolver;

impl PgSolver for BarrierSolver {
    fn name(&self) -> &'static str {
        "barrier"
    }

    fn solve(&self, ensemble: &StateEnsemble, options: &PgOptions) -> Result<PgResult> {
        if ensemble.len() == 1 {
            return Ok(single_state_result(ensemble, self.name()));
        }
        let dim = ensemble.structure().total_dim();
        if dim > options.max_dim {
            return Err(Error::Unsupported(format!(
                "interior-point solver limited to dimension {}, got {dim}",
                options.max_dim
            )));
        }
        let weighted: Vec<CMatrix> = (0..ensemble.len())
            .map(|i| ensemble.weighted_state(i).into_matrix())
            .collect();
        let basis = HermitianBasis::new(dim);
        let shift = weighted
            .iter()
            .map(|c| hermitian_eigh(c).0.last().copied().unwrap_or(0.0))
            .fold(0.0, f64::max)
            + 1.0;
        let mut y = CMatrix::identity(dim, dim) * Complex64::new(shift, 0.0);
        let n = weighted.len() as f64;
        let mut t = n / shift;
        let mut iterations = 0usize;
        let mut best: Option<Candidate> = None;

        loop {
            for _ in 0..MAX_CENTERING_STEPS {
                let inverses = slack_inverses(&y, &weighted).ok_or_else(|| Error::NonConvergence {
                    iterations,
                    best_gap: best.as_ref().map_or(f64::INFINITY, |b| b.gap),
                })?;
                let mut g = CMatrix::identity(dim, dim) * Complex64::new(t, 0.0);
                for w in &inverses {
                    g -= w;
                }
                let grad = basis.coords(&g);
                let hess = basis.hessian(&inverses);
                let step = solve_newton(hess, &grad);
                let decrement = -grad.dot(&step);
                iterations += 1;
                if !(decrement > CENTERED) {
                    break;
                }
                let direction = basis.matrix(&step);
                let mut size = if decrement.sqrt() < 0.25 { 1.0 } else { 1.0 / (1.0 + decrement.sqrt()) };
                let mut moved = false;
                while size > 1e-12 {
                    let trial = &y + &direction * Complex64::new(size, 0.0);
                    if slacks_positive(&trial, &weighted) {
                        y = symmetrize(trial);
                        moved = true;
                        break;
                    }
                    size *= 0.5;
                }
                if !moved || iterations >= options.max_iterations {
                    break;
                }
            }

            if let Some(candidate) = Candidate::at(&y, &weighted) {
                if best.as_ref().is_none_or(|b| candidate.gap < b.gap) {
                    best = Some(candidate);
                }
            }
            let best_gap = best.as_ref().map_or(f64::INFINITY, |b| b.gap);
            if best_gap <= options.tol {
                break;
            }
            if iterations >= options.max_iterations || t > MAX_BARRIER_WEIGHT {
                return Err(Error::NonConvergence { iterations, best_gap });
            }
            t *= BARRIER_GROWTH;
        }

        let best = best.expect("loop exits with a candidate");
        let structure = ensemble.structure().clone();
        let measurement = Measurement::new(
            best.measurement
                .into_iter()
                .map(|m| HermitianOperator::from_raw(structure.clone(), m))
                .collect(),
        )?;
        Ok(PgResult {
            value: best.value,
            measurement,
            dual: HermitianOperator::from_raw(structure, best.dual),
            gap: best.gap,
            iterations,
            solver: self.name(),
        })
    }
}

struct Candidate {
    value: f64,
    gap: f64,
    dual: CMatrix,
    measurement: Vec<CMatrix>,
}

impl Candidate {
    fn at(y: &CMatrix, weighted: &[CMatrix]) -> Option<Self> {
        let inverses = slack_inverses(y, weighted)?;
        let dim = y.nrows();
        let total = inverses.iter().fold(CMatrix::zeros(dim, dim), |acc, w| acc + w);
        let (values, _) = hermitian_eigh(&total);
        if !(values[0] > 0.0) {
            return None;
        }
        let inv_sqrt = spectral_map(&total, |x| 1.0 / x.sqrt());
        let measurement: Vec<CMatrix> = inverses
            .iter()
            .map(|w| symmetrize(&inv_sqrt * w * &inv_sqrt))
            .collect();
        let value: f64 = weighted
            .iter()
            .zip(&measurement)
            .map(|(c, m)| trace_of_product(c, m))
            .sum();
        let trace: f64 = y.diagonal().iter().map(|z| z.re).sum();
        Some(Self { value, gap: (trace - value).max(0.0), dual: y.clone(), measurement })
    }
}

fn slacks_positive(y: &CMatrix, weighted: &[CMatrix]) -> bool {
    weighted.iter().all(|c| (y - c).cholesky().is_some())
}

fn slack_inverses(y: &CMatrix, weighted: &[CMatrix]) -> Option<Vec<CMatrix>> {
    weighted
        .iter()
        .map(|c| (y - c).cholesky().map(|ch| symmetrize(ch.inverse())))
        .collect()
}

fn solve_newton(hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let rhs = -grad;
    if let Some(ch) = hess.clone().cholesky() {
        return ch.solve(&rhs);
    }
    // numerically indefinite near the boundary: regularize the diagonal
    let scale = hess.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut reg = 1e-14 * scale;
    loop {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += reg;
        }
        if let Some(ch) = h.cholesky() {
            return ch.solve(&rhs);
        }
        reg *= 100.0;
    }
}

#[derive(Clone, Copy)]
enum Element {
    Diag(usize),
    Sym(usize, usize),
    Anti(usize, usize),
}

/// Orthonormal basis of Hermitian matrices under `Tr(AB)`.
struct HermitianBasis {
    elements: Vec<Element>,
}

impl HermitianBasis {
    fn new(dim: usize) -> Self {
        let mut elements: Vec<Element> = (0..dim).map(Element::Diag).collect();
        for j in 0..dim {
            for k in j + 1..dim {
                elements.push(Element::Sym(j, k));
                elements.push(Element::Anti(j, k));
            }
        }
        Self { elements }
    }

    /// Coordinates `Tr(X E_a)` of a Hermitian matrix.
    fn coords(&self, x: &CMatrix) -> DVector<f64> {
        let s2 = std::f64::consts::SQRT_2;
        DVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|e| match *e {
                Element::Diag(j) => x[(j, j)].re,
                Element::Sym(j, k) => s2 * x[(j, k)].re,
                Element::Anti(j, k) => s2 * x[(j, k)].im,
            }),
        )
    }

    fn matrix(&self, coords: &DVector<f64>) -> CMatrix {
        let dim = self.elements.iter().filter(|e| matches!(e, Element::Diag(_))).count();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut x = CMatrix::zeros(dim, dim);
        for (e, &a) in self.elements.iter().zip(coords.iter()) {
            match *e {
                Element::Diag(j) => x[(j, j)] += a,
                Element::Sym(j, k) => {
                    x[(j, k)] += a * h;
                    x[(k, j)] += a * h;
                }
                Element::Anti(j, k) => {
                    x[(j, k)] += Complex64::new(0.0, a * h);
                    x[(k, j)] -= Complex64::new(0.0, a * h);
                }
            }
        }
        x
    }

    /// `H_ab = Σ_i Tr(W_i E_a W_i E_b)`.
    fn hessian(&self, inverses: &[CMatrix]) -> DMatrix<f64> {
        let size = self.elements.len();
        let dim = inverses[0].nrows();
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ih = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let mut hess = DMatrix::zeros(size, size);
        for (a, e) in self.elements.iter().enumerate() {
            let mut acc = CMatrix::zeros(dim, dim);
            for w in inverses {
                match *e {
                    Element::Diag(j) => acc += w.column(j) * w.row(j),
                    Element::Sym(j, k) => {
                        acc += (w.column(j) * w.row(k) + w.column(k) * w.row(j)) * h;
                    }
                    Element::Anti(j, k) => {
                        acc += (w.column(j) * w.row(k) - w.column(k) * w.row(j)) * ih;
                    }
                }
            }
            hess.set_row(a, &self.coords(&acc).transpose());
        }
        // symmetrize rounding
        let t = hess.transpose();
        (hess + t) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_round_trip() {
        let basis = HermitianBasis::new(3);
        let mut x = CMatrix::zeros(3, 3);
        x[(0, 0)] = Complex64::new(1.0, 0.0);
        x[(0, 2)] = Complex64::new(0.5, -0.25);
        x[(2, 0)] = Complex64::new(0.5, 0.25);
        x[(1, 1)] = Complex64::new(-2.0, 0.0);
        let back = basis.matrix(&basis.coords(&x));
        assert!(crate::operator::max_abs(&(back - &x)) < 1e-15);
        // orthonormality: ‖coords‖² = Tr(X²)
        let c = basis.coords(&x);
        assert!((c.dot(&c) - trace_of_product(&x, &x)).abs() < 1e-14);
    }
}
