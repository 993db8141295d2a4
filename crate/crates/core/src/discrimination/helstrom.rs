use num_complex::Complex64;

use super::{PgOptions, PgResult, PgSolver};
use crate::ensemble::{Measurement, StateEnsemble};
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigh, CMatrix, HermitianOperator};

/// `(1 + ‖η_1ρ_1 − η_2ρ_2‖_1) / 2`.
pub fn helstrom_two_state(ensemble: &StateEnsemble) -> Result<f64> {
    if ensemble.len() != 2 {
        return Err(Error::Unsupported(format!(
            "two-state closed form needs 2 states, got {}",
            ensemble.len()
        )));
    }
    let diff = ensemble.weighted_state(0).sub(&ensemble.weighted_state(1))?;
    let trace_norm: f64 = diff.eigenvalues().iter().map(|v| v.abs()).sum();
    Ok(0.5 * (1.0 + trace_norm))
}

/// Projects onto the positive part of `η_1ρ_1 − η_2ρ_2`.
pub struct HelstromSolver;

impl PgSolver for HelstromSolver {
    fn name(&self) -> &'static str {
        "helstrom"
    }

    fn solve(&self, ensemble: &StateEnsemble, _options: &PgOptions) -> Result<PgResult> {
        if ensemble.len() != 2 {
            return Err(Error::Unsupported(format!(
                "helstrom solver needs 2 states, got {}",
                ensemble.len()
            )));
        }
        let structure = ensemble.structure().clone();
        let second = ensemble.weighted_state(1);
        let diff = ensemble.weighted_state(0).sub(&second)?;
        let (values, vectors) = hermitian_eigh(diff.matrix());
        let dim = diff.dim();
        let mut projector = CMatrix::zeros(dim, dim);
        let mut positive_part = CMatrix::zeros(dim, dim);
        for (j, &lambda) in values.iter().enumerate().filter(|(_, &l)| l > 0.0) {
            let v = vectors.column(j);
            let outer = v * v.adjoint();
            positive_part += &outer * Complex64::new(lambda, 0.0);
            projector += outer;
        }
        let first_op = HermitianOperator::from_raw(structure.clone(), projector);
        let rest = HermitianOperator::identity(structure.clone()).sub(&first_op)?;
        let measurement = Measurement::new(vec![first_op, rest])?;
        // Y = η_2ρ_2 + (η_1ρ_1 − η_2ρ_2)_+
        let dual = second.add(&HermitianOperator::from_raw(structure, positive_part))?;
        let value = crate::ensemble::success_probability(ensemble, &measurement)?;
        let gap = (dual.trace() - value).max(0.0);
        Ok(PgResult { value, measurement, dual, gap, iterations: 1, solver: self.name() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::example1_ensemble;
    use crate::structure::PartyStructure;

    #[test]
    fn identical_states_give_max_prior() {
        let rho = HermitianOperator::ghz(2, 2).unwrap();
        for p in [0.5, 0.7, 0.2] {
            let e = StateEnsemble::new(vec![(p, rho.clone()), (1.0 - p, rho.clone())]).unwrap();
            assert!((helstrom_two_state(&e).unwrap() - p.max(1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_states_are_perfect() {
        let a = HermitianOperator::basis_product_projector(2, 2, 0).unwrap();
        let b = HermitianOperator::basis_product_projector(2, 2, 1).unwrap();
        let e = StateEnsemble::new(vec![(0.3, a), (0.7, b)]).unwrap();
        assert!((helstrom_two_state(&e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn example1_closed_form() {
        // trace norm of (𝟙 − dΦ)/(d + 3d^m): spectrum {1−d, 1^(d^m−1)}
        let (m, d) = (2usize, 2usize);
        let dm = (d as f64).powi(m as i32);
        let expected = (2.0 * dm + d as f64 - 1.0) / (d as f64 + 3.0 * dm);
        assert!((expected - 9.0 / 14.0).abs() < 1e-15);
        let e = example1_ensemble(m, d).unwrap();
        assert!((helstrom_two_state(&e).unwrap() - expected).abs() < 1e-12);
        let r = HelstromSolver.solve(&e, &PgOptions::default()).unwrap();
        assert!((r.value - expected).abs() < 1e-12);
        assert!(r.gap < 1e-12);
        assert!(r.dual_feasibility(&e).unwrap() >= -1e-12);
    }

    #[test]
    fn wrong_count() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let e = StateEnsemble::new(vec![(1.0, HermitianOperator::identity(s).scale(0.25))]).unwrap();
        assert!(helstrom_two_state(&e).is_err());
    }
}
