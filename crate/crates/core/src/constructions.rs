//! The two worked ensembles, their operators and measurements.
//!
//! The first is a two-state GHZ ensemble whose LOCC discrimination is not
//! factorizable over copies. The second is a `(d+2)`-state ensemble whose
//! LOCC discrimination factorizes while staying strictly between the largest
//! prior and the global optimum.

use num_complex::Complex64;

use crate::ensemble::{Measurement, StateEnsemble};
use crate::error::{Error, Result};
use crate::operator::{CVector, HermitianOperator};
use crate::product::ProductPureState;
use crate::structure::{Ordering, PartyStructure};

fn dm(m: usize, d: usize) -> f64 {
    (d as f64).powi(m as i32)
}

fn identity(m: usize, d: usize) -> Result<HermitianOperator> {
    Ok(HermitianOperator::identity(PartyStructure::uniform(m, d)?))
}

/// Convex mixture `w_0 𝟙/d^m + w_1 Φ_d^m`, weights normalized to sum one.
pub fn identity_mix(m: usize, d: usize, weights: [f64; 2]) -> Result<HermitianOperator> {
    let total = weights[0] + weights[1];
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || !(total > 0.0) {
        return Err(Error::InvalidEnsemble(format!("invalid mixture weights {weights:?}")));
    }
    let phi = HermitianOperator::ghz(m, d)?;
    identity(m, d)?.combine(weights[0] / total / dm(m, d), &phi, weights[1] / total)
}

/// Priors of the first example: `2d^m/(d+3d^m)` and `(d+d^m)/(d+3d^m)`.
pub fn example1_priors(m: usize, d: usize) -> [f64; 2] {
    let n = d as f64 + 3.0 * dm(m, d);
    [2.0 * dm(m, d) / n, (d as f64 + dm(m, d)) / n]
}

/// State `which ∈ {0, 1}` of the first example.
pub fn example1_state(m: usize, d: usize, which: usize) -> Result<HermitianOperator> {
    let phi = HermitianOperator::ghz(m, d)?;
    match which {
        0 => identity(m, d)?.combine(1.0 / (2.0 * dm(m, d)), &phi, 0.5),
        1 => Ok(phi),
        _ => Err(Error::IndexOutOfRange(format!("the first example has two states, got index {which}"))),
    }
}

pub fn example1_ensemble(m: usize, d: usize) -> Result<StateEnsemble> {
    let priors = example1_priors(m, d);
    StateEnsemble::new(vec![
        (priors[0], example1_state(m, d, 0)?),
        (priors[1], example1_state(m, d, 1)?),
    ])
}

/// `𝟙 − dΦ_d^m`, proportional to `η_1ρ_1 − η_2ρ_2` of the first example.
pub fn identity_minus_ghz(m: usize, d: usize) -> Result<HermitianOperator> {
    identity(m, d)?.combine(1.0, &HermitianOperator::ghz(m, d)?, -(d as f64))
}

/// `(𝟙 − dΦ) ⊗ (𝟙 + d^mΦ)` in step-major ordering.
pub fn example1_violation_operator(m: usize, d: usize) -> Result<HermitianOperator> {
    let plus = identity(m, d)?.combine(1.0, &HermitianOperator::ghz(m, d)?, dm(m, d))?;
    identity_minus_ghz(m, d)?.tensor(&plus)
}

/// `(1/√d) Σ_i |i⟩|i⟩` on one party's two step-subsystems.
fn two_qudit_ghz_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

/// Product state with each party holding `Φ_d^2` across its two steps.
pub fn example1_witness(m: usize, d: usize) -> Result<ProductPureState> {
    ProductPureState::new(vec![two_qudit_ghz_vector(d); m])
}

/// The same witness as a density operator on the two-step space, party-major.
pub fn example1_witness_operator(m: usize, d: usize) -> Result<HermitianOperator> {
    let structure = PartyStructure::new(vec![d; m], 2, Ordering::PartyMajor)?;
    HermitianOperator::projector(structure, &example1_witness(m, d)?.full_vector())
}

/// Priors of the second example, `d + 2` entries.
pub fn example2_priors(m: usize, d: usize) -> Vec<f64> {
    let n = dm(m, d) + d as f64;
    let mut priors = vec![1.0 / n; d];
    priors.push((dm(m, d) - d as f64) / n);
    priors.push(d as f64 / n);
    priors
}

/// The operators `R_i = (d^m + d) η_i ρ_i` of the second example, zero-based.
pub fn example2_r(m: usize, d: usize, which: usize) -> Result<HermitianOperator> {
    if which < d {
        HermitianOperator::basis_product_projector(m, d, which)
    } else if which == d {
        let mut diag = vec![1.0; PartyStructure::uniform(m, d)?.total_dim()];
        for i in 0..d {
            diag[crate::operator::repeated_digit_index(m, d, i)] = 0.0;
        }
        HermitianOperator::from_diagonal(PartyStructure::uniform(m, d)?, &diag)
    } else if which == d + 1 {
        Ok(HermitianOperator::ghz(m, d)?.scale(d as f64))
    } else {
        Err(Error::IndexOutOfRange(format!("the second example has {} states, got index {which}", d + 2)))
    }
}

/// State `which ∈ 0..d+2` of the second example.
pub fn example2_state(m: usize, d: usize, which: usize) -> Result<HermitianOperator> {
    let r = example2_r(m, d, which)?;
    if which == d {
        Ok(r.scale(1.0 / (dm(m, d) - d as f64)))
    } else if which == d + 1 {
        HermitianOperator::ghz(m, d)
    } else {
        Ok(r)
    }
}

pub fn example2_ensemble(m: usize, d: usize) -> Result<StateEnsemble> {
    let priors = example2_priors(m, d);
    let items = priors
        .iter()
        .enumerate()
        .map(|(i, &p)| Ok((p, example2_state(m, d, i)?)))
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(items)
}

/// Local computational-basis measurement: `Ψ_0 … Ψ_{d−1}`, the rest, and zero.
pub fn example2_measurement(m: usize, d: usize) -> Result<Measurement> {
    let structure = PartyStructure::uniform(m, d)?;
    let mut ops = (0..=d).map(|i| example2_r(m, d, i)).collect::<Result<Vec<_>>>()?;
    ops.push(HermitianOperator::zeros(structure));
    Measurement::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_difference_is_scaled_primitive() {
        for (m, d) in [(2, 2), (2, 3), (3, 2)] {
            let e = example1_ensemble(m, d).unwrap();
            let diff = e.weighted_state(0).sub(&e.weighted_state(1)).unwrap();
            let expected = identity_minus_ghz(m, d).unwrap().scale(1.0 / (d as f64 + 3.0 * dm(m, d)));
            assert!(diff.max_abs_diff(&expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn example2_priors_sum_to_one() {
        for (m, d) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let s: f64 = example2_priors(m, d).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(example2_ensemble(m, d).is_ok());
        }
    }

    #[test]
    fn example2_r_matches_weighted_states() {
        let (m, d) = (2, 3);
        let e = example2_ensemble(m, d).unwrap();
        for i in 0..d + 2 {
            let r = example2_r(m, d, i).unwrap().scale(1.0 / (dm(m, d) + d as f64));
            assert!(r.max_abs_diff(&e.weighted_state(i)).unwrap() < 1e-15);
        }
    }

    #[test]
    fn witness_is_a_state() {
        let sigma = example1_witness_operator(2, 2).unwrap();
        assert!((sigma.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_mix_weights() {
        let rho = identity_mix(2, 2, [1.0, 1.0]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!(identity_mix(2, 2, [-1.0, 1.0]).is_err());
    }
}
