use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{CVector, HermitianOperator};

/// Norm tolerance for the per-party unit vectors.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A product pure state `ψ_1 ⊗ … ⊗ ψ_m`, one unit vector per party.
///
/// Each factor covers everything the party holds, so for `L` steps it has
/// dimension `d_k^L` and matches the party-major ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPureState {
    factors: Vec<CVector>,
}

impl ProductPureState {
    pub fn new(factors: Vec<CVector>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ShapeMismatch("product state without factors".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            let norm = f.norm();
            if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
                return Err(Error::ShapeMismatch(format!("factor {k} has norm {norm}")));
            }
        }
        Ok(Self { factors })
    }

    /// Normalizes each factor; fails on a zero vector.
    pub fn normalized(factors: Vec<CVector>) -> Result<Self> {
        let factors = factors
            .into_iter()
            .enumerate()
            .map(|(k, f)| {
                let norm = f.norm();
                if norm > 0.0 && norm.is_finite() {
                    Ok(f / Complex64::new(norm, 0.0))
                } else {
                    Err(Error::ShapeMismatch(format!("factor {k} cannot be normalized")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn factors(&self) -> &[CVector] {
        &self.factors
    }

    pub(crate) fn set_factor(&mut self, k: usize, v: CVector) {
        self.factors[k] = v;
    }

    /// The full vector `⊗_k ψ_k` in party-major order.
    pub fn full_vector(&self) -> CVector {
        let mut iter = self.factors.iter();
        let first = iter.next().expect("non-empty").clone();
        iter.fold(first, |acc, f| acc.kronecker(f))
    }

    /// `⟨⊗ψ|A|⊗ψ⟩`, with `A` regrouped to party-major order if needed.
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        let s = op.structure();
        if s.parties() != self.factors.len()
            || (0..s.parties()).any(|k| s.party_total_dim(k) != self.factors[k].len())
        {
            return Err(Error::ShapeMismatch("product state does not match operator structure".into()));
        }
        op.to_party_major().quadratic_form(&self.full_vector())
    }
}

/// Serializable form of a product state: per-party real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductStateRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ProductPureState> for ProductStateRecord {
    fn from(state: &ProductPureState) -> Self {
        Self {
            re: state.factors.iter().map(|f| f.iter().map(|z| z.re).collect()).collect(),
            im: state.factors.iter().map(|f| f.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl TryFrom<&ProductStateRecord> for ProductPureState {
    type Error = Error;

    fn try_from(rec: &ProductStateRecord) -> Result<Self> {
        if rec.re.len() != rec.im.len() || rec.re.iter().zip(&rec.im).any(|(r, i)| r.len() != i.len()) {
            return Err(Error::ShapeMismatch("real and imaginary parts differ in shape".into()));
        }
        let factors = rec
            .re
            .iter()
            .zip(&rec.im)
            .map(|(r, i)| CVector::from_iterator(r.len(), r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b))))
            .collect();
        Self::new(factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::PartyStructure;

    #[test]
    fn rejects_unnormalized() {
        let v = CVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(ProductPureState::new(vec![v.clone(), v.clone()]).is_err());
        assert!(ProductPureState::normalized(vec![v.clone(), v]).is_ok());
        assert!(ProductPureState::normalized(vec![CVector::zeros(2)]).is_err());
    }

    #[test]
    fn expectation_of_product_operator() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let diag = HermitianOperator::from_diagonal(s, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let e0 = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let e1 = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let state = ProductPureState::new(vec![e0, e1]).unwrap();
        assert_eq!(state.expectation(&diag).unwrap(), 3.0);
    }

    #[test]
    fn record_round_trip() {
        let v = CVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let state = ProductPureState::new(vec![v.clone(), v]).unwrap();
        let rec = ProductStateRecord::from(&state);
        assert_eq!(ProductPureState::try_from(&rec).unwrap(), state);
    }
}
