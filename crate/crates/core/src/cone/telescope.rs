//! `⊗_j A_j − ⊗_j B_j = Σ_j A_1⊗⋯⊗A_{j−1}⊗(A_j − B_j)⊗B_{j+1}⊗⋯⊗B_K`.

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

#[derive(Debug, Clone)]
pub struct TelescopeTerm {
    pub prefix: Vec<HermitianOperator>,
    pub difference: HermitianOperator,
    pub suffix: Vec<HermitianOperator>,
}

impl TelescopeTerm {
    pub fn operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::tensor_all(self.prefix.iter().chain([&self.difference]).chain(&self.suffix))
    }
}

pub fn telescope(a: &[HermitianOperator], b: &[HermitianOperator]) -> Result<Vec<TelescopeTerm>> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("telescope over {} and {} factors", a.len(), b.len())));
    }
    (0..a.len())
        .map(|j| {
            Ok(TelescopeTerm {
                prefix: a[..j].to_vec(),
                difference: a[j].sub(&b[j])?,
                suffix: b[j + 1..].to_vec(),
            })
        })
        .collect()
}
