//! Decomposition certificates for block positivity.
//!
//! A certificate writes a target operator as a non-negative combination of
//! terms `B ⊗ S_1 ⊗ ⋯ ⊗ S_r`, where `B` is block positive (PSD or the
//! registered primitive `𝟙 − d'Φ_{d'}`) on the first steps and every `S_j`
//! is an explicit sum of PSD product operators on one step. Such a tensor
//! product is block positive, and so is the non-negative sum.

use serde::{Deserialize, Serialize};

use super::primitive::primitive_over_steps;
use crate::error::{Error, Result};
use crate::operator::{hermitian_deviation, hermitian_eigh, CMatrix, HermitianOperator, HERMITIAN_TOL};
use crate::record::cmatrix_list;
use crate::structure::{Ordering, PartyStructure};

/// Reconstruction must match the target entrywise within this bound.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Eigenvalue floor for PSD provenance.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockPositiveFactor {
    /// Verified by its spectrum.
    Psd { operator: HermitianOperator },
    /// `𝟙_{d^t}^m − d^t Φ_{d^t}^m` grouped over `t` steps; the scalar 0 when `t = 0`.
    Primitive { parties: usize, local_dim: usize, steps: usize },
    /// `𝟙` over `t` steps; the scalar 1 when `t = 0`.
    Identity { parties: usize, local_dim: usize, steps: usize },
}

impl BlockPositiveFactor {
    pub fn steps(&self) -> usize {
        match self {
            Self::Psd { operator } => operator.structure().steps(),
            Self::Primitive { steps, .. } | Self::Identity { steps, .. } => *steps,
        }
    }

    fn provenance(&self) -> &'static str {
        match self {
            Self::Psd { .. } => "psd",
            Self::Primitive { .. } => "registered primitive",
            Self::Identity { .. } => "identity",
        }
    }
}

/// `weight · ⊗_k local_k` with each local factor PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub weight: f64,
    #[serde(with = "cmatrix_list")]
    pub locals: Vec<CMatrix>,
}

/// A separable operator on one step, given as a sum of PSD product terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableFactor {
    pub products: Vec<ProductTerm>,
}

impl SeparableFactor {
    /// Diagonal operator as a sum of weighted computational product projectors.
    pub fn from_diagonal(party_dims: &[usize], diagonal: &[f64]) -> Self {
        let products = diagonal
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(mut flat, &w)| {
                let mut locals = vec![CMatrix::zeros(1, 1); party_dims.len()];
                for (k, &d) in party_dims.iter().enumerate().rev() {
                    let mut local = CMatrix::zeros(d, d);
                    local[(flat % d, flat % d)] = 1.0.into();
                    locals[k] = local;
                    flat /= d;
                }
                ProductTerm { weight: w, locals }
            })
            .collect();
        Self { products }
    }

    /// Rebuilds the operator on one step.
    pub fn to_operator(&self, structure: &PartyStructure) -> HermitianOperator {
        let dim = structure.total_dim();
        let mut total = CMatrix::zeros(dim, dim);
        for term in &self.products {
            let mut iter = term.locals.iter();
            let first = iter.next().cloned().unwrap_or_else(|| CMatrix::identity(1, 1));
            let product = iter.fold(first, |acc, l| acc.kronecker(l));
            if product.nrows() == dim {
                total += product * num_complex::Complex64::new(term.weight, 0.0);
            }
        }
        HermitianOperator::from_raw(structure.clone(), total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateTerm {
    pub coefficient: f64,
    pub block_positive: BlockPositiveFactor,
    pub separable: Vec<SeparableFactor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub target: HermitianOperator,
    pub terms: Vec<CertificateTerm>,
    /// When present, output step `j` of the reconstruction is step `step_order[j]`
    /// of the terms as written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_order: Option<Vec<usize>>,
}

/// Outcome of a successful verification.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub reconstruction_error: f64,
}

/// Verification failure, one entry per failing term or the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateError {
    pub issues: Vec<String>,
}

impl std::fmt::Display for CertificateError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.issues.join("; "))
    }
}

impl DecompositionCertificate {
    /// Single-term certificate for a PSD operator.
    pub fn psd(target: HermitianOperator) -> Self {
        Self {
            terms: vec![CertificateTerm {
                coefficient: 1.0,
                block_positive: BlockPositiveFactor::Psd { operator: target.clone() },
                separable: Vec::new(),
            }],
            target,
            step_order: None,
        }
    }

    /// Checks every provenance and the reconstruction.
    pub fn check(&self) -> std::result::Result<CertificateCheck, CertificateError> {
        let target = self.target.to_step_major();
        let structure = target.structure().clone();
        let mut issues = Vec::new();
        let mut total = HermitianOperator::zeros(structure.clone());
        for (j, term) in self.terms.iter().enumerate() {
            match self.term_operator(term, &structure) {
                Ok(op) => match total.add(&op) {
                    Ok(sum) => total = sum,
                    Err(e) => issues.push(format!("term {}: {e}", j + 1)),
                },
                Err(e) => issues.push(format!("term {}: {e}", j + 1)),
            }
        }
        if !issues.is_empty() {
            return Err(CertificateError { issues });
        }
        if let Some(order) = &self.step_order {
            match total.permute_steps(order) {
                Ok(p) => total = p,
                Err(e) => return Err(CertificateError { issues: vec![format!("step order: {e}")] }),
            }
        }
        let reconstruction_error = total.max_abs_diff(&target).unwrap_or(f64::INFINITY);
        if !(reconstruction_error <= RECONSTRUCTION_TOL) {
            return Err(CertificateError {
                issues: vec![format!("reconstruction differs from target by {reconstruction_error:e}")],
            });
        }
        Ok(CertificateCheck { reconstruction_error })
    }

    fn term_operator(&self, term: &CertificateTerm, structure: &PartyStructure) -> Result<HermitianOperator> {
        if !(term.coefficient >= 0.0) || !term.coefficient.is_finite() {
            return Err(Error::InvalidStructure(format!("negative coefficient {}", term.coefficient)));
        }
        let m = structure.parties();
        let dims = structure.party_dims();
        let bp_steps = term.block_positive.steps();
        if bp_steps + term.separable.len() != structure.steps() {
            return Err(Error::ShapeMismatch(format!(
                "{} block-positive steps and {} separable steps for a {}-step target",
                bp_steps,
                term.separable.len(),
                structure.steps()
            )));
        }
        let leading = match &term.block_positive {
            BlockPositiveFactor::Psd { operator } => {
                if operator.structure().party_dims() != dims {
                    return Err(Error::ShapeMismatch("psd factor has different party dimensions".into()));
                }
                if let Err(lambda) = operator.check_psd(PSD_TOL) {
                    return Err(Error::InvalidStructure(format!(
                        "psd factor has eigenvalue at most {lambda:e}"
                    )));
                }
                Leading::Operator(operator.to_step_major())
            }
            BlockPositiveFactor::Primitive { parties, local_dim, steps }
            | BlockPositiveFactor::Identity { parties, local_dim, steps } => {
                if *parties != m || dims.iter().any(|d| d != local_dim) {
                    return Err(Error::ShapeMismatch(format!(
                        "{} factor for {parties} parties of dimension {local_dim}",
                        term.block_positive.provenance()
                    )));
                }
                let is_primitive = matches!(term.block_positive, BlockPositiveFactor::Primitive { .. });
                match (*steps, is_primitive) {
                    (0, true) => Leading::Scalar(0.0),
                    (0, false) => Leading::Scalar(1.0),
                    (t, true) => Leading::Operator(primitive_over_steps(m, *local_dim, t)?),
                    (t, false) => Leading::Operator(HermitianOperator::identity(PartyStructure::with_max_dim(
                        dims.to_vec(),
                        t,
                        Ordering::StepMajor,
                        structure.max_dim(),
                    )?)),
                }
            }
        };
        let step = PartyStructure::with_max_dim(dims.to_vec(), 1, Ordering::StepMajor, structure.max_dim())?;
        let mut separable = Vec::with_capacity(term.separable.len());
        for (s, factor) in term.separable.iter().enumerate() {
            validate_separable(factor, dims).map_err(|e| Error::InvalidStructure(format!("separable factor {}: {e}", s + 1)))?;
            separable.push(factor.to_operator(&step));
        }
        let op = match leading {
            Leading::Operator(op) => separable.iter().try_fold(op, |acc, s| acc.tensor(s))?,
            Leading::Scalar(c) => {
                let tail = HermitianOperator::tensor_all(separable.iter())?;
                tail.scale(c)
            }
        };
        Ok(op.scale(term.coefficient))
    }
}

enum Leading {
    Operator(HermitianOperator),
    Scalar(f64),
}

fn validate_separable(factor: &SeparableFactor, dims: &[usize]) -> std::result::Result<(), String> {
    for (p, term) in factor.products.iter().enumerate() {
        if !(term.weight >= 0.0) || !term.weight.is_finite() {
            return Err(format!("product {} has weight {}", p + 1, term.weight));
        }
        if term.locals.len() != dims.len() {
            return Err(format!("product {} has {} local factors for {} parties", p + 1, term.locals.len(), dims.len()));
        }
        for (k, (local, &d)) in term.locals.iter().zip(dims).enumerate() {
            if local.nrows() != d || local.ncols() != d {
                return Err(format!("product {} party {} is not {d}x{d}", p + 1, k + 1));
            }
            if hermitian_deviation(local) > HERMITIAN_TOL {
                return Err(format!("product {} party {} is not Hermitian", p + 1, k + 1));
            }
            let lambda = hermitian_eigh(local).0[0];
            if !(lambda >= -PSD_TOL) {
                return Err(format!("product {} party {} has eigenvalue {lambda:e}", p + 1, k + 1));
            }
        }
    }
    Ok(())
}

/// True iff the certificate's provenances validate and it reconstructs its target.
pub fn verify_decomposition(certificate: &DecompositionCertificate) -> bool {
    certificate.check().is_ok()
}
