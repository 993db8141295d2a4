//! Dense Hermitian operators tagged with their party structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::product::ProductPureState;
use crate::structure::{Ordering, PartyStructure};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entrywise deviation from Hermiticity accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Residual bound `‖A v − λ v‖` for eigenpairs.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    structure: PartyStructure,
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates shape and Hermiticity, then symmetrizes `(A + A†)/2`.
    pub fn from_matrix(structure: PartyStructure, matrix: CMatrix) -> Result<Self> {
        let dim = structure.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_raw(structure, matrix))
    }

    /// Internal constructor for matrices that are Hermitian by construction.
    pub(crate) fn from_raw(structure: PartyStructure, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), structure.total_dim());
        Self { structure, matrix: symmetrize(matrix) }
    }

    pub fn zeros(structure: PartyStructure) -> Self {
        let dim = structure.total_dim();
        Self { structure, matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(structure: PartyStructure) -> Self {
        let dim = structure.total_dim();
        Self { structure, matrix: CMatrix::identity(dim, dim) }
    }

    pub fn from_diagonal(structure: PartyStructure, diagonal: &[f64]) -> Result<Self> {
        let dim = structure.total_dim();
        if diagonal.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim} diagonal entries, got {}",
                diagonal.len()
            )));
        }
        let diag = CVector::from_iterator(dim, diagonal.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(Self { structure, matrix: CMatrix::from_diagonal(&diag) })
    }

    /// Projector `|v⟩⟨v|` onto a (not necessarily normalized) vector.
    pub fn projector(structure: PartyStructure, v: &CVector) -> Result<Self> {
        if v.len() != structure.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for dimension {}",
                v.len(),
                structure.total_dim()
            )));
        }
        Ok(Self::from_raw(structure, v * v.adjoint()))
    }

    /// GHZ projector `Φ_d^m = (1/d) Σ_{i,j} |i⋯i⟩⟨j⋯j|`.
    pub fn ghz(m: usize, d: usize) -> Result<Self> {
        let structure = PartyStructure::uniform(m, d)?;
        let dim = structure.total_dim();
        let mut v = CVector::zeros(dim);
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[repeated_digit_index(m, d, i)] = amp;
        }
        Self::projector(structure, &v)
    }

    /// `Ψ_i^m = |i⋯i⟩⟨i⋯i|`.
    pub fn basis_product_projector(m: usize, d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::IndexOutOfRange(format!("basis index {i} for local dimension {d}")));
        }
        let structure = PartyStructure::uniform(m, d)?;
        let dim = structure.total_dim();
        let mut matrix = CMatrix::zeros(dim, dim);
        let j = repeated_digit_index(m, d, i);
        matrix[(j, j)] = Complex64::new(1.0, 0.0);
        Ok(Self { structure, matrix })
    }

    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(A B)` for Hermitian `A`, `B`; real by construction.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        if other.structure.ordering() != self.structure.ordering() {
            return Ok(trace_of_product(&self.matrix, other.to_ordering(self.structure.ordering()).matrix()));
        }
        Ok(trace_of_product(&self.matrix, &other.matrix))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            structure: self.structure.clone(),
            matrix: &self.matrix * Complex64::new(factor, 0.0),
        }
    }

    /// `alpha·self + beta·other`, with `other` brought to this operator's ordering.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let other = other.to_ordering(self.structure.ordering());
        let matrix = &self.matrix * Complex64::new(alpha, 0.0) + &other.matrix * Complex64::new(beta, 0.0);
        Ok(Self { structure: self.structure.clone(), matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Largest entrywise modulus of `self − other` (orderings reconciled).
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let other = other.to_ordering(self.structure.ordering());
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Kronecker product in step-major ordering; steps add up.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.structure.party_dims() != other.structure.party_dims() {
            return Err(Error::ShapeMismatch(format!(
                "tensor of operators with party dims {:?} and {:?}",
                self.structure.party_dims(),
                other.structure.party_dims()
            )));
        }
        let steps = self.structure.steps() + other.structure.steps();
        let structure = PartyStructure::with_max_dim(
            self.structure.party_dims().to_vec(),
            steps,
            Ordering::StepMajor,
            self.structure.max_dim(),
        )?;
        let a = self.to_step_major();
        let b = other.to_step_major();
        Ok(Self { structure, matrix: a.matrix.kronecker(&b.matrix) })
    }

    /// Tensor product of a non-empty list of operators.
    pub fn tensor_all<'a, I>(ops: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Self>,
    {
        let mut iter = ops.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::ShapeMismatch("empty tensor product".into()))?;
        iter.try_fold(first.to_step_major(), |acc, op| acc.tensor(op))
    }

    pub fn regroup_step_major_to_party_major(&self) -> Result<Self> {
        if !self.structure.is_step_major() {
            return Err(Error::InvalidStructure("operator is not in step-major ordering".into()));
        }
        Ok(self.to_party_major())
    }

    pub fn regroup_party_major_to_step_major(&self) -> Result<Self> {
        if !self.structure.is_party_major() {
            return Err(Error::InvalidStructure("operator is not in party-major ordering".into()));
        }
        Ok(self.to_step_major())
    }

    pub fn to_party_major(&self) -> Self {
        self.to_ordering(Ordering::PartyMajor)
    }

    pub fn to_step_major(&self) -> Self {
        self.to_ordering(Ordering::StepMajor)
    }

    pub fn to_ordering(&self, target: Ordering) -> Self {
        let current = self.structure.ordering();
        let structure = self.structure.with_ordering(target);
        if current == target || self.structure.steps() == 1 {
            return Self { structure, matrix: self.matrix.clone() };
        }
        let m = self.structure.parties();
        let l = self.structure.steps();
        let dims = self.structure.subsystem_dims(current);
        // perm[j] = input subsystem placed at output position j
        let perm: Vec<usize> = match target {
            Ordering::PartyMajor => (0..m)
                .flat_map(|k| (0..l).map(move |s| s * m + k))
                .collect(),
            Ordering::StepMajor => (0..l)
                .flat_map(|s| (0..m).map(move |k| k * l + s))
                .collect(),
        };
        Self { structure, matrix: permute_subsystems(&self.matrix, &dims, &perm) }
    }

    /// Reorders the steps of a step-major operator: output step `j` is input step `perm[j]`.
    pub(crate) fn permute_steps(&self, perm: &[usize]) -> Result<Self> {
        let l = self.structure.steps();
        let mut seen = vec![false; l];
        if perm.len() != l || perm.iter().any(|&p| p >= l || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::ShapeMismatch(format!("{perm:?} is not a permutation of {l} steps")));
        }
        let op = self.to_step_major();
        let m = self.structure.parties();
        let dims = self.structure.subsystem_dims(Ordering::StepMajor);
        let sub_perm: Vec<usize> = perm
            .iter()
            .flat_map(|&s| (0..m).map(move |k| s * m + k))
            .collect();
        Ok(Self { structure: op.structure, matrix: permute_subsystems(&op.matrix, &dims, &sub_perm) })
    }

    /// Reinterprets the matrix under another structure of the same total dimension.
    pub fn reinterpret(&self, structure: PartyStructure) -> Result<Self> {
        if structure.total_dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reinterpret dimension {} as {}",
                self.dim(),
                structure.total_dim()
            )));
        }
        Ok(Self { structure, matrix: self.matrix.clone() })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn eig_min(&self) -> Result<(f64, CVector)> {
        hermitian_eig_min(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.check_psd(tol).is_ok()
    }

    /// `Ok` when `λ_min ≥ −tol`; otherwise an upper bound on `λ_min` below `−tol`.
    ///
    /// A shifted Cholesky factorization accepts, a Rayleigh quotient from a
    /// short Krylov run rejects, and the full spectrum settles the rest.
    pub fn check_psd(&self, tol: f64) -> std::result::Result<(), f64> {
        if shifted_cholesky_succeeds(&self.matrix, tol) {
            return Ok(());
        }
        let (rayleigh, _) = lanczos_min(&self.matrix, LANCZOS_STEPS);
        if rayleigh < -tol {
            return Err(rayleigh);
        }
        let lambda = self.min_eigenvalue();
        if lambda >= -tol {
            Ok(())
        } else {
            Err(lambda)
        }
    }

    /// `⟨v|A|v⟩` for an arbitrary vector of matching length.
    pub fn quadratic_form(&self, v: &CVector) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector length {} for operator of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// The `d_k^L`-dimensional operator `⟨⊗_{j≠k} ψ_j| A |⊗_{j≠k} ψ_j⟩` on party `k`.
    ///
    /// Requires party-major ordering. The result is Hermitian by construction.
    pub fn contract_all_but_one(&self, state: &ProductPureState, k: usize) -> Result<CMatrix> {
        let s = &self.structure;
        if !s.is_party_major() {
            return Err(Error::InvalidStructure("contraction requires party-major ordering".into()));
        }
        let m = s.parties();
        if k >= m {
            return Err(Error::IndexOutOfRange(format!("party {k} of {m}")));
        }
        let local: Vec<usize> = (0..m).map(|j| s.party_total_dim(j)).collect();
        if state.factors().len() != m
            || state.factors().iter().zip(&local).any(|(f, &dj)| f.len() != dj)
        {
            return Err(Error::ShapeMismatch("product state does not match operator structure".into()));
        }
        // stride of party j in the flattened index
        let mut strides = vec![1usize; m];
        for j in (0..m - 1).rev() {
            strides[j] = strides[j + 1] * local[j + 1];
        }
        // amplitudes and offsets over all indices of the other parties
        let mut others: Vec<(usize, Complex64)> = vec![(0, Complex64::new(1.0, 0.0))];
        for j in (0..m).filter(|&j| j != k) {
            let factor = &state.factors()[j];
            let stride = strides[j];
            others = others
                .iter()
                .flat_map(|&(off, amp)| {
                    factor.iter().enumerate().map(move |(i, &a)| (off + i * stride, amp * a))
                })
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .collect();
        }
        let dk = local[k];
        let sk = strides[k];
        let one = Complex64::new(1.0, 0.0);
        // right contraction column by column; storage is column-major
        let mut half = CMatrix::zeros(self.dim(), dk);
        for b in 0..dk {
            let mut col = half.column_mut(b);
            for &(v, av) in &others {
                col.axpy(av, &self.matrix.column(v + b * sk), one);
            }
        }
        let out = CMatrix::from_fn(dk, dk, |a, b| {
            others.iter().map(|&(u, au)| au.conj() * half[(u + a * sk, b)]).sum()
        });
        Ok(symmetrize(out))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if !self.structure.same_shape(&other.structure) {
            return Err(Error::ShapeMismatch(format!(
                "operators with dims {:?}x{} and {:?}x{}",
                self.structure.party_dims(),
                self.structure.steps(),
                other.structure.party_dims(),
                other.structure.steps()
            )));
        }
        Ok(())
    }
}

/// Flat index of `|i⋯i⟩` on `m` parties of dimension `d`.
pub(crate) fn repeated_digit_index(m: usize, d: usize, i: usize) -> usize {
    (0..m).fold(0, |acc, _| acc * d + i)
}

pub(crate) fn symmetrize(matrix: CMatrix) -> CMatrix {
    let adj = matrix.adjoint();
    (matrix + adj) * Complex64::new(0.5, 0.0)
}

pub(crate) fn hermitian_deviation(matrix: &CMatrix) -> f64 {
    if matrix.nrows() != matrix.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(matrix - matrix.adjoint()))
}

pub(crate) fn max_abs(matrix: &CMatrix) -> f64 {
    matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    // Tr(AB) = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

const LANCZOS_STEPS: usize = 40;
const LANCZOS_SEED: u64 = 0x1a2c;

/// Cholesky of `A + shift·𝟙` with every pivot real and positive.
fn shifted_cholesky_succeeds(matrix: &CMatrix, shift: f64) -> bool {
    let n = matrix.nrows();
    let shifted = matrix + CMatrix::identity(n, n) * Complex64::new(shift, 0.0);
    // the complex square root never fails, so a negative pivot shows up as an
    // imaginary diagonal entry of the factor
    match shifted.cholesky() {
        Some(c) => c.l_dirty().diagonal().iter().all(|z| z.re > 0.0 && z.im.abs() <= 1e-6 * z.re),
        None => false,
    }
}

/// Smallest Ritz value of a Krylov space grown from a seeded start, with
/// its Ritz vector. The value is the vector's Rayleigh quotient, hence an
/// upper bound on the smallest eigenvalue.
pub(crate) fn lanczos_min(matrix: &CMatrix, steps: usize) -> (f64, CVector) {
    let n = matrix.nrows();
    let mut rng = crate::random::stream_rng(LANCZOS_SEED, 0);
    let mut q = crate::random::random_unit_vector(&mut rng, n);
    let mut basis: Vec<CVector> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for _ in 0..steps.min(n) {
        let mut w = matrix * &q;
        alpha.push(q.dotc(&w).re);
        basis.push(q);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, Complex64::new(1.0, 0.0));
            }
        }
        let norm = w.norm();
        if norm <= 1e-12 * (1.0 + alpha.last().unwrap().abs()) {
            break;
        }
        beta.push(norm);
        q = w / Complex64::new(norm, 0.0);
    }
    let k = alpha.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    let eig = t.symmetric_eigen();
    let idx = (0..k).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap_or(0);
    let mut y = CVector::zeros(n);
    for (i, b) in basis.iter().enumerate() {
        y.axpy(Complex64::new(eig.eigenvectors[(i, idx)], 0.0), b, Complex64::new(1.0, 0.0));
    }
    let norm = y.norm();
    y /= Complex64::new(norm, 0.0);
    let value = y.dotc(&(matrix * &y)).re;
    (value, y)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigh(matrix: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

pub(crate) fn hermitian_eig_min(matrix: &CMatrix) -> Result<(f64, CVector)> {
    let (values, vectors) = hermitian_eigh(matrix);
    let value = values[0];
    let mut v: CVector = vectors.column(0).into_owned();
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    let residual = (matrix * &v - &v * Complex64::new(value, 0.0)).norm();
    if !(residual <= EIG_RESIDUAL_TOL) {
        return Err(Error::EigenConvergence { residual });
    }
    Ok((value, v))
}

/// Applies a function to the spectrum: `V f(Λ) V†`.
pub(crate) fn spectral_map(matrix: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigh(matrix);
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let s = Complex64::new(f(lambda), 0.0);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    symmetrize(scaled * vectors.adjoint())
}

/// Permutes tensor factors: output subsystem `j` is input subsystem `perm[j]`.
fn permute_subsystems(matrix: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let n = matrix.nrows();
    let k = dims.len();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out_strides = vec![1usize; k];
    for j in (0..k.saturating_sub(1)).rev() {
        out_strides[j] = out_strides[j + 1] * out_dims[j + 1];
    }
    // stride in the output index of each input subsystem
    let mut stride_of_input = vec![0usize; k];
    for (j, &p) in perm.iter().enumerate() {
        stride_of_input[p] = out_strides[j];
    }
    let map: Vec<usize> = (0..n)
        .map(|mut s| {
            let mut q = 0;
            for i in (0..k).rev() {
                q += (s % dims[i]) * stride_of_input[i];
                s /= dims[i];
            }
            q
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for s in 0..n {
        for t in 0..n {
            out[(map[s], map[t])] = matrix[(s, t)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_shapes() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let id = HermitianOperator::identity(s);
        assert_eq!(id.dim(), 4);
        assert_eq!(HermitianOperator::identity(PartyStructure::uniform(2, 3).unwrap()).trace(), 9.0);
        let s2 = PartyStructure::new(vec![2, 2], 2, Ordering::StepMajor).unwrap();
        assert_eq!(HermitianOperator::identity(s2).dim(), 16);
    }

    #[test]
    fn ghz_two_qubits() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!(close(phi.matrix()[(i, j)].re, 0.5, 1e-15));
        }
        let total: f64 = phi.matrix().iter().map(|z| z.norm()).sum();
        assert!(close(total, 2.0, 1e-15));
        assert!(close(phi.trace(), 1.0, 1e-15));
    }

    #[test]
    fn ghz_is_idempotent() {
        let phi = HermitianOperator::ghz(3, 2).unwrap();
        let sq = phi.matrix() * phi.matrix();
        assert!(max_abs(&(sq - phi.matrix())) < 1e-15);
    }

    #[test]
    fn basis_projectors() {
        let p0 = HermitianOperator::basis_product_projector(2, 2, 0).unwrap();
        let p1 = HermitianOperator::basis_product_projector(2, 2, 1).unwrap();
        assert_eq!(p0.matrix().diagonal().map(|z| z.re).as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p1.matrix().diagonal().map(|z| z.re).as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let sum = (0..3)
            .map(|i| HermitianOperator::basis_product_projector(2, 3, i).unwrap())
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap();
        assert_eq!(sum.trace(), 3.0);
        assert!(matches!(
            HermitianOperator::basis_product_projector(2, 2, 2),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = c(1e-6);
        assert!(matches!(HermitianOperator::from_matrix(s.clone(), m), Err(Error::NotHermitian { .. })));
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = c(1e-13);
        let op = HermitianOperator::from_matrix(s, m).unwrap();
        assert_eq!(op.matrix()[(0, 1)], op.matrix()[(1, 0)].conj());
    }

    #[test]
    fn tensor_trace_multiplies() {
        let a = HermitianOperator::ghz(2, 2).unwrap().scale(3.0);
        let b = HermitianOperator::identity(PartyStructure::uniform(2, 2).unwrap());
        let ab = a.tensor(&b).unwrap();
        assert!(close(ab.trace(), a.trace() * b.trace(), 1e-12));
        assert_eq!(ab.structure().steps(), 2);
        let bad = HermitianOperator::ghz(3, 2).unwrap();
        assert!(a.tensor(&bad).is_err());
    }

    #[test]
    fn regroup_single_step_is_identity() {
        let a = HermitianOperator::ghz(2, 3).unwrap();
        assert_eq!(a.regroup_step_major_to_party_major().unwrap().matrix(), a.matrix());
    }

    #[test]
    fn regroup_round_trip() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        let id = HermitianOperator::identity(phi.structure().clone());
        let op = phi.tensor(&id).unwrap().tensor(&phi).unwrap();
        let back = op
            .regroup_step_major_to_party_major()
            .unwrap()
            .regroup_party_major_to_step_major()
            .unwrap();
        assert_eq!(back.matrix(), op.matrix());
        assert!(op.regroup_party_major_to_step_major().is_err());
    }

    #[test]
    fn permute_steps_swaps_factors() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        let p0 = HermitianOperator::basis_product_projector(2, 2, 0).unwrap();
        let ab = phi.tensor(&p0).unwrap();
        let ba = p0.tensor(&phi).unwrap();
        assert_eq!(ab.permute_steps(&[1, 0]).unwrap().matrix(), ba.matrix());
        assert!(ab.permute_steps(&[0, 0]).is_err());
    }

    #[test]
    fn eig_min_cases() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let (v, _) = HermitianOperator::identity(s.clone()).eig_min().unwrap();
        assert!(close(v, 1.0, 1e-12));
        let op = HermitianOperator::from_diagonal(s, &[-0.5, 3.0, 3.0, 3.0]).unwrap();
        let (v, vec) = op.eig_min().unwrap();
        assert!(close(v, -0.5, 1e-12));
        assert!(close(vec[0].norm(), 1.0, 1e-12));
    }

    #[test]
    fn check_psd_agrees_with_spectrum() {
        let s = PartyStructure::uniform(2, 3).unwrap();
        let mut rng = crate::random::stream_rng(5, 0);
        for k in 0..20 {
            let a = crate::random::random_hermitian(&mut rng, &s);
            // shift so the smallest eigenvalue lands on either side of zero
            let shift = -a.min_eigenvalue() + if k % 2 == 0 { 1e-3 } else { -1e-3 };
            let b = a.combine(1.0, &HermitianOperator::identity(s.clone()), shift).unwrap();
            let lambda = b.min_eigenvalue();
            match b.check_psd(1e-9) {
                Ok(()) => assert!(lambda >= -1e-9, "{lambda}"),
                Err(bound) => {
                    assert!(lambda < -1e-9);
                    assert!(bound >= lambda - 1e-10 && bound < -1e-9, "{bound} vs {lambda}");
                }
            }
        }
        let projector = HermitianOperator::ghz(2, 3).unwrap();
        assert!(projector.is_psd(1e-12));
        assert!(HermitianOperator::zeros(s).is_psd(0.0));
    }

    #[test]
    fn lanczos_bound_is_a_rayleigh_quotient() {
        let op = HermitianOperator::ghz(3, 2).unwrap().scale(-2.0);
        let (value, v) = lanczos_min(op.matrix(), 40);
        assert!((value + 2.0).abs() < 1e-9, "{value}");
        assert!((op.quadratic_form(&v).unwrap() - value).abs() < 1e-12);
    }

    #[test]
    fn eig_min_identity_minus_ghz() {
        for (m, d) in [(2, 2), (2, 3), (3, 2)] {
            let phi = HermitianOperator::ghz(m, d).unwrap();
            let id = HermitianOperator::identity(phi.structure().clone());
            let op = id.combine(1.0, &phi, -(d as f64)).unwrap();
            let (value, v) = op.eig_min().unwrap();
            assert!(close(value, 1.0 - d as f64, 1e-10));
            // eigenvector is the GHZ vector up to phase
            assert!(close(phi.quadratic_form(&v).unwrap(), 1.0, 1e-10));
        }
    }

    #[test]
    fn contraction_of_identity_minus_two_ghz() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        let id = HermitianOperator::identity(phi.structure().clone());
        let op = id.combine(1.0, &phi, -2.0).unwrap();
        let zero = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let any = CVector::from_vec(vec![c(0.6), Complex64::new(0.0, 0.8)]);
        let state = ProductPureState::new(vec![zero, any]).unwrap();
        let local = op.contract_all_but_one(&state, 1).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(1.0)]));
        assert!(max_abs(&(local - expected)) < 1e-15);
        assert!(op.contract_all_but_one(&state, 2).is_err());
    }
}
