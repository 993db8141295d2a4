//! Seeded random instances: unit vectors, density matrices, POVMs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::ensemble::{Measurement, StateEnsemble};
use crate::error::Result;
use crate::operator::{spectral_map, CMatrix, CVector, HermitianOperator};
use crate::structure::PartyStructure;

/// Deterministic generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform point on the complex unit sphere (normalized complex Gaussian).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

pub fn random_ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random Hermitian operator with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, structure: &PartyStructure) -> HermitianOperator {
    let dim = structure.total_dim();
    HermitianOperator::from_raw(structure.clone(), random_ginibre(rng, dim, dim))
}

/// Random density matrix `G G† / Tr(G G†)` with `G` of shape `dim × rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, structure: &PartyStructure, rank: usize) -> HermitianOperator {
    let dim = structure.total_dim();
    let g = random_ginibre(rng, dim, rank.clamp(1, dim));
    let rho = &g * g.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    HermitianOperator::from_raw(structure.clone(), rho / Complex64::new(tr, 0.0))
}

/// Random `n`-outcome POVM `M_i = S^{-1/2} A_i S^{-1/2}` with `S = Σ A_i`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, structure: &PartyStructure, n: usize) -> Result<Measurement> {
    let dim = structure.total_dim();
    let raw: Vec<CMatrix> = (0..n)
        .map(|_| {
            let g = random_ginibre(rng, dim, dim);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, a| acc + a);
    let inv_sqrt = spectral_map(&total, |x| 1.0 / x.sqrt());
    let ops = raw
        .iter()
        .map(|a| HermitianOperator::from_raw(structure.clone(), &inv_sqrt * a * &inv_sqrt))
        .collect();
    Measurement::new(ops)
}

/// Random ensemble with Dirichlet-like priors and full-rank states.
pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, structure: &PartyStructure, n: usize, rank: usize) -> Result<StateEnsemble> {
    let weights: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let items = weights
        .into_iter()
        .map(|w| (w / total, random_density(rng, structure, rank)))
        .collect();
    StateEnsemble::new(items)
}
