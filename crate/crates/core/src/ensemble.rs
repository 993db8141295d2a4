//! State ensembles, sequence ensembles and measurements.
//!
//! Indices are zero-based throughout the API; reports print them one-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::structure::PartyStructure;

/// Tolerance on priors summing to one, PSD floors and unit trace.
pub const VALIDATION_TOL: f64 = 1e-9;
/// Prior sums within this distance of one are renormalized instead of rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    structure: PartyStructure,
    priors: Vec<f64>,
    states: Vec<HermitianOperator>,
}

impl StateEnsemble {
    pub fn new(items: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("ensemble has no states".into()))?;
        let structure = first.1.structure().clone();
        let mut priors = Vec::with_capacity(items.len());
        let mut states = Vec::with_capacity(items.len());
        for (i, (prior, state)) in items.into_iter().enumerate() {
            if !(prior > 0.0) || !prior.is_finite() {
                return Err(Error::InvalidEnsemble(format!("prior {} is {prior}, must be positive", i + 1)));
            }
            if !state.structure().same_shape(&structure) {
                return Err(Error::InvalidEnsemble(format!("state {} has a different structure", i + 1)));
            }
            let tr = state.trace();
            if !((tr - 1.0).abs() <= VALIDATION_TOL) {
                return Err(Error::InvalidEnsemble(format!("state {} has trace {tr}", i + 1)));
            }
            if let Err(lambda) = state.check_psd(VALIDATION_TOL) {
                return Err(Error::InvalidEnsemble(format!(
                    "state {} is not positive semidefinite (eigenvalue at most {lambda:e})",
                    i + 1
                )));
            }
            priors.push(prior);
            states.push(state.to_ordering(structure.ordering()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        if (total - 1.0).abs() > VALIDATION_TOL {
            priors.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { structure, priors, states })
    }

    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[HermitianOperator] {
        &self.states
    }

    pub fn prior(&self, i: usize) -> f64 {
        self.priors[i]
    }

    pub fn state(&self, i: usize) -> &HermitianOperator {
        &self.states[i]
    }

    /// `η_i ρ_i`.
    pub fn weighted_state(&self, i: usize) -> HermitianOperator {
        self.states[i].scale(self.priors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &HermitianOperator)> {
        self.priors.iter().copied().zip(self.states.iter())
    }

    /// Largest prior and its smallest index.
    pub fn max_prior(&self) -> (f64, usize) {
        max_with_first_index(&self.priors)
    }

    /// Entrywise equality of priors and states.
    pub fn is_identical_to(&self, other: &Self) -> bool {
        self.priors == other.priors
            && self.states.len() == other.states.len()
            && self.states.iter().zip(&other.states).all(|(a, b)| a.matrix() == b.matrix())
    }
}

fn max_with_first_index(values: &[f64]) -> (f64, usize) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |(best, bi), (i, v)| if v > best { (v, i) } else { (best, bi) })
}

/// `c⃗ = (c_1, …, c_L)`, zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SequenceIndex(pub Vec<usize>);

impl SequenceIndex {
    pub fn new(entries: Vec<usize>, sizes: &[usize]) -> Result<Self> {
        if entries.len() != sizes.len() {
            return Err(Error::IndexOutOfRange(format!(
                "index of length {} for {} steps",
                entries.len(),
                sizes.len()
            )));
        }
        if let Some((l, (&c, &n))) = entries.iter().zip(sizes).enumerate().find(|(_, (&c, &n))| c >= n) {
            return Err(Error::IndexOutOfRange(format!("entry {c} at step {} exceeds {n} states", l + 1)));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Position in the lexicographic enumeration.
    pub fn flat(&self, sizes: &[usize]) -> usize {
        self.0.iter().zip(sizes).fold(0, |acc, (&c, &n)| acc * n + c)
    }
}

impl fmt::Display for SequenceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All indices of `N_{n_1} × ⋯ × N_{n_L}` in lexicographic order.
pub fn enumerate_indices(sizes: &[usize]) -> Vec<SequenceIndex> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut entries = vec![0; sizes.len()];
            for (slot, &n) in entries.iter_mut().zip(sizes).rev() {
                *slot = flat % n;
                flat /= n;
            }
            SequenceIndex(entries)
        })
        .collect()
}

/// Tensor product `⊗_l E^l` of ensembles sharing party dimensions.
///
/// Items are materialized per index on demand; `flatten` expands all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEnsemble {
    factors: Vec<StateEnsemble>,
    structure: PartyStructure,
}

impl SequenceEnsemble {
    pub fn new(factors: Vec<StateEnsemble>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("sequence needs at least one step".into()))?;
        let base = first.structure().clone();
        if let Some(l) = factors.iter().position(|f| f.structure().party_dims() != base.party_dims()) {
            return Err(Error::InvalidEnsemble(format!("step {} has different party dimensions", l + 1)));
        }
        let steps = factors.iter().map(|f| f.structure().steps()).sum();
        let structure = base.with_steps(steps)?.with_ordering(crate::structure::Ordering::StepMajor);
        Ok(Self { factors, structure })
    }

    /// `L` identical copies of one ensemble.
    pub fn copies(ensemble: &StateEnsemble, copies: usize) -> Result<Self> {
        Self::new(vec![ensemble.clone(); copies])
    }

    pub fn factors(&self) -> &[StateEnsemble] {
        &self.factors
    }

    pub fn steps(&self) -> usize {
        self.factors.len()
    }

    /// Structure of the whole sequence, step-major.
    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    /// `n⃗ = (n_1, …, n_L)`.
    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(StateEnsemble::len).collect()
    }

    pub fn indices(&self) -> Vec<SequenceIndex> {
        enumerate_indices(&self.sizes())
    }

    pub fn index(&self, entries: Vec<usize>) -> Result<SequenceIndex> {
        SequenceIndex::new(entries, &self.sizes())
    }

    pub fn prior(&self, index: &SequenceIndex) -> Result<f64> {
        self.check_index(index)?;
        Ok(index.0.iter().zip(&self.factors).map(|(&c, f)| f.prior(c)).product())
    }

    /// `(η_c⃗, ρ_c⃗)` with `ρ_c⃗` in step-major ordering.
    pub fn sequence_item(&self, index: &SequenceIndex) -> Result<(f64, HermitianOperator)> {
        let prior = self.prior(index)?;
        let state = HermitianOperator::tensor_all(index.0.iter().zip(&self.factors).map(|(&c, f)| f.state(c)))?;
        Ok((prior, state))
    }

    /// `η_c⃗ ρ_c⃗`.
    pub fn weighted_item(&self, index: &SequenceIndex) -> Result<HermitianOperator> {
        let (p, s) = self.sequence_item(index)?;
        Ok(s.scale(p))
    }

    pub fn flatten(&self) -> Result<StateEnsemble> {
        let items = self
            .indices()
            .iter()
            .map(|c| self.sequence_item(c))
            .collect::<Result<Vec<_>>>()?;
        StateEnsemble::new(items)
    }

    /// `max_c⃗ η_c⃗` with the lexicographically first maximizing index.
    pub fn max_prior(&self) -> (f64, SequenceIndex) {
        let (value, entries) = self.factors.iter().fold((1.0, Vec::new()), |(v, mut e), f| {
            let (p, i) = f.max_prior();
            e.push(i);
            (v * p, e)
        });
        (value, SequenceIndex(entries))
    }

    /// True when every step ensemble is entrywise identical to the first.
    pub fn identical_steps(&self) -> bool {
        self.factors.windows(2).all(|w| w[0].is_identical_to(&w[1]))
    }

    fn check_index(&self, index: &SequenceIndex) -> Result<()> {
        SequenceIndex::new(index.0.clone(), &self.sizes()).map(|_| ())
    }
}

/// POVM `{M_i}`: PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    structure: PartyStructure,
    operators: Vec<HermitianOperator>,
}

impl Measurement {
    pub fn new(operators: Vec<HermitianOperator>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidMeasurement("measurement has no operators".into()))?;
        let structure = first.structure().clone();
        let mut sum = HermitianOperator::zeros(structure.clone());
        for (i, op) in operators.iter().enumerate() {
            if !op.structure().same_shape(&structure) {
                return Err(Error::InvalidMeasurement(format!("operator {} has a different structure", i + 1)));
            }
            if let Err(lambda) = op.check_psd(VALIDATION_TOL) {
                return Err(Error::InvalidMeasurement(format!(
                    "operator {} is not positive semidefinite (eigenvalue at most {lambda:e})",
                    i + 1
                )));
            }
            sum = sum.add(op)?;
        }
        let deviation = sum.max_abs_diff(&HermitianOperator::identity(structure.clone()))?;
        if !(deviation <= VALIDATION_TOL) {
            return Err(Error::InvalidMeasurement(format!("operators sum to identity only within {deviation:e}")));
        }
        let operators = operators.into_iter().map(|op| op.to_ordering(structure.ordering())).collect();
        Ok(Self { structure, operators })
    }

    /// The trivial one-outcome measurement `{𝟙}`.
    pub fn trivial(structure: PartyStructure) -> Self {
        Self { operators: vec![HermitianOperator::identity(structure.clone())], structure }
    }

    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Diagonal in the computational product basis, so realizable by
    /// measuring every subsystem locally and post-processing the outcome.
    pub fn is_local_basis(&self, tol: f64) -> bool {
        self.operators.iter().all(|op| {
            let m = op.matrix();
            (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() <= tol))
        })
    }
}

/// `M_c⃗ = M_{c_1}^1 ⊗ ⋯ ⊗ M_{c_L}^L` for one index.
pub fn product_operator(per_step: &[Measurement], index: &SequenceIndex) -> Result<HermitianOperator> {
    if per_step.len() != index.0.len() {
        return Err(Error::ShapeMismatch("index length differs from step count".into()));
    }
    for (l, (&c, m)) in index.0.iter().zip(per_step).enumerate() {
        if c >= m.len() {
            return Err(Error::IndexOutOfRange(format!("outcome {} at step {}", c + 1, l + 1)));
        }
    }
    HermitianOperator::tensor_all(index.0.iter().zip(per_step).map(|(&c, m)| &m.operators()[c]))
}

/// Product measurement over the sequence space, ordered like `enumerate_indices`.
pub fn product_measurement(per_step: &[Measurement]) -> Result<Measurement> {
    let first = per_step
        .first()
        .ok_or_else(|| Error::InvalidMeasurement("no step measurements".into()))?;
    if per_step.iter().any(|m| m.structure().party_dims() != first.structure().party_dims()) {
        return Err(Error::ShapeMismatch("step measurements differ in party dimensions".into()));
    }
    let sizes: Vec<usize> = per_step.iter().map(Measurement::len).collect();
    let ops = enumerate_indices(&sizes)
        .iter()
        .map(|c| product_operator(per_step, c))
        .collect::<Result<Vec<_>>>()?;
    Measurement::new(ops)
}

/// `Σ_i η_i Tr(ρ_i M_i)`.
pub fn success_probability(ensemble: &StateEnsemble, measurement: &Measurement) -> Result<f64> {
    if ensemble.len() != measurement.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} states but {} measurement outcomes",
            ensemble.len(),
            measurement.len()
        )));
    }
    ensemble
        .iter()
        .zip(measurement.operators())
        .map(|((p, rho), m)| Ok(p * rho.trace_product(m)?))
        .sum()
}

/// `Σ_c⃗ η_c⃗ Tr(ρ_c⃗ M_c⃗)` over the full sequence space, for per-step measurements.
pub fn sequence_success_probability(sequence: &SequenceEnsemble, per_step: &[Measurement]) -> Result<f64> {
    if per_step.len() != sequence.steps()
        || per_step.iter().zip(sequence.factors()).any(|(m, f)| m.len() != f.len())
    {
        return Err(Error::ShapeMismatch("per-step measurements do not match the sequence".into()));
    }
    sequence
        .indices()
        .iter()
        .map(|c| {
            let (p, rho) = sequence.sequence_item(c)?;
            Ok(p * rho.trace_product(&product_operator(per_step, c)?)?)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{example1_ensemble, example2_ensemble, example2_measurement};

    fn single_state(m: usize, d: usize) -> StateEnsemble {
        StateEnsemble::new(vec![(1.0, HermitianOperator::ghz(m, d).unwrap())]).unwrap()
    }

    #[test]
    fn enumerate_small() {
        let show = |v: Vec<SequenceIndex>| v.into_iter().map(|c| c.0).collect::<Vec<_>>();
        assert_eq!(show(enumerate_indices(&[2])), vec![vec![0], vec![1]]);
        assert_eq!(
            show(enumerate_indices(&[2, 2])),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(enumerate_indices(&[4, 4]).len(), 16);
    }

    #[test]
    fn index_display_is_one_based() {
        assert_eq!(SequenceIndex(vec![1, 0]).to_string(), "(2,1)");
    }

    #[test]
    fn priors_renormalized_or_rejected() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        let e = StateEnsemble::new(vec![(0.5 + 4e-7, phi.clone()), (0.5, phi.clone())]).unwrap();
        assert!((e.priors().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(StateEnsemble::new(vec![(0.5 + 1e-4, phi.clone()), (0.5, phi.clone())]).is_err());
        assert!(StateEnsemble::new(vec![(0.0, phi.clone()), (1.0, phi)]).is_err());
    }

    #[test]
    fn rejects_non_state() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        assert!(StateEnsemble::new(vec![(1.0, phi.scale(2.0))]).is_err());
        let id = HermitianOperator::identity(phi.structure().clone());
        let not_psd = id.combine(0.5, &phi, -1.0).unwrap(); // trace 1, eigenvalue -1/2
        assert!(StateEnsemble::new(vec![(1.0, not_psd)]).is_err());
    }

    #[test]
    fn sequence_item_single_step() {
        let e = example1_ensemble(2, 2).unwrap();
        let seq = SequenceEnsemble::new(vec![e.clone()]).unwrap();
        let (p, s) = seq.sequence_item(&SequenceIndex(vec![1])).unwrap();
        assert_eq!(p, e.prior(1));
        assert_eq!(s.matrix(), e.state(1).matrix());
    }

    #[test]
    fn sequence_item_example1() {
        let e = example1_ensemble(2, 2).unwrap();
        let seq = SequenceEnsemble::copies(&e, 2).unwrap();
        let (p, s) = seq.sequence_item(&seq.index(vec![0, 0]).unwrap()).unwrap();
        assert!((p - 16.0 / 49.0).abs() < 1e-15);
        let expected = e.state(0).tensor(e.state(0)).unwrap();
        assert_eq!(s.matrix(), expected.matrix());
        let total: f64 = seq.indices().iter().map(|c| seq.prior(c).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(seq.index(vec![0, 2]).is_err());
    }

    #[test]
    fn max_prior_ties_and_examples() {
        let phi = HermitianOperator::ghz(2, 2).unwrap();
        let uniform = StateEnsemble::new(vec![(0.25, phi.clone()); 4]).unwrap();
        assert_eq!(uniform.max_prior(), (0.25, 0));
        let (v, i) = example1_ensemble(2, 2).unwrap().max_prior();
        assert!((v - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(i, 0);
        let (v, i) = example2_ensemble(2, 2).unwrap().max_prior();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(i, 2);
    }

    #[test]
    fn trivial_measurement_success() {
        let e = single_state(2, 2);
        let m = Measurement::trivial(e.structure().clone());
        assert!((success_probability(&e, &m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_of_trivial_measurements() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let m = Measurement::trivial(s);
        let pm = product_measurement(&[m.clone(), m]).unwrap();
        assert_eq!(pm.len(), 1);
        assert_eq!(pm.operators()[0].dim(), 16);
        assert_eq!(pm.operators()[0].trace(), 16.0);
    }

    #[test]
    fn example2_measurement_first_outcome() {
        let m = example2_measurement(2, 2).unwrap();
        let pm = product_measurement(&[m.clone(), m.clone()]).unwrap();
        let psi0 = HermitianOperator::basis_product_projector(2, 2, 0).unwrap();
        let expected = psi0.tensor(&psi0).unwrap();
        assert_eq!(pm.operators()[0].matrix(), expected.matrix());
        assert!(m.is_local_basis(0.0));
    }

    #[test]
    fn measurement_validation() {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let half = HermitianOperator::identity(s.clone()).scale(0.5);
        assert!(Measurement::new(vec![half.clone()]).is_err());
        assert!(Measurement::new(vec![half.clone(), half]).is_ok());
        let id = HermitianOperator::identity(s);
        assert!(Measurement::new(vec![id.scale(2.0), id.scale(-1.0)]).is_err());
    }

    #[test]
    fn success_count_mismatch() {
        let e = example1_ensemble(2, 2).unwrap();
        let m = Measurement::trivial(e.structure().clone());
        assert!(success_probability(&e, &m).is_err());
    }
}
