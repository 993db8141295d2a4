use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{CheckKind, CheckOutcome, Verdict};
use crate::cone::{BlockPositiveFactor, CertificateTerm, DecompositionCertificate, SeparableFactor, Witness, PSD_TOL, RECONSTRUCTION_TOL};
use crate::constructions::{example2_ensemble, example2_measurement, example2_r};
use crate::ensemble::{product_operator, sequence_success_probability, Measurement, SequenceEnsemble, SequenceIndex};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

/// Complementary slackness residuals must not exceed this.
pub const SLACKNESS_TOL: f64 = 1e-9;
/// Off-diagonal bound for treating a measurement as a local basis measurement.
pub const LOCAL_BASIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertificateEvidence {
    Decomposition { certificate: DecompositionCertificate },
    Psd,
    Refuted { witness: Witness },
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEvidence {
    pub index: SequenceIndex,
    /// Number of steps whose outcome is the GHZ state, when the decomposition depends on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghz_count: Option<usize>,
    pub evidence: CertificateEvidence,
    /// `Tr[M_c⃗(H − η_c⃗ρ_c⃗)]` as computed when the certificate was built.
    pub slackness: f64,
}

/// `H` with `H − η_c⃗ρ_c⃗` separable-dual for all `c⃗` and per-step measurements
/// attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableCertificate {
    pub h: HermitianOperator,
    pub measurements: Vec<Measurement>,
    /// One entry per index, in enumeration order.
    pub indices: Vec<IndexEvidence>,
}

impl SeparableCertificate {
    pub fn max_slackness(&self) -> f64 {
        self.indices.iter().map(|e| e.slackness.abs()).fold(0.0, f64::max)
    }
}

enum IndexStatus {
    Accepted,
    Refuted(String),
    Unaccepted(String),
}

/// Checks the dual conditions index by index, recomputing every residual.
pub fn verify_theorem4_certificate(se: &SequenceEnsemble, cert: &SeparableCertificate) -> Result<CheckOutcome> {
    let structure = se.structure();
    if !cert.h.structure().same_shape(structure) {
        return Err(Error::ShapeMismatch("H does not match the sequence structure".into()));
    }
    if cert.measurements.len() != se.steps()
        || cert.measurements.iter().zip(se.factors()).any(|(m, f)| {
            m.len() != f.len() || !m.structure().same_shape(f.structure())
        })
    {
        return Err(Error::ShapeMismatch("per-step measurements do not match the step ensembles".into()));
    }
    let indices = se.indices();
    if cert.indices.len() != indices.len() || cert.indices.iter().zip(&indices).any(|(e, c)| &e.index != c) {
        return Err(Error::ShapeMismatch("certificate does not cover every sequence index in order".into()));
    }
    let h = cert.h.to_step_major();

    let checked = cert
        .indices
        .par_iter()
        .map(|entry| -> Result<(f64, IndexStatus)> {
            let c = &entry.index;
            let target = h.sub(&se.weighted_item(c)?)?;
            let residual = product_operator(&cert.measurements, c)?.trace_product(&target)?;
            let status = match &entry.evidence {
                CertificateEvidence::Decomposition { certificate } => {
                    let matches = certificate.target.max_abs_diff(&target).is_ok_and(|e| e <= RECONSTRUCTION_TOL);
                    match (matches, certificate.check()) {
                        (false, _) => IndexStatus::Unaccepted(format!("{c}: decomposition is for another operator")),
                        (true, Err(e)) => IndexStatus::Unaccepted(format!("{c}: {e}")),
                        (true, Ok(_)) => IndexStatus::Accepted,
                    }
                }
                CertificateEvidence::Psd => {
                    match target.check_psd(PSD_TOL) {
                        Ok(()) => IndexStatus::Accepted,
                        Err(lambda) => {
                            IndexStatus::Unaccepted(format!("{c}: claimed PSD but has eigenvalue at most {lambda:e}"))
                        }
                    }
                }
                CertificateEvidence::Refuted { witness } => {
                    let value = witness.state.expectation(&target)?;
                    if value < 0.0 {
                        IndexStatus::Refuted(format!("{c}: product witness value {value:e}"))
                    } else {
                        IndexStatus::Unaccepted(format!("{c}: witness does not refute"))
                    }
                }
                CertificateEvidence::Missing => IndexStatus::Unaccepted(format!("{c}: no cone evidence")),
            };
            Ok((residual, status))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    let mut undecided = Vec::new();
    let mut worst = 0.0f64;
    for (entry, (residual, status)) in cert.indices.iter().zip(&checked) {
        worst = worst.max(residual.abs());
        if residual.abs() > SLACKNESS_TOL {
            failures.push(format!("{}: slackness residual {residual:e}", entry.index));
        }
        match status {
            IndexStatus::Accepted => {}
            IndexStatus::Refuted(note) => failures.push(note.clone()),
            IndexStatus::Unaccepted(note) => undecided.push(note.clone()),
        }
    }
    if !cert.measurements.iter().all(|m| m.is_local_basis(LOCAL_BASIS_TOL)) {
        undecided.push("step measurements are not verifiably LOCC (not diagonal in the product basis)".into());
    }

    let verdict = if !failures.is_empty() {
        Verdict::Fails
    } else if !undecided.is_empty() {
        Verdict::Undecided
    } else {
        Verdict::Holds
    };
    let mut out = CheckOutcome::new(CheckKind::SeparableCertificate, verdict);
    out.notes.push(format!("largest slackness residual {worst:e}"));
    out.notes.extend(failures);
    out.notes.extend(undecided);
    if verdict == Verdict::Holds {
        let trace = h.trace();
        let achieved = sequence_success_probability(se, &cert.measurements)?;
        out.recorded_p_l = Some(trace);
        out.lower_bound = Some(achieved);
        out.notes.push(format!("p_L = p_SEP = Tr(H) = {trace}; product measurement scores {achieved}"));
    }
    Ok(out)
}

/// Certificate for `L` copies of the GHZ/basis ensemble on `m` qudits of dimension `d`.
///
/// `H = 𝟙/(d^m + d)^L`. For `c⃗` sorted non-increasingly with `t` GHZ entries,
/// `(d^m+d)^L (H − η_c⃗ρ_c⃗) = (𝟙 − d^tΦ_{d^t}) ⊗ R_{c_{t+1}} ⊗ ⋯ ⊗ R_{c_L}
///   + Σ_{j>t} 𝟙 ⊗ ⋯ ⊗ 𝟙 ⊗ (𝟙 − R_{c_j}) ⊗ R_{c_{j+1}} ⊗ ⋯ ⊗ R_{c_L}`,
/// and unsorted indices reuse the sorted decomposition with a step permutation.
pub fn build_example2_certificate(d: usize, m: usize, steps: usize) -> Result<SeparableCertificate> {
    if steps == 0 {
        return Err(Error::InvalidStructure("at least one step required".into()));
    }
    let bytes = example2_certificate_bytes(d, m, steps);
    if bytes > CERTIFICATE_MEMORY_BUDGET {
        return Err(Error::Unsupported(format!(
            "certificate needs about {} MiB of dense storage, above the {} MiB budget",
            (bytes / f64::from(1 << 20)).ceil(),
            CERTIFICATE_MEMORY_BUDGET / f64::from(1 << 20)
        )));
    }
    let step_ensemble = example2_ensemble(m, d)?;
    let se = SequenceEnsemble::copies(&step_ensemble, steps)?;
    let n = d + 2;
    let ghz = d + 1;
    let scale = 1.0 / ((d as f64).powi(m as i32) + d as f64).powi(steps as i32);
    let h = HermitianOperator::identity(se.structure().clone()).scale(scale);
    let measurement = example2_measurement(m, d)?;
    let measurements = vec![measurement; steps];
    let party_dims = vec![d; m];

    // diagonals of R_i and 𝟙 − R_i for the non-GHZ outcomes
    let r_diag = (0..ghz)
        .map(|i| Ok(example2_r(m, d, i)?.matrix().diagonal().iter().map(|z| z.re).collect::<Vec<f64>>()))
        .collect::<Result<Vec<_>>>()?;
    let r_sep: Vec<SeparableFactor> = r_diag.iter().map(|g| SeparableFactor::from_diagonal(&party_dims, g)).collect();
    let co_sep: Vec<SeparableFactor> = r_diag
        .iter()
        .map(|g| SeparableFactor::from_diagonal(&party_dims, &g.iter().map(|v| 1.0 - v).collect::<Vec<_>>()))
        .collect();

    let indices = se
        .indices()
        .into_par_iter()
        .map(|c| -> Result<IndexEvidence> {
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&a, &b| c.0[b].cmp(&c.0[a]).then(a.cmp(&b)));
            let sorted: Vec<usize> = order.iter().map(|&p| c.0[p]).collect();
            let t = sorted.iter().take_while(|&&v| v == ghz).count();
            debug_assert!(sorted.iter().all(|&v| v < n));

            let mut terms = vec![CertificateTerm {
                coefficient: scale,
                block_positive: BlockPositiveFactor::Primitive { parties: m, local_dim: d, steps: t },
                separable: sorted[t..].iter().map(|&v| r_sep[v].clone()).collect(),
            }];
            for j in t..steps {
                let mut separable = vec![co_sep[sorted[j]].clone()];
                separable.extend(sorted[j + 1..].iter().map(|&v| r_sep[v].clone()));
                terms.push(CertificateTerm {
                    coefficient: scale,
                    block_positive: BlockPositiveFactor::Identity { parties: m, local_dim: d, steps: j },
                    separable,
                });
            }
            // output step q holds sorted position inverse[q]
            let mut inverse = vec![0; steps];
            for (j, &q) in order.iter().enumerate() {
                inverse[q] = j;
            }
            let step_order = (inverse.iter().enumerate().any(|(q, &j)| q != j)).then_some(inverse);
            let target = h.sub(&se.weighted_item(&c)?)?;
            let slackness = product_operator(&measurements, &c)?.trace_product(&target)?;
            Ok(IndexEvidence {
                ghz_count: Some(t),
                evidence: CertificateEvidence::Decomposition {
                    certificate: DecompositionCertificate { target, terms, step_order },
                },
                slackness,
                index: c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparableCertificate { h, measurements, indices })
}

/// Largest dense storage, in bytes, a built certificate may occupy.
pub const CERTIFICATE_MEMORY_BUDGET: f64 = 2.0 * (1u64 << 30) as f64;

/// Bytes held by the per-index target operators of the example certificate.
pub fn example2_certificate_bytes(d: usize, m: usize, steps: usize) -> f64 {
    let dim = (d as f64).powi((m * steps) as i32);
    let indices = ((d + 2) as f64).powi(steps as i32);
    indices * dim * dim * 16.0
}

/// Produces a separable certificate for sequences it recognizes.
pub trait CertificateProvider: Send + Sync {
    fn name(&self) -> &'static str;
    fn provide(&self, se: &SequenceEnsemble) -> Result<Option<SeparableCertificate>>;
}

/// Recognizes steps equal to the GHZ/basis ensemble on uniform local dimension.
pub struct GhzBasisProvider;

impl CertificateProvider for GhzBasisProvider {
    fn name(&self) -> &'static str {
        "ghz-basis"
    }

    fn provide(&self, se: &SequenceEnsemble) -> Result<Option<SeparableCertificate>> {
        let s = se.structure();
        let d = s.party_dims()[0];
        let m = s.parties();
        if m < 2 || d < 2 || s.party_dims().iter().any(|&x| x != d) {
            return Ok(None);
        }
        let reference = example2_ensemble(m, d)?;
        let matches = |e: &crate::ensemble::StateEnsemble| {
            e.len() == reference.len()
                && e.priors().iter().zip(reference.priors()).all(|(a, b)| (a - b).abs() <= 1e-12)
                && e.states().iter().zip(reference.states()).all(|(a, b)| a.max_abs_diff(b).is_ok_and(|v| v <= 1e-12))
        };
        if !se.factors().iter().all(matches) {
            return Ok(None);
        }
        build_example2_certificate(d, m, se.steps()).map(Some)
    }
}

/// Certificate providers by name, tried in registration order.
pub struct CertificateProviderRegistry {
    providers: Vec<Box<dyn CertificateProvider>>,
}

impl Default for CertificateProviderRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GhzBasisProvider));
        r
    }
}

impl CertificateProviderRegistry {
    pub fn empty() -> Self {
        Self { providers: Vec::new() }
    }

    pub fn register(&mut self, provider: Box<dyn CertificateProvider>) {
        self.providers.retain(|p| p.name() != provider.name());
        self.providers.push(provider);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.providers.iter().map(|p| p.name()).collect()
    }

    /// First certificate any provider returns, with the provider's name.
    pub fn provide(&self, se: &SequenceEnsemble) -> Result<Option<(&'static str, SeparableCertificate)>> {
        for p in &self.providers {
            if let Some(cert) = p.provide(se)? {
                return Ok(Some((p.name(), cert)));
            }
        }
        Ok(None)
    }

    /// Keeps only the named providers, in the given order.
    pub fn retain_names(&mut self, names: &[String]) -> Result<()> {
        let mut kept = Vec::with_capacity(names.len());
        for name in names {
            let pos = self
                .providers
                .iter()
                .position(|p| p.name() == name)
                .ok_or_else(|| Error::UnknownStrategy(name.clone()))?;
            kept.push(self.providers.remove(pos));
        }
        self.providers = kept;
        Ok(())
    }
}
