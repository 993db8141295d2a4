//! Block-positivity analysis: certificates, refutation by product witnesses,
//! and a registry of strategies tried in order.

mod certificate;
mod primitive;
mod seesaw;
mod telescope;

pub use certificate::{
    verify_decomposition, BlockPositiveFactor, CertificateCheck, CertificateError, CertificateTerm,
    DecompositionCertificate, ProductTerm, SeparableFactor, PSD_TOL, RECONSTRUCTION_TOL,
};
pub use primitive::{known_primitive_bp, primitive_over_steps};
pub use seesaw::{
    random_start, seesaw_from, seesaw_min_product, SeesawOutcome, SeesawParams, SeesawRun, DEFAULT_RESTARTS,
    DEFAULT_SEED, DEFAULT_SWEEPS,
};
pub use telescope::{telescope, TelescopeTerm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::product::ProductPureState;

/// A product value at or below `−margin` refutes block positivity.
pub const DEFAULT_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeStatus {
    CertifiedBlockPositive,
    Refuted,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub state: ProductPureState,
    /// `⟨⊗ψ|A|⊗ψ⟩`, evaluated from the full vector.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    /// Strategy that produced the verdict.
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DecompositionCertificate>,
    /// Smallest product value seen by any search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_found: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConeVerdict {
    pub fn undecided(strategy: &str, note: impl Into<String>) -> Self {
        Self {
            status: ConeStatus::Undecided,
            strategy: strategy.to_string(),
            witness: None,
            certificate: None,
            best_found: None,
            notes: vec![note.into()],
        }
    }

    pub fn certified(strategy: &str, certificate: DecompositionCertificate) -> Self {
        Self {
            status: ConeStatus::CertifiedBlockPositive,
            strategy: strategy.to_string(),
            witness: None,
            certificate: Some(certificate),
            best_found: None,
            notes: Vec::new(),
        }
    }

    pub fn is_decisive(&self) -> bool {
        self.status != ConeStatus::Undecided
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub seesaw: SeesawParams,
    pub margin: f64,
    pub allow_primitives: bool,
}

impl Default for ConeParams {
    fn default() -> Self {
        Self { seesaw: SeesawParams::default(), margin: DEFAULT_MARGIN, allow_primitives: true }
    }
}

pub trait ConeStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn assess(&self, op: &HermitianOperator) -> Result<ConeVerdict>;
}

/// Certified when the smallest eigenvalue is at least `−PSD_TOL`.
pub struct PsdStrategy;

impl ConeStrategy for PsdStrategy {
    fn name(&self) -> &'static str {
        "psd"
    }

    fn assess(&self, op: &HermitianOperator) -> Result<ConeVerdict> {
        Ok(certify_psd(op).unwrap_or_else(|lambda| {
            ConeVerdict::undecided(self.name(), format!("smallest eigenvalue {lambda:e}"))
        }))
    }
}

/// PSD verdict, or the offending eigenvalue.
pub fn certify_psd(op: &HermitianOperator) -> std::result::Result<ConeVerdict, f64> {
    op.check_psd(PSD_TOL)?;
    Ok(ConeVerdict::certified("psd", DecompositionCertificate::psd(op.clone())))
}

/// `A = c·P + R` with `P` the registered primitive over all steps, `c > 0`, `R ⪰ 0`.
pub struct PrimitiveStrategy;

impl ConeStrategy for PrimitiveStrategy {
    fn name(&self) -> &'static str {
        "primitive"
    }

    fn assess(&self, op: &HermitianOperator) -> Result<ConeVerdict> {
        let s = op.structure();
        let d = s.party_dims()[0];
        if s.parties() < 2 || s.party_dims().iter().any(|&x| x != d) {
            return Ok(ConeVerdict::undecided(self.name(), "primitive needs equal party dimensions"));
        }
        let p = primitive_over_steps(s.parties(), d, s.steps())?.to_ordering(s.ordering());
        let c = op.trace_product(&p)? / p.trace_product(&p)?;
        if !(c > 0.0) {
            return Ok(ConeVerdict::undecided(self.name(), "no positive primitive component"));
        }
        let remainder = op.combine(1.0, &p, -c)?;
        if let Err(lambda) = remainder.check_psd(PSD_TOL) {
            return Ok(ConeVerdict::undecided(self.name(), format!("remainder eigenvalue at most {lambda:e}")));
        }
        let terms = vec![
            CertificateTerm {
                coefficient: c,
                block_positive: BlockPositiveFactor::Primitive { parties: s.parties(), local_dim: d, steps: s.steps() },
                separable: Vec::new(),
            },
            CertificateTerm {
                coefficient: 1.0,
                block_positive: BlockPositiveFactor::Psd { operator: remainder },
                separable: Vec::new(),
            },
        ];
        Ok(ConeVerdict::certified(self.name(), DecompositionCertificate { target: op.clone(), terms, step_order: None }))
    }
}

/// Refutes when a product state reaches `−margin`; never certifies.
pub struct SeesawStrategy {
    pub params: SeesawParams,
    pub margin: f64,
}

impl ConeStrategy for SeesawStrategy {
    fn name(&self) -> &'static str {
        "seesaw"
    }

    fn assess(&self, op: &HermitianOperator) -> Result<ConeVerdict> {
        refute_block_positivity(op, &self.params, self.margin)
    }
}

/// See-saw search for a product witness. `Refuted` only when the witness,
/// re-evaluated from its full vector, is at most `−margin`.
pub fn refute_block_positivity(op: &HermitianOperator, params: &SeesawParams, margin: f64) -> Result<ConeVerdict> {
    let outcome = seesaw_min_product(op, params)?;
    let value = outcome.state.expectation(op)?;
    let mut verdict = ConeVerdict::undecided(
        "seesaw",
        format!("best product value {value:e} after {} restarts", params.restarts),
    );
    verdict.best_found = Some(value);
    if value <= -margin {
        verdict.status = ConeStatus::Refuted;
        verdict.notes = vec![format!("restart {} found {value:e}", outcome.restart + 1)];
        verdict.witness = Some(Witness { state: outcome.state, value });
    }
    Ok(verdict)
}

/// Re-checks a verdict against its operator: a refuting witness must evaluate,
/// from its full vector, to at most `−margin/2`, and a certificate must verify.
pub fn audit_verdict(op: &HermitianOperator, verdict: &ConeVerdict, margin: f64) -> std::result::Result<(), String> {
    match verdict.status {
        ConeStatus::Refuted => {
            let w = verdict.witness.as_ref().ok_or("refuted without a witness")?;
            let fresh = op.to_party_major().quadratic_form(&w.state.full_vector()).map_err(|e| e.to_string())?;
            // a negative value on a unit vector already rules out PSD
            if fresh > -margin / 2.0 {
                return Err(format!("witness re-evaluates to {fresh:e}"));
            }
            Ok(())
        }
        ConeStatus::CertifiedBlockPositive => {
            let cert = verdict.certificate.as_ref().ok_or("certified without a certificate")?;
            if verdict.witness.is_some() {
                return Err("certified verdict carries a witness".into());
            }
            let target_error = cert.target.max_abs_diff(op);
            if !matches!(target_error, Ok(e) if e <= RECONSTRUCTION_TOL) {
                return Err("certificate is for a different operator".into());
            }
            cert.check().map(|_| ()).map_err(|e| e.to_string())
        }
        ConeStatus::Undecided => Ok(()),
    }
}

type StrategyFactory = fn(&ConeParams) -> Box<dyn ConeStrategy>;

/// Cone strategies by name.
pub struct ConeStrategyRegistry {
    entries: Vec<(&'static str, StrategyFactory)>,
}

impl Default for ConeStrategyRegistry {
    fn default() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register("psd", |_| Box::new(PsdStrategy));
        r.register("primitive", |_| Box::new(PrimitiveStrategy));
        r.register("seesaw", |p| Box::new(SeesawStrategy { params: p.seesaw, margin: p.margin }));
        r
    }
}

impl ConeStrategyRegistry {
    pub fn register(&mut self, name: &'static str, factory: StrategyFactory) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn build(&self, name: &str, params: &ConeParams) -> Result<Box<dyn ConeStrategy>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f(params))
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }
}

/// Runs strategies in order and returns the first decisive verdict.
pub struct ConeAnalyzer {
    strategies: Vec<Box<dyn ConeStrategy>>,
}

impl ConeAnalyzer {
    pub fn new(strategies: Vec<Box<dyn ConeStrategy>>) -> Self {
        Self { strategies }
    }

    /// `psd`, then `primitive` when allowed, then `seesaw`.
    pub fn standard(params: &ConeParams) -> Self {
        let names: &[&str] = if params.allow_primitives { &["psd", "primitive", "seesaw"] } else { &["psd", "seesaw"] };
        Self::from_names(names, params).expect("default strategies are registered")
    }

    pub fn from_names(names: &[&str], params: &ConeParams) -> Result<Self> {
        let registry = ConeStrategyRegistry::default();
        Ok(Self::new(names.iter().map(|n| registry.build(n, params)).collect::<Result<_>>()?))
    }

    pub fn strategy_names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    pub fn analyze(&self, op: &HermitianOperator) -> Result<ConeVerdict> {
        let mut notes = Vec::new();
        let mut best_found: Option<f64> = None;
        for strategy in &self.strategies {
            let verdict = strategy.assess(op)?;
            if verdict.is_decisive() {
                return Ok(verdict);
            }
            if let Some(v) = verdict.best_found {
                best_found = Some(best_found.map_or(v, |b: f64| b.min(v)));
            }
            notes.extend(verdict.notes.into_iter().map(|n| format!("{}: {n}", strategy.name())));
        }
        Ok(ConeVerdict {
            status: ConeStatus::Undecided,
            strategy: "none".into(),
            witness: None,
            certificate: None,
            best_found,
            notes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{example1_violation_operator, identity_minus_ghz};

    #[test]
    fn primitive_is_certified_only_when_allowed() {
        let op = identity_minus_ghz(2, 2).unwrap();
        let with = ConeAnalyzer::standard(&ConeParams::default()).analyze(&op).unwrap();
        assert_eq!(with.status, ConeStatus::CertifiedBlockPositive);
        assert!(verify_decomposition(with.certificate.as_ref().unwrap()));
        let params = ConeParams { allow_primitives: false, ..Default::default() };
        let without = ConeAnalyzer::standard(&params).analyze(&op).unwrap();
        assert_eq!(without.status, ConeStatus::Undecided);
        // its product minimum is 1 − d·(1/d) = 0
        assert!(without.best_found.unwrap() > -1e-7);
    }

    #[test]
    fn psd_certificate_round_trips() {
        let op = HermitianOperator::ghz(2, 3).unwrap();
        let v = ConeAnalyzer::standard(&ConeParams::default()).analyze(&op).unwrap();
        assert_eq!(v.strategy, "psd");
        let json = serde_json::to_string(&v).unwrap();
        let back: ConeVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn violation_is_refuted_with_sound_witness() {
        let op = example1_violation_operator(2, 2).unwrap();
        let v = ConeAnalyzer::standard(&ConeParams::default()).analyze(&op).unwrap();
        assert_eq!(v.status, ConeStatus::Refuted);
        let w = v.witness.unwrap();
        let fresh = w.state.full_vector();
        let value = op.to_party_major().quadratic_form(&fresh).unwrap();
        assert!(value <= -DEFAULT_MARGIN / 2.0);
        assert!(certify_psd(&op).is_err());
    }

    #[test]
    fn tampered_certificate_fails() {
        let op = identity_minus_ghz(2, 2).unwrap();
        let v = PrimitiveStrategy.assess(&op).unwrap();
        let mut cert = v.certificate.unwrap();
        cert.terms[0].coefficient *= 1.01;
        assert!(!verify_decomposition(&cert));
        cert.terms[0].coefficient = -1.0;
        let err = cert.check().unwrap_err();
        assert!(err.issues[0].starts_with("term 1"));
    }

    #[test]
    fn unknown_strategy() {
        assert!(matches!(
            ConeAnalyzer::from_names(&["nope"], &ConeParams::default()),
            Err(Error::UnknownStrategy(_))
        ));
    }
}
