use serde::{Deserialize, Serialize};

use super::{StepReport, EQUALITY_TOL, STRICT_TOL};
use crate::cone::{audit_verdict, ConeAnalyzer, ConeStatus, ConeVerdict, Witness};
use crate::ensemble::{SequenceEnsemble, SequenceIndex, StateEnsemble, VALIDATION_TOL};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

/// Which condition a `CheckOutcome` reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `η_xρ_x − η_iρ_i` block positive for all `i` (one step).
    DominantPrior,
    /// Uniform priors and identical states.
    IdenticalStates,
    /// `η_x⃗ρ_x⃗ − η_c⃗ρ_c⃗` block positive for all `c⃗`.
    SequenceDominantPrior,
    /// `p_L = p_G` at every step.
    LocalEqualsGlobal,
    /// Dual operator `H` with LOCC measurements and complementary slackness.
    SeparableCertificate,
    /// `max η < p_L < p_G` for a factorizable sequence.
    StrictSandwich,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::DominantPrior => "dominant prior",
            Self::IdenticalStates => "identical states",
            Self::SequenceDominantPrior => "sequence dominant prior",
            Self::LocalEqualsGlobal => "local equals global",
            Self::SeparableCertificate => "separable certificate",
            Self::StrictSandwich => "strict sandwich",
        }
    }
}

/// Cone evidence for one difference `η_xρ_x − η_cρ_c`, already audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub x: SequenceIndex,
    pub c: SequenceIndex,
    pub status: ConeStatus,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_found: Option<f64>,
}

impl Evidence {
    /// Audits `verdict` against `op`; a verdict failing the audit is an internal error.
    pub fn audited(x: SequenceIndex, c: SequenceIndex, op: &HermitianOperator, verdict: ConeVerdict, margin: f64) -> Result<Self> {
        audit_verdict(op, &verdict, margin)
            .map_err(|e| Error::InvalidStructure(format!("cone verdict for {c} failed its audit: {e}")))?;
        Ok(Self {
            x,
            c,
            status: verdict.status,
            strategy: verdict.strategy,
            witness: verdict.witness,
            best_found: verdict.best_found,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub verdict: Verdict,
    /// `p_L` (and `p_SEP` where applicable) established when the check holds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_p_l: Option<f64>,
    /// A strict LOCC lower bound obtained along the way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Evidence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckOutcome {
    pub fn new(check: CheckKind, verdict: Verdict) -> Self {
        Self { check, verdict, recorded_p_l: None, lower_bound: None, evidence: Vec::new(), notes: Vec::new() }
    }

    pub fn undecided(check: CheckKind, note: impl Into<String>) -> Self {
        Self::new(check, Verdict::Undecided).note(note)
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// Shared body of the single-step and sequence dominance checks.
fn dominance(
    kind: CheckKind,
    items: &[(SequenceIndex, f64, HermitianOperator)],
    x: usize,
    analyzer: &ConeAnalyzer,
    margin: f64,
) -> Result<CheckOutcome> {
    let (x_index, eta_x, top) = &items[x];
    let mut outcome = CheckOutcome::new(kind, Verdict::Holds);
    for (j, (c_index, _, weighted)) in items.iter().enumerate() {
        if j == x {
            continue;
        }
        let diff = top.sub(weighted)?.to_party_major();
        let verdict = analyzer.analyze(&diff)?;
        let evidence = Evidence::audited(x_index.clone(), c_index.clone(), &diff, verdict, margin)?;
        match evidence.status {
            ConeStatus::Refuted => {
                let w = evidence.witness.as_ref().map_or(0.0, |w| w.value);
                // {σ, 𝟙 − σ} guessing c⃗ on σ and x⃗ otherwise is LOCC and scores η_x − w
                outcome.lower_bound = Some(eta_x - w);
                outcome.notes.push(format!("difference against {c_index} is not block positive"));
                outcome.verdict = Verdict::Fails;
                outcome.evidence.push(evidence);
                return Ok(outcome);
            }
            ConeStatus::Undecided => {
                outcome.verdict = Verdict::Undecided;
                outcome.notes.push(format!("difference against {c_index} undecided"));
            }
            ConeStatus::CertifiedBlockPositive => {}
        }
        outcome.evidence.push(evidence);
    }
    if outcome.holds() {
        outcome.recorded_p_l = Some(*eta_x);
        outcome.notes.push(format!("p_L = p_SEP = {eta_x}"));
    }
    Ok(outcome)
}

/// Block positivity of `η_xρ_x − η_iρ_i` for every `i ≠ x`.
pub fn check_theorem1(e: &StateEnsemble, x: usize, analyzer: &ConeAnalyzer, margin: f64) -> Result<CheckOutcome> {
    if x >= e.len() {
        return Err(Error::IndexOutOfRange(format!("state {} of {}", x + 1, e.len())));
    }
    let items: Vec<_> = (0..e.len())
        .map(|i| (SequenceIndex(vec![i]), e.prior(i), e.weighted_state(i)))
        .collect();
    dominance(CheckKind::DominantPrior, &items, x, analyzer, margin)
}

/// Uniform priors and pairwise equal states, each within `1e−9`.
pub fn check_corollary1(e: &StateEnsemble) -> CheckOutcome {
    let n = e.len();
    let uniform = e.priors().iter().all(|p| (p - 1.0 / n as f64).abs() <= VALIDATION_TOL);
    let first = e.state(0);
    let identical = e
        .states()
        .iter()
        .all(|s| s.max_abs_diff(first).is_ok_and(|d| d <= VALIDATION_TOL));
    if uniform && identical {
        let mut out = CheckOutcome::new(CheckKind::IdenticalStates, Verdict::Holds);
        out.recorded_p_l = Some(1.0 / n as f64);
        out
    } else {
        let mut out = CheckOutcome::new(CheckKind::IdenticalStates, Verdict::Fails);
        if !uniform {
            out.notes.push("priors are not uniform".into());
        }
        if !identical {
            out.notes.push("states differ".into());
        }
        out
    }
}

/// Block positivity of `η_x⃗ρ_x⃗ − η_c⃗ρ_c⃗` for every `c⃗ ≠ x⃗`, regrouped party-major.
pub fn check_theorem2(se: &SequenceEnsemble, x: &SequenceIndex, analyzer: &ConeAnalyzer, margin: f64) -> Result<CheckOutcome> {
    let indices = se.indices();
    let pos = indices
        .iter()
        .position(|c| c == x)
        .ok_or_else(|| Error::IndexOutOfRange(format!("sequence index {x}")))?;
    let items = indices
        .into_iter()
        .map(|c| {
            let (p, _) = se.sequence_item(&c)?;
            let w = se.weighted_item(&c)?;
            Ok((c, p, w))
        })
        .collect::<Result<Vec<_>>>()?;
    dominance(CheckKind::SequenceDominantPrior, &items, pos, analyzer, margin)
}

/// `p_L^l = p_G^l` for every step, using certified `p_L^l` and the solver gap.
pub fn check_theorem3(steps: &[StepReport]) -> CheckOutcome {
    let mut product = 1.0;
    for (l, step) in steps.iter().enumerate() {
        let (Some(pl), Some(pg)) = (&step.certified_p_l, &step.p_g) else {
            return CheckOutcome::undecided(
                CheckKind::LocalEqualsGlobal,
                format!("step {} lacks a certified p_L or a p_G value", l + 1),
            );
        };
        if (pg.value - pl.value).abs() > EQUALITY_TOL + pg.gap {
            return CheckOutcome::new(CheckKind::LocalEqualsGlobal, Verdict::Fails)
                .note(format!("step {}: p_L = {} < p_G = {}", l + 1, pl.value, pg.value));
        }
        product *= pg.value;
    }
    let mut out = CheckOutcome::new(CheckKind::LocalEqualsGlobal, Verdict::Holds);
    out.recorded_p_l = Some(product);
    out
}

/// Strict `max η < p_L < p_G` for a sequence already known to be factorizable.
pub fn check_corollary2(factorizable: bool, steps: &[StepReport]) -> CheckOutcome {
    if !factorizable {
        return CheckOutcome::undecided(CheckKind::StrictSandwich, "factorizability not established");
    }
    let mut left = false;
    let mut right = false;
    for (l, step) in steps.iter().enumerate() {
        let Some(pl) = &step.certified_p_l else {
            return CheckOutcome::undecided(CheckKind::StrictSandwich, format!("step {} lacks a certified p_L", l + 1));
        };
        left |= step.max_prior < pl.value - STRICT_TOL;
        if let Some(pg) = &step.p_g {
            right |= pl.value < pg.value - pg.gap - STRICT_TOL;
        }
    }
    let verdict = if left && right { Verdict::Holds } else { Verdict::Fails };
    let mut out = CheckOutcome::new(CheckKind::StrictSandwich, verdict);
    if !left {
        out.notes.push("no step has max prior < p_L".into());
    }
    if !right {
        out.notes.push("no step has p_L < p_G".into());
    }
    out
}
