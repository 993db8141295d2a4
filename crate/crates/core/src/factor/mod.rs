//! Factorizability of LOCC discrimination over sequence ensembles: the
//! individual sufficient and necessary conditions, and a consolidated report
//! with bounds on `p_L`, `p_SEP` and `p_G`.

mod certificate;
mod checks;

pub use certificate::{
    build_example2_certificate, example2_certificate_bytes, verify_theorem4_certificate, CertificateEvidence,
    CertificateProvider, CertificateProviderRegistry, GhzBasisProvider, IndexEvidence, SeparableCertificate,
    CERTIFICATE_MEMORY_BUDGET, LOCAL_BASIS_TOL, SLACKNESS_TOL,
};
pub use checks::{
    check_corollary1, check_corollary2, check_theorem1, check_theorem2, check_theorem3, CheckKind, CheckOutcome,
    Evidence, Verdict,
};

use serde::{Deserialize, Serialize};

use crate::cone::{ConeAnalyzer, ConeParams};
use crate::discrimination::{PgOptions, PgSolverRegistry, PgSummary};
use crate::ensemble::{SequenceEnsemble, SequenceIndex, StateEnsemble};
use crate::error::{Error, Result};

/// `p_L^l` and `p_G^l` count as equal within this (plus the solver gap).
pub const EQUALITY_TOL: f64 = 1e-6;
/// Margin for strict inequalities between certified values.
pub const STRICT_TOL: f64 = 1e-8;
/// Gap target for the per-step `p_G` solves.
pub const REPORT_PG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factorizable {
    Yes,
    No,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower - tol <= v && v <= self.upper + tol
    }
}

/// An exact `p_L` value and the check that established it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub max_prior: f64,
    pub max_prior_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_g: Option<PgSummary>,
    /// Success of measuring every subsystem in the computational basis.
    pub local_basis_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_p_l: Option<CertifiedValue>,
    pub p_l: Interval,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizabilityReport {
    pub steps: Vec<StepReport>,
    pub max_prior: f64,
    pub max_prior_index: SequenceIndex,
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SeparableCertificate>,
    pub p_l: Interval,
    pub p_sep: Interval,
    pub p_g: Interval,
    pub factorizable: Factorizable,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl FactorizabilityReport {
    pub fn check(&self, kind: CheckKind) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == kind)
    }

    /// Product of the per-step `p_L` lower bounds.
    pub fn step_product_lower(&self) -> f64 {
        self.steps.iter().map(|s| s.p_l.lower).product()
    }

    /// Bound ordering violations, empty when consistent.
    pub fn consistency_issues(&self, tol: f64) -> Vec<String> {
        let mut issues = Vec::new();
        let ordered = [
            ("max prior", self.max_prior),
            ("p_L lower", self.p_l.lower),
            ("p_L upper", self.p_l.upper),
            ("p_G upper", self.p_g.upper),
        ];
        for w in ordered.windows(2) {
            if w[0].1 > w[1].1 + tol {
                issues.push(format!("{} = {} exceeds {} = {}", w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
        if self.step_product_lower() > self.p_l.lower + tol {
            issues.push("product of step lower bounds exceeds the sequence lower bound".into());
        }
        if self.p_sep.lower + tol < self.p_l.lower || self.p_sep.upper > self.p_g.upper + tol {
            issues.push("p_SEP bounds outside [p_L lower, p_G upper]".into());
        }
        issues
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub cone: ConeParams,
    pub pg_tol: f64,
    pub pg_solver: String,
    pub providers: Vec<String>,
    /// Keep the separable certificate in the report.
    pub keep_certificate: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            cone: ConeParams::default(),
            pg_tol: REPORT_PG_TOL,
            pg_solver: "barrier".into(),
            providers: vec!["ghz-basis".into()],
            keep_certificate: true,
        }
    }
}

/// `Σ_j max_i η_i ⟨j|ρ_i|j⟩`: guess the best state for each product-basis outcome.
pub fn local_basis_value(e: &StateEnsemble) -> f64 {
    let dim = e.structure().total_dim();
    (0..dim)
        .map(|j| {
            (0..e.len())
                .map(|i| e.prior(i) * e.state(i).matrix()[(j, j)].re)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

struct Context<'a> {
    options: &'a ReportOptions,
    analyzer: ConeAnalyzer,
    solvers: PgSolverRegistry,
    providers: CertificateProviderRegistry,
}

impl Context<'_> {
    fn solve_pg(&self, e: &StateEnsemble, diagnostics: &mut Vec<String>) -> Option<PgSummary> {
        let mut names = vec![self.options.pg_solver.as_str()];
        if self.options.pg_solver != "fixed-point" {
            names.push("fixed-point");
        }
        for name in names {
            let solver = match self.solvers.get(name) {
                Ok(s) => s,
                Err(e) => {
                    diagnostics.push(format!("p_G solver {name}: {e}"));
                    continue;
                }
            };
            let tol = if name == self.options.pg_solver { self.options.pg_tol } else { self.options.pg_tol.max(1e-6) };
            match solver.solve(e, &PgOptions::with_tol(tol)) {
                Ok(r) => return Some(r.summary()),
                Err(err) => diagnostics.push(format!("p_G solver {name}: {err}")),
            }
        }
        None
    }

    fn certificate(&self, se: &SequenceEnsemble, diagnostics: &mut Vec<String>) -> Result<(CheckOutcome, Option<SeparableCertificate>)> {
        let provided = match self.providers.provide(se) {
            Err(Error::Unsupported(why)) => {
                diagnostics.push(format!("certificate skipped: {why}"));
                return Ok((CheckOutcome::undecided(CheckKind::SeparableCertificate, why), None));
            }
            other => other?,
        };
        match provided {
            Some((name, cert)) => {
                let outcome = verify_theorem4_certificate(se, &cert)?.note(format!("certificate from provider {name}"));
                Ok((outcome, Some(cert)))
            }
            None => {
                diagnostics.push("no certificate provider recognized the ensemble".into());
                Ok((CheckOutcome::undecided(CheckKind::SeparableCertificate, "no certificate available"), None))
            }
        }
    }

    fn step(&self, e: &StateEnsemble, diagnostics: &mut Vec<String>) -> Result<StepReport> {
        let (max_prior, x) = e.max_prior();
        let p_g = self.solve_pg(e, diagnostics);
        let identical = check_corollary1(e);
        let dominant = check_theorem1(e, x, &self.analyzer, self.options.cone.margin)?;
        let single = SequenceEnsemble::new(vec![e.clone()])?;
        let (separable, _) = self.certificate(&single, &mut Vec::new())?;
        let local = local_basis_value(e);

        let mut certified = None;
        for check in [&dominant, &identical, &separable] {
            if let (true, Some(v)) = (check.holds(), check.recorded_p_l) {
                certified = Some(CertifiedValue { value: v, source: check.check.label().into() });
                break;
            }
        }
        if certified.is_none() {
            if let Some(pg) = &p_g {
                if pg.upper - local <= STRICT_TOL {
                    certified = Some(CertifiedValue { value: local, source: "local basis meets global bound".into() });
                }
            }
        }
        let mut lower = max_prior.max(local);
        for check in [&dominant, &separable] {
            if let Some(b) = check.lower_bound {
                lower = lower.max(b);
            }
        }
        let upper = match (&certified, &p_g) {
            (Some(c), _) => {
                lower = lower.max(c.value);
                c.value
            }
            (None, Some(pg)) => pg.upper,
            (None, None) => 1.0,
        };
        Ok(StepReport {
            max_prior,
            max_prior_index: x,
            p_g,
            local_basis_value: local,
            certified_p_l: certified,
            p_l: Interval { lower, upper: upper.max(lower) },
            checks: vec![dominant, identical, separable],
        })
    }
}

/// Runs every check on the sequence and merges the bounds.
pub fn assemble_report(se: &SequenceEnsemble, options: &ReportOptions) -> Result<FactorizabilityReport> {
    let mut providers = CertificateProviderRegistry::default();
    providers.retain_names(&options.providers)?;
    let solvers = PgSolverRegistry::default();
    solvers.get(&options.pg_solver)?;
    let ctx = Context { options, analyzer: ConeAnalyzer::standard(&options.cone), solvers, providers };
    let mut diagnostics = Vec::new();

    let steps = if se.identical_steps() {
        let step = ctx.step(&se.factors()[0], &mut diagnostics)?;
        vec![step; se.steps()]
    } else {
        se.factors()
            .iter()
            .map(|e| ctx.step(e, &mut diagnostics))
            .collect::<Result<Vec<_>>>()?
    };

    let (max_prior, x) = se.max_prior();
    let seq_dominant = if se.steps() == 1 {
        let mut t = steps[0].checks[0].clone();
        t.check = CheckKind::SequenceDominantPrior;
        t
    } else {
        check_theorem2(se, &x, &ctx.analyzer, options.cone.margin)?
    };
    let (separable, certificate) = ctx.certificate(se, &mut diagnostics)?;
    let local_global = check_theorem3(&steps);

    let p_g = if steps.iter().all(|s| s.p_g.is_some()) {
        let lower = steps.iter().map(|s| s.p_g.as_ref().map_or(1.0, |p| p.value)).product();
        let upper = steps.iter().map(|s| s.p_g.as_ref().map_or(1.0, |p| p.upper)).product();
        Interval { lower, upper }
    } else {
        Interval { lower: max_prior, upper: 1.0 }
    };

    let step_lower: f64 = steps.iter().map(|s| s.p_l.lower).product();
    let mut lower = max_prior.max(step_lower);
    let mut upper = p_g.upper;
    let mut p_sep = None;
    for check in [&seq_dominant, &separable] {
        if let Some(b) = check.lower_bound {
            lower = lower.max(b);
        }
        if let (true, Some(v)) = (check.holds(), check.recorded_p_l) {
            lower = lower.max(v);
            upper = upper.min(v);
            p_sep = Some(v);
        }
    }
    if local_global.holds() {
        lower = lower.max(p_g.lower);
    }
    let p_l = Interval { lower, upper: upper.max(lower) };
    let p_sep = p_sep.map_or(Interval { lower: p_l.lower, upper: p_g.upper }, Interval::exact);

    let yes = [&seq_dominant, &local_global, &separable].iter().any(|c| c.holds());
    let certified_product = steps
        .iter()
        .map(|s| s.certified_p_l.as_ref().map(|c| c.value))
        .product::<Option<f64>>();
    let no = certified_product.is_some_and(|prod| prod < p_l.lower - 1e-9);
    let factorizable = match (yes, no) {
        (true, false) => Factorizable::Yes,
        (false, true) => Factorizable::No,
        (true, true) => {
            diagnostics.push("contradictory factorizability evidence".into());
            Factorizable::Undecided
        }
        (false, false) => Factorizable::Undecided,
    };
    if let (Factorizable::No, Some(prod)) = (factorizable, certified_product) {
        diagnostics.push(format!("product of step p_L values {prod} is below the sequence lower bound {}", p_l.lower));
    }
    let sandwich = check_corollary2(factorizable == Factorizable::Yes, &steps);

    Ok(FactorizabilityReport {
        steps,
        max_prior,
        max_prior_index: x,
        checks: vec![seq_dominant, separable, local_global, sandwich],
        certificate: certificate.filter(|_| options.keep_certificate),
        p_l,
        p_sep,
        p_g,
        factorizable,
        diagnostics,
    })
}
