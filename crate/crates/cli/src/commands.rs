use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use seqlocc::cone::{known_primitive_bp, seesaw_min_product, ConeStrategyRegistry, SeesawParams};
use seqlocc::constructions::{
    example1_ensemble, example1_violation_operator, example1_witness_operator, example2_ensemble,
    example2_measurement,
};
use seqlocc::discrimination::{helstrom_two_state, PgOptions};
use seqlocc::ensemble::{product_operator, success_probability};
use seqlocc::factor::{
    assemble_report, build_example2_certificate, check_theorem1, example2_certificate_bytes,
    verify_theorem4_certificate, CheckKind, Factorizable, ReportOptions, Verdict, CERTIFICATE_MEMORY_BUDGET,
};
use seqlocc::random::{random_ensemble, stream_rng};
use seqlocc::{
    ConeAnalyzer, ConeParams, Error, HermitianOperator, PartyStructure, PgSolverRegistry, SequenceEnsemble,
};

use crate::format::{EnsembleFile, OperatorFile};
use crate::report::{FileEcho, Input, Report, ReportBody, ReproLine, Settings, TOOL};

pub const DEFAULT_SEED: u64 = seqlocc::cone::DEFAULT_SEED;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or invalid input.
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EigenConvergence { .. } | Error::NonConvergence { .. } | Error::Unsupported(_) => {
                Self::Internal(e.to_string())
            }
            _ => Self::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Search and tolerance settings shared by the analysis commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub tol: f64,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub margin: f64,
    pub allow_primitives: bool,
    pub solver: String,
}

impl Default for Common {
    fn default() -> Self {
        let cone = ConeParams::default();
        Self {
            tol: seqlocc::factor::REPORT_PG_TOL,
            restarts: cone.seesaw.restarts,
            iters: cone.seesaw.sweeps,
            seed: DEFAULT_SEED,
            margin: cone.margin,
            allow_primitives: true,
            solver: "barrier".into(),
        }
    }
}

impl Common {
    fn validate(&self) -> CliResult<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(CliError::Input(format!("--margin must be positive, got {}", self.margin)));
        }
        if self.restarts == 0 || self.iters == 0 {
            return Err(CliError::Input("--restarts and --iters must be at least 1".into()));
        }
        PgSolverRegistry::default().get(&self.solver)?;
        Ok(())
    }

    fn cone(&self) -> ConeParams {
        ConeParams {
            seesaw: SeesawParams { restarts: self.restarts, sweeps: self.iters, seed: self.seed, ..SeesawParams::default() },
            margin: self.margin,
            allow_primitives: self.allow_primitives,
        }
    }

    fn report_options(&self, keep_certificate: bool) -> ReportOptions {
        ReportOptions {
            cone: self.cone(),
            pg_tol: self.tol,
            pg_solver: self.solver.clone(),
            keep_certificate,
            ..ReportOptions::default()
        }
    }

    fn settings(&self) -> Settings {
        Settings {
            tol: self.tol,
            restarts: self.restarts,
            iters: self.iters,
            margin: self.margin,
            allow_primitives: self.allow_primitives,
            solver: self.solver.clone(),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn finish(command: &str, input: Input, common: &Common, result: ReportBody, start: Instant) -> Report {
    Report {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        input,
        seed: common.seed,
        settings: common.settings(),
        result,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Factorizability report for the sequence of the given step files,
/// repeated `copies` times.
pub fn analyze(files: &[PathBuf], copies: usize, common: &Common) -> CliResult<Report> {
    let start = Instant::now();
    common.validate()?;
    if files.is_empty() {
        return Err(CliError::Input("at least one ensemble file is required".into()));
    }
    if copies == 0 {
        return Err(CliError::Input("--copies must be at least 1".into()));
    }
    let mut echoes = Vec::with_capacity(files.len());
    let mut steps = Vec::with_capacity(files.len());
    for path in files {
        let file = EnsembleFile::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        steps.push(file.to_ensemble().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?);
        echoes.push(FileEcho { path: path.display().to_string(), ensemble: file });
    }
    let factors: Vec<_> = (0..copies).flat_map(|_| steps.iter().cloned()).collect();
    let se = SequenceEnsemble::new(factors)?;
    let report = assemble_report(&se, &common.report_options(true))?;
    let input = Input::Files { files: echoes, copies };
    Ok(finish("analyze", input, common, ReportBody::Analyze { report }, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Example1,
    Example2,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
        }
    }
}

fn dm(m: usize, d: usize) -> f64 {
    (d as f64).powi(m as i32)
}

fn line(label: impl Into<String>, expected: f64, observed: f64, tol: f64) -> ReproLine {
    ReproLine {
        label: label.into(),
        pass: (observed - expected).abs() <= tol,
        expected: Some(expected),
        observed: Some(observed),
        detail: None,
    }
}

fn flag(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> ReproLine {
    ReproLine { label: label.into(), pass, expected: None, observed: None, detail: Some(detail.into()) }
}

/// Recomputes the checkable numbers of one of the two worked examples.
pub fn repro(example: Example, d: usize, m: usize, steps: usize, common: &Common) -> CliResult<Report> {
    let start = Instant::now();
    common.validate()?;
    if !(2..=4).contains(&d) || !(2..=3).contains(&m) || !(1..=3).contains(&steps) {
        return Err(CliError::Input(format!("need 2 <= d <= 4, 2 <= m <= 3, 1 <= L <= 3; got d={d}, m={m}, L={steps}")));
    }
    let total = dm(m * steps, d);
    if total > seqlocc::structure::DEFAULT_MAX_DIM as f64 {
        return Err(CliError::Input(format!(
            "sequence dimension {total} exceeds the bound {}",
            seqlocc::structure::DEFAULT_MAX_DIM
        )));
    }
    if example == Example::Example2 {
        let bytes = example2_certificate_bytes(d, m, steps);
        if bytes > CERTIFICATE_MEMORY_BUDGET {
            return Err(CliError::Input(format!(
                "the certificate for d={d}, m={m}, L={steps} needs about {:.0} MiB, above the {:.0} MiB budget",
                bytes / f64::from(1 << 20),
                CERTIFICATE_MEMORY_BUDGET / f64::from(1 << 20)
            )));
        }
    }
    let (lines, report) = match example {
        Example::Example1 => repro_example1(d, m, steps, common)?,
        Example::Example2 => repro_example2(d, m, steps, common)?,
    };
    let input = Input::Example { example: example.name().into(), d, m, steps };
    Ok(finish("repro", input, common, ReportBody::Repro { lines, report }, start))
}

fn repro_example1(d: usize, m: usize, steps: usize, common: &Common) -> CliResult<(Vec<ReproLine>, Option<seqlocc::factor::FactorizabilityReport>)> {
    let mut lines = Vec::new();
    let e = example1_ensemble(m, d)?;
    let analyzer = ConeAnalyzer::standard(&common.cone());

    let expected = 2.0 * dm(m, d) / (d as f64 + 3.0 * dm(m, d));
    let t1 = check_theorem1(&e, 0, &analyzer, common.margin)?;
    let mut l = line("single-step p_L from the dominant prior", expected, t1.recorded_p_l.unwrap_or(f64::NAN), 1e-12);
    l.pass &= t1.verdict == Verdict::Holds;
    l.detail = Some(format!("dominant prior {:?}", t1.verdict));
    lines.push(l);

    let sigma = example1_witness_operator(m, d)?;
    let ghz = HermitianOperator::ghz(m, d)?;
    let id = HermitianOperator::identity(PartyStructure::uniform(m, d)?);
    for (name, op) in [("Phi x 1", ghz.tensor(&id)?), ("1 x Phi", id.tensor(&ghz)?), ("Phi x Phi", ghz.tensor(&ghz)?)] {
        lines.push(line(format!("witness trace with {name}"), 1.0 / dm(m, d), sigma.trace_product(&op)?, 1e-9));
    }

    let violation = example1_violation_operator(m, d)?;
    let value = sigma.trace_product(&violation)?;
    lines.push(line("witness value on the two-step operator", 2.0 - d as f64 - 1.0 / dm(m - 1, d), value, 1e-9));

    let params = common.cone().seesaw;
    let found = seesaw_min_product(&violation, &params)?;
    let mut l = flag(
        "see-saw refutation of the two-step operator",
        found.value <= -common.margin && found.value <= value + 1e-6,
        format!("restart {} of {}", found.restart + 1, params.restarts),
    );
    l.observed = Some(found.value);
    lines.push(l);

    let helstrom = helstrom_two_state(&e)?;
    lines.push(line(
        "single-step p_G",
        (2.0 * dm(m, d) + d as f64 - 1.0) / (d as f64 + 3.0 * dm(m, d)),
        helstrom,
        1e-9,
    ));

    if steps == 1 {
        return Ok((lines, None));
    }
    let se = SequenceEnsemble::copies(&e, steps)?;
    let report = assemble_report(&se, &common.report_options(true))?;
    lines.push(flag(
        format!("factorizability over L = {steps} steps"),
        report.factorizable == Factorizable::No,
        format!("{:?}", report.factorizable),
    ));
    Ok((lines, Some(report)))
}

fn repro_example2(d: usize, m: usize, steps: usize, common: &Common) -> CliResult<(Vec<ReproLine>, Option<seqlocc::factor::FactorizabilityReport>)> {
    let mut lines = Vec::new();
    let e = example2_ensemble(m, d)?;
    let se = SequenceEnsemble::copies(&e, steps)?;
    let n = dm(m, d) + d as f64;

    let cert = build_example2_certificate(d, m, steps)?;
    let outcome = verify_theorem4_certificate(&se, &cert)?;
    lines.push(flag("separable certificate accepted", outcome.verdict == Verdict::Holds, format!("{:?}", outcome.verdict)));
    lines.push(line("trace(H)", (dm(m, d) / n).powi(steps as i32), cert.h.trace(), 1e-9));

    let mut worst: f64 = 0.0;
    for entry in &cert.indices {
        let target = cert.h.sub(&se.weighted_item(&entry.index)?)?;
        worst = worst.max(product_operator(&cert.measurements, &entry.index)?.trace_product(&target)?.abs());
    }
    lines.push(line("largest slackness residual", 0.0, worst, 1e-12));

    let pl = dm(m, d) / n;
    lines.push(line("single-step p_L", pl, success_probability(&e, &example2_measurement(m, d)?)?, 1e-12));
    lines.push(line("single-step max prior", (dm(m, d) - d as f64) / n, e.max_prior().0, 1e-15));

    let registry = PgSolverRegistry::default();
    let solver = if e.structure().total_dim() <= PgOptions::default().max_dim { common.solver.as_str() } else { "fixed-point" };
    let pg = registry.get(solver)?.solve(&e, &PgOptions::with_tol(common.tol.max(1e-9)))?;
    let mut l = flag("single-step p_G exceeds p_L", pg.value > pl + 1e-4, format!("solver {}", pg.solver));
    l.observed = Some(pg.value);
    lines.push(l);

    let report = assemble_report(&se, &common.report_options(false))?;
    lines.push(flag(
        format!("factorizability over L = {steps} steps"),
        report.factorizable == Factorizable::Yes,
        format!("{:?}", report.factorizable),
    ));
    if let Some(sandwich) = report.check(CheckKind::StrictSandwich) {
        lines.push(flag("strict sandwich", sandwich.verdict == Verdict::Holds, format!("{:?}", sandwich.verdict)));
    }
    Ok((lines, Some(report)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorBuilder {
    /// `𝟙 − dΦ` on m parties.
    Primitive,
    /// The two-step operator refuted in the first example.
    Example1Violation,
    Zero,
    Ghz,
}

impl OperatorBuilder {
    pub fn name(self) -> &'static str {
        match self {
            Self::Primitive => "primitive",
            Self::Example1Violation => "example1-violation",
            Self::Zero => "zero",
            Self::Ghz => "ghz",
        }
    }

    fn build(self, m: usize, d: usize) -> seqlocc::Result<HermitianOperator> {
        match self {
            Self::Primitive => known_primitive_bp(m, d),
            Self::Example1Violation => example1_violation_operator(m, d),
            Self::Zero => Ok(HermitianOperator::zeros(PartyStructure::uniform(m, d)?)),
            Self::Ghz => HermitianOperator::ghz(m, d),
        }
    }
}

pub enum OperatorSource {
    File(PathBuf),
    Builder { builder: OperatorBuilder, m: usize, d: usize },
}

/// Block-positivity verdict for a single operator.
pub fn cone(source: &OperatorSource, common: &Common) -> CliResult<Report> {
    let start = Instant::now();
    common.validate()?;
    let (label, op) = match source {
        OperatorSource::File(path) => {
            let file = OperatorFile::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let op = file.to_operator().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            (path.display().to_string(), op)
        }
        OperatorSource::Builder { builder, m, d } => (format!("{} m={m} d={d}", builder.name()), builder.build(*m, *d)?),
    };
    let params = common.cone();
    let mut names: Vec<&str> = ConeStrategyRegistry::default().names();
    if !params.allow_primitives {
        names.retain(|&n| n != "primitive");
    }
    let analyzer = ConeAnalyzer::from_names(&names, &params)?;
    let verdict = analyzer.analyze(&op)?;
    seqlocc::cone::audit_verdict(&op, &verdict, params.margin).map_err(CliError::Internal)?;
    let strategies = analyzer.strategy_names().into_iter().map(String::from).collect();
    let structure = op.structure();
    let input = Input::Operator { source: label, parties: structure.party_dims().to_vec(), steps: structure.steps() };
    Ok(finish("cone", input, common, ReportBody::Cone { verdict, strategies }, start))
}

/// Global guessing probability of one ensemble file.
pub fn pg(path: &Path, common: &Common) -> CliResult<Report> {
    let start = Instant::now();
    common.validate()?;
    let file = EnsembleFile::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let e = file.to_ensemble().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let registry = PgSolverRegistry::default();
    let options = PgOptions { tol: common.tol, max_dim: seqlocc::structure::DEFAULT_MAX_DIM, ..PgOptions::default() };
    let result = registry.get(&common.solver)?.solve(&e, &options)?;
    let dual_feasibility = result.dual_feasibility(&e)?;
    let helstrom = if e.len() == 2 { Some(helstrom_two_state(&e)?) } else { None };
    let input = Input::Files { files: vec![FileEcho { path: path.display().to_string(), ensemble: file }], copies: 1 };
    let body = ReportBody::Pg { summary: result.summary(), dual_feasibility, helstrom };
    Ok(finish("pg", input, common, body, start))
}

/// Seeded random ensemble with explicit matrices.
pub fn rand_ensemble(parties: &[usize], states: usize, rank: usize, seed: u64) -> CliResult<EnsembleFile> {
    if states == 0 || rank == 0 {
        return Err(CliError::Input("--states and --rank must be at least 1".into()));
    }
    let structure = PartyStructure::new(parties.to_vec(), 1, seqlocc::Ordering::StepMajor)?;
    if rank > structure.total_dim() {
        return Err(CliError::Input(format!("--rank {rank} exceeds dimension {}", structure.total_dim())));
    }
    let mut rng = stream_rng(seed, 0);
    let e = random_ensemble(&mut rng, &structure, states, rank)?;
    Ok(EnsembleFile::from_ensemble(&e))
}
