use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use seqlocc::cone::{ConeStatus, ConeVerdict};
use seqlocc::discrimination::PgSummary;
use seqlocc::factor::{CheckOutcome, FactorizabilityReport, Interval};

use crate::format::EnsembleFile;

pub const TOOL: &str = "seqlocc";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: Input,
    pub seed: u64,
    pub settings: Settings,
    pub result: ReportBody,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Input {
    Files { files: Vec<FileEcho>, copies: usize },
    Example { example: String, d: usize, m: usize, steps: usize },
    Operator { source: String, parties: Vec<usize>, steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEcho {
    pub path: String,
    pub ensemble: EnsembleFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub restarts: usize,
    pub iters: usize,
    pub margin: f64,
    pub allow_primitives: bool,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportBody {
    Analyze { report: FactorizabilityReport },
    Repro { lines: Vec<ReproLine>, report: Option<FactorizabilityReport> },
    Cone { verdict: ConeVerdict, strategies: Vec<String> },
    Pg { summary: PgSummary, dual_feasibility: f64, helstrom: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproLine {
    pub label: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        crate::format::parse_json(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {} (seed {})", self.tool, self.version, self.command, self.seed);
        match &self.input {
            Input::Files { files, copies } => {
                let paths: Vec<&str> = files.iter().map(|f| f.path.as_str()).collect();
                let _ = writeln!(out, "input: {} x{copies}", paths.join(", "));
            }
            Input::Example { example, d, m, steps } => {
                let _ = writeln!(out, "input: {example} d={d} m={m} L={steps}");
            }
            Input::Operator { source, parties, steps } => {
                let _ = writeln!(out, "input: {source} parties={parties:?} steps={steps}");
            }
        }
        match &self.result {
            ReportBody::Analyze { report } => render_report(&mut out, report),
            ReportBody::Repro { lines, report } => {
                for line in lines {
                    let _ = write!(out, "{} {}", if line.pass { "PASS" } else { "FAIL" }, line.label);
                    if let Some(v) = line.observed {
                        let _ = write!(out, "  observed {v:.12}");
                    }
                    if let Some(v) = line.expected {
                        let _ = write!(out, "  expected {v:.12}");
                    }
                    if let Some(d) = &line.detail {
                        let _ = write!(out, "  ({d})");
                    }
                    out.push('\n');
                }
                if let Some(r) = report {
                    out.push('\n');
                    render_report(&mut out, r);
                }
            }
            ReportBody::Cone { verdict, strategies } => {
                let status = match verdict.status {
                    ConeStatus::CertifiedBlockPositive => "certified block positive",
                    ConeStatus::Refuted => "refuted",
                    ConeStatus::Undecided => "undecided",
                };
                let _ = writeln!(out, "verdict: {status} (strategy {})", verdict.strategy);
                let _ = writeln!(out, "strategies tried: {}", strategies.join(", "));
                if let Some(w) = &verdict.witness {
                    let _ = writeln!(out, "witness value: {:.12}", w.value);
                }
                if let Some(b) = verdict.best_found {
                    let _ = writeln!(out, "best product value: {b:.12}");
                }
                if let Some(c) = &verdict.certificate {
                    let _ = writeln!(out, "certificate: {} term(s)", c.terms.len());
                }
                for n in &verdict.notes {
                    let _ = writeln!(out, "  {n}");
                }
            }
            ReportBody::Pg { summary, dual_feasibility, helstrom } => {
                let _ = writeln!(out, "p_G = {:.12} (upper {:.12}, gap {:.3e}, solver {})", summary.value, summary.upper, summary.gap, summary.solver);
                let _ = writeln!(out, "dual feasibility: {dual_feasibility:.3e}");
                if let Some(h) = helstrom {
                    let _ = writeln!(out, "two-state closed form: {h:.12}");
                }
            }
        }
        let _ = writeln!(out, "time: {:.1} ms", self.timing_ms);
        out
    }
}

fn interval(i: &Interval) -> String {
    if i.lower == i.upper {
        format!("{:.12}", i.lower)
    } else {
        format!("[{:.12}, {:.12}]", i.lower, i.upper)
    }
}

fn render_check(out: &mut String, indent: &str, c: &CheckOutcome) {
    let _ = write!(out, "{indent}{}: {:?}", c.check.label(), c.verdict);
    if let Some(v) = c.recorded_p_l {
        let _ = write!(out, ", p_L = {v:.12}");
    }
    if let Some(v) = c.lower_bound {
        let _ = write!(out, ", p_L >= {v:.12}");
    }
    out.push('\n');
    for n in &c.notes {
        let _ = writeln!(out, "{indent}  {n}");
    }
}

fn render_report(out: &mut String, r: &FactorizabilityReport) {
    for (l, s) in r.steps.iter().enumerate() {
        let _ = writeln!(out, "step {}: max prior {:.12} (state {})", l + 1, s.max_prior, s.max_prior_index + 1);
        if let Some(pg) = &s.p_g {
            let _ = writeln!(out, "  p_G = {:.12} (gap {:.1e}, {})", pg.value, pg.gap, pg.solver);
        }
        let _ = write!(out, "  p_L {}", interval(&s.p_l));
        if let Some(c) = &s.certified_p_l {
            let _ = write!(out, " certified by {}", c.source);
        }
        out.push('\n');
        for c in &s.checks {
            render_check(out, "  ", c);
        }
    }
    let _ = writeln!(out, "sequence: max prior {:.12} at {}", r.max_prior, r.max_prior_index);
    for c in &r.checks {
        render_check(out, "  ", c);
    }
    let _ = writeln!(out, "p_L   {}", interval(&r.p_l));
    let _ = writeln!(out, "p_SEP {}", interval(&r.p_sep));
    let _ = writeln!(out, "p_G   {}", interval(&r.p_g));
    let _ = writeln!(out, "factorizable: {:?}", r.factorizable);
    for d in &r.diagnostics {
        let _ = writeln!(out, "  note: {d}");
    }
}
