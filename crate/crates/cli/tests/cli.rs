use std::path::PathBuf;
use std::process::{Command, Output};

use seqlocc::cone::ConeStatus;
use seqlocc::factor::{CheckKind, Factorizable, Verdict};
use seqlocc_cli::format::EnsembleFile;
use seqlocc_cli::report::{Report, ReportBody};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqlocc")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (String, Report) {
    let mut all = vec!["--output", "json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{stderr}");
    let text = String::from_utf8(out.stdout).unwrap();
    let report = Report::from_json(&text).unwrap();
    (text, report)
}

#[test]
fn example1_copies_are_not_factorizable() {
    let (_, report) = json(&["analyze", &data("example1_d2m2.json"), "--copies", "2"]);
    let ReportBody::Analyze { report: r } = report.result else { panic!("wrong body") };
    assert_eq!(r.factorizable, Factorizable::No);
    assert_eq!(r.check(CheckKind::SequenceDominantPrior).unwrap().verdict, Verdict::Fails);
    assert_eq!(r.steps.len(), 2);
}

#[test]
fn example2_copies_factorize_strictly() {
    let (_, report) = json(&["analyze", &data("example2_d2m2.json"), "--copies", "2"]);
    let ReportBody::Analyze { report: r } = report.result else { panic!("wrong body") };
    assert_eq!(r.factorizable, Factorizable::Yes);
    assert_eq!(r.check(CheckKind::StrictSandwich).unwrap().verdict, Verdict::Holds);
    assert!((r.p_l.lower - 4.0 / 9.0).abs() < 1e-9);
    assert!(r.certificate.is_some());
}

#[test]
fn single_file_reports_step_checks() {
    let (_, report) = json(&["analyze", &data("example1_d2m2.json")]);
    let ReportBody::Analyze { report: r } = report.result else { panic!("wrong body") };
    assert_eq!(r.steps.len(), 1);
    let step = &r.steps[0];
    assert_eq!(step.checks[0].check, CheckKind::DominantPrior);
    assert_eq!(step.checks[0].verdict, Verdict::Holds);
    assert_eq!(step.checks[1].check, CheckKind::IdenticalStates);
    assert!((step.p_l.lower - 4.0 / 7.0).abs() < 1e-12);
}

#[test]
fn mixed_step_files_form_one_sequence() {
    let (_, report) = json(&["analyze", &data("example2_d2m2.json"), &data("ghz_vs_basis.json")]);
    let Report { input, result: ReportBody::Analyze { report: r }, .. } = report else { panic!("wrong body") };
    assert_eq!(r.steps.len(), 2);
    assert!(r.p_l.lower <= r.p_l.upper + 1e-12);
    assert!(r.p_l.upper <= r.p_g.upper + 1e-9);
    assert!(matches!(input, seqlocc_cli::report::Input::Files { ref files, copies: 1 } if files.len() == 2));
}

#[test]
fn parse_errors_exit_2_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"parties": [2, 2], "states": [{"prior": 1.0, "builder": {"kind": "ghz", "m": 2}}]}"#).unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("states[0].builder"), "{stderr}");

    let out = run(&["analyze", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&bad, r#"{"parties": [2, 2], "states": [{"prior": 0.5, "builder": {"kind": "ghz", "m": 2, "d": 2}}]}"#).unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["repro", "example1", "--d", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["repro", "example2", "--d", "4", "--m", "3", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MiB"));
    let out = run(&["analyze", &data("example1_d2m2.json"), "--solver", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_hermitian_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.json");
    std::fs::write(&path, r#"{"parties": [2, 2], "matrix": {"dim": 4,
        "re": [[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}}"#)
    .unwrap();
    let out = run(&["cone", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Hermitian"));
}

fn cone_status(args: &[&str]) -> (ConeStatus, String) {
    let mut all = vec!["cone"];
    all.extend_from_slice(args);
    let (_, report) = json(&all);
    let ReportBody::Cone { verdict, .. } = report.result else { panic!("wrong body") };
    (verdict.status, verdict.strategy)
}

#[test]
fn cone_verdicts() {
    let (s, _) = cone_status(&["--builder", "primitive"]);
    assert_eq!(s, ConeStatus::Undecided);
    assert_eq!(cone_status(&["--builder", "primitive", "--allow-primitives"]), (ConeStatus::CertifiedBlockPositive, "primitive".into()));
    assert_eq!(cone_status(&["--builder", "example1-violation"]).0, ConeStatus::Refuted);
    assert_eq!(cone_status(&["--builder", "zero"]), (ConeStatus::CertifiedBlockPositive, "psd".into()));
    assert_eq!(cone_status(&["--builder", "ghz", "--m", "3"]).0, ConeStatus::CertifiedBlockPositive);
    assert_eq!(cone_status(&[&data("identity_minus_4ghz.json")]).0, ConeStatus::Refuted);
}

#[test]
fn repro_lines_pass() {
    for args in [
        vec!["repro", "example1"],
        vec!["repro", "example1", "--steps", "1"],
        vec!["repro", "example1", "--d", "3"],
        vec!["repro", "example2"],
        vec!["repro", "example2", "--steps", "3"],
        vec!["repro", "example2", "--m", "3"],
    ] {
        let (_, report) = json(&args);
        let ReportBody::Repro { lines, report: r } = report.result else { panic!("wrong body") };
        for l in &lines {
            assert!(l.pass, "{args:?}: {l:?}");
        }
        assert_eq!(r.is_none(), args.contains(&"1"), "{args:?}");
    }
}

#[test]
fn json_round_trips_exactly() {
    for args in [
        vec!["analyze", &data("example2_d2m2.json"), "--copies", "2"],
        vec!["cone", "--builder", "example1-violation"],
        vec!["pg", &data("ghz_vs_basis.json")],
    ] {
        let (text, report) = json(&args.iter().map(|s| s.as_ref()).collect::<Vec<&str>>());
        assert_eq!(report.to_json() + "\n", text);
        assert_eq!(Report::from_json(&report.to_json()).unwrap(), report);
    }
}

#[test]
fn same_seed_same_report() {
    let args = ["analyze", &data("example1_d2m2.json"), "--copies", "2", "--seed", "7", "--restarts", "8"];
    let (_, mut a) = json(&args);
    let (_, mut b) = json(&args);
    a.timing_ms = 0.0;
    b.timing_ms = 0.0;
    assert_eq!(a.to_json(), b.to_json());

    let (_, mut a) = json(&["cone", "--builder", "example1-violation", "--seed", "3"]);
    let (_, mut b) = json(&["cone", "--builder", "example1-violation", "--seed", "3"]);
    a.timing_ms = 0.0;
    b.timing_ms = 0.0;
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn pg_matches_closed_form_for_two_states() {
    let (_, report) = json(&["pg", &data("ghz_vs_basis.json")]);
    let ReportBody::Pg { summary, dual_feasibility, helstrom } = report.result else { panic!("wrong body") };
    let h = helstrom.unwrap();
    assert!(summary.value <= h + 1e-9 && h <= summary.upper + 1e-9);
    assert!(dual_feasibility > -1e-8);
}

#[test]
fn random_ensembles_are_valid_and_seeded() {
    let gen = |seed: &str| {
        let out = run(&["rand-ensemble", "--parties", "2,3", "--states", "3", "--rank", "2", "--seed", seed]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = gen("11");
    assert_eq!(a, gen("11"));
    assert_ne!(a, gen("12"));
    let e = EnsembleFile::parse(&a).unwrap().to_ensemble().unwrap();
    assert_eq!(e.len(), 3);
    assert_eq!(e.structure().total_dim(), 6);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rand.json");
    std::fs::write(&path, &a).unwrap();
    let (_, report) = json(&["analyze", path.to_str().unwrap(), "--restarts", "4"]);
    let ReportBody::Analyze { report: r } = report.result else { panic!("wrong body") };
    assert!(r.p_l.lower <= r.p_g.upper + 1e-9);

    assert_eq!(run(&["rand-ensemble", "--parties", "2", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn text_output_is_default() {
    let out = run(&["repro", "example1", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS single-step p_L")), "{text}");
    assert!(!text.contains("FAIL"));
}
