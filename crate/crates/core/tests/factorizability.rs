use seqlocc::cone::{ConeAnalyzer, ConeParams, DEFAULT_MARGIN};
use seqlocc::constructions::{example1_ensemble, example2_ensemble};
use seqlocc::factor::{
    assemble_report, build_example2_certificate, check_corollary1, check_theorem1, check_theorem2,
    verify_theorem4_certificate, CertificateEvidence, CheckKind, Factorizable, ReportOptions, Verdict,
};
use seqlocc::{HermitianOperator, SequenceEnsemble, StateEnsemble};

fn analyzer() -> ConeAnalyzer {
    ConeAnalyzer::standard(&ConeParams::default())
}

#[test]
fn example1_step_is_certified_by_the_primitive() {
    let e = example1_ensemble(2, 2).unwrap();
    let out = check_theorem1(&e, 0, &analyzer(), DEFAULT_MARGIN).unwrap();
    assert_eq!(out.verdict, Verdict::Holds);
    assert!((out.recorded_p_l.unwrap() - 4.0 / 7.0).abs() < 1e-12);
    assert_eq!(out.evidence[0].strategy, "primitive");
}

#[test]
fn orthogonal_pair_fails_dominance() {
    let a = HermitianOperator::basis_product_projector(2, 2, 0).unwrap();
    let b = HermitianOperator::basis_product_projector(2, 2, 1).unwrap();
    let e = StateEnsemble::new(vec![(0.6, a), (0.4, b)]).unwrap();
    let out = check_theorem1(&e, 0, &analyzer(), DEFAULT_MARGIN).unwrap();
    assert_eq!(out.verdict, Verdict::Fails);
    let w = out.evidence.last().unwrap().witness.as_ref().unwrap();
    assert!((w.value + 0.4).abs() < 1e-9);
}

#[test]
fn example1_sequence_fails_dominance() {
    let se = SequenceEnsemble::copies(&example1_ensemble(2, 2).unwrap(), 2).unwrap();
    let (_, x) = se.max_prior();
    let out = check_theorem2(&se, &x, &analyzer(), DEFAULT_MARGIN).unwrap();
    assert_eq!(out.verdict, Verdict::Fails);
    assert!(out.lower_bound.unwrap() > (4.0f64 / 7.0).powi(2));
}

#[test]
fn example1_report_is_not_factorizable() {
    let se = SequenceEnsemble::copies(&example1_ensemble(2, 2).unwrap(), 2).unwrap();
    let r = assemble_report(&se, &ReportOptions::default()).unwrap();
    assert_eq!(r.factorizable, Factorizable::No, "{:#?}", r.diagnostics);
    assert!(r.consistency_issues(1e-8).is_empty(), "{:?}", r.consistency_issues(1e-8));
    assert!((r.p_g.lower - (9.0f64 / 14.0).powi(2)).abs() < 1e-8);
    assert_eq!(r.check(CheckKind::LocalEqualsGlobal).unwrap().verdict, Verdict::Fails);
}

#[test]
fn example2_report_is_factorizable_with_strict_sandwich() {
    let se = SequenceEnsemble::copies(&example2_ensemble(2, 2).unwrap(), 2).unwrap();
    let r = assemble_report(&se, &ReportOptions::default()).unwrap();
    assert_eq!(r.factorizable, Factorizable::Yes, "{:#?}", r.diagnostics);
    assert!((r.p_l.lower - 4.0 / 9.0).abs() < 1e-9 && (r.p_l.upper - 4.0 / 9.0).abs() < 1e-9);
    assert_eq!(r.check(CheckKind::StrictSandwich).unwrap().verdict, Verdict::Holds);
    assert!(r.consistency_issues(1e-8).is_empty());
    assert!((r.steps[0].certified_p_l.as_ref().unwrap().value - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn single_state_sequence() {
    let e = StateEnsemble::new(vec![(1.0, HermitianOperator::ghz(2, 2).unwrap())]).unwrap();
    let se = SequenceEnsemble::copies(&e, 2).unwrap();
    let r = assemble_report(&se, &ReportOptions::default()).unwrap();
    assert_eq!(r.factorizable, Factorizable::Yes);
    assert_eq!(r.p_l.lower, 1.0);
    assert_eq!(r.check(CheckKind::StrictSandwich).unwrap().verdict, Verdict::Fails);
}

#[test]
fn certificate_zero_ghz_and_all_ghz_shapes() {
    let cert = build_example2_certificate(2, 2, 2).unwrap();
    let first = &cert.indices[0];
    assert_eq!(first.ghz_count, Some(0));
    let last = cert.indices.last().unwrap();
    assert_eq!(last.ghz_count, Some(2));
    match &last.evidence {
        CertificateEvidence::Decomposition { certificate } => {
            assert_eq!(certificate.terms.len(), 1);
            assert!(certificate.terms[0].separable.is_empty());
        }
        _ => panic!("expected decomposition"),
    }
}

#[test]
fn perturbed_dual_fails_slackness() {
    let se = SequenceEnsemble::copies(&example2_ensemble(2, 2).unwrap(), 2).unwrap();
    let mut cert = build_example2_certificate(2, 2, 2).unwrap();
    let ghz = HermitianOperator::ghz(2, 2).unwrap();
    let phi2 = ghz.tensor(&ghz).unwrap();
    cert.h = cert.h.add(&phi2.scale(1e-3)).unwrap();
    let out = verify_theorem4_certificate(&se, &cert).unwrap();
    assert_eq!(out.verdict, Verdict::Fails);
}

#[test]
fn identical_states_checker() {
    let rho = HermitianOperator::ghz(2, 2).unwrap();
    let e = StateEnsemble::new(vec![(0.5, rho.clone()), (0.5, rho)]).unwrap();
    let out = check_corollary1(&e);
    assert_eq!(out.verdict, Verdict::Holds);
    assert_eq!(out.recorded_p_l, Some(0.5));
    assert_eq!(check_corollary1(&example2_ensemble(2, 2).unwrap()).verdict, Verdict::Fails);
}

#[test]
fn oversized_certificates_are_refused_up_front() {
    use seqlocc::factor::{example2_certificate_bytes, CERTIFICATE_MEMORY_BUDGET};
    assert!(example2_certificate_bytes(2, 2, 2) < CERTIFICATE_MEMORY_BUDGET);
    assert!(example2_certificate_bytes(4, 3, 2) > CERTIFICATE_MEMORY_BUDGET);
    let err = build_example2_certificate(4, 3, 2).unwrap_err();
    assert!(matches!(err, seqlocc::Error::Unsupported(_)), "{err}");
}
