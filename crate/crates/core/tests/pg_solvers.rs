use seqlocc::constructions::{example1_ensemble, example2_ensemble};
use seqlocc::discrimination::{helstrom_two_state, BarrierSolver, FixedPointSolver, PgOptions, PgSolver};
use seqlocc::random::{random_ensemble, stream_rng};
use seqlocc::{solve_pg, PartyStructure};

#[test]
fn barrier_reaches_two_state_closed_form() {
    let e = example1_ensemble(2, 2).unwrap();
    let r = solve_pg(&e, 1e-10).unwrap();
    assert!((r.value - 9.0 / 14.0).abs() < 1e-9, "{}", r.value);
    assert!(r.gap <= 1e-10);
    assert!(r.dual_feasibility(&e).unwrap() >= -1e-9);
}

#[test]
fn example2_global_values() {
    for (m, d, expected) in [(2, 2, 7.0 / 9.0), (2, 3, 7.0 / 8.0), (3, 2, 13.0 / 15.0)] {
        let e = example2_ensemble(m, d).unwrap();
        let r = solve_pg(&e, 1e-9).unwrap();
        assert!((r.value - expected).abs() < 1e-6, "m={m} d={d}: {} gap {}", r.value, r.gap);
        let dm = (d as f64).powi(m as i32);
        assert!(r.value > dm / (dm + d as f64) + 1e-4);
    }
}

#[test]
fn random_two_state_agreement() {
    let s = PartyStructure::uniform(2, 2).unwrap();
    let mut rng = stream_rng(11, 0);
    for _ in 0..20 {
        let e = random_ensemble(&mut rng, &s, 2, 2).unwrap();
        let r = solve_pg(&e, 1e-10).unwrap();
        let h = helstrom_two_state(&e).unwrap();
        assert!((r.value - h).abs() < 1e-8, "{} vs {h}", r.value);
    }
}

#[test]
fn fixed_point_agrees_with_barrier() {
    let s = PartyStructure::uniform(2, 2).unwrap();
    let mut rng = stream_rng(5, 1);
    let e = random_ensemble(&mut rng, &s, 3, 4).unwrap();
    let a = BarrierSolver.solve(&e, &PgOptions::with_tol(1e-9)).unwrap();
    let b = FixedPointSolver.solve(&e, &PgOptions::with_tol(1e-6)).unwrap();
    assert!((a.value - b.value).abs() < 2e-6, "{} vs {}", a.value, b.value);
    assert!(b.dual_feasibility(&e).unwrap() >= -1e-9);
}
