use proptest::prelude::*;
use seqlocc::cone::{random_start, seesaw_min_product, SeesawParams};
use seqlocc::ensemble::{sequence_success_probability, success_probability};
use seqlocc::random::{random_density, random_ensemble, random_hermitian, random_povm, stream_rng};
use seqlocc::{HermitianOperator, Ordering, PartyStructure, SequenceEnsemble};

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

fn small_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=2, 2..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), parties in small_dims()) {
        let s = PartyStructure::new(parties, 1, Ordering::StepMajor).unwrap();
        let mut rng = stream_rng(seed, 0);
        let [a, b, c] = [0; 3].map(|_| random_hermitian(&mut rng, &s));
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        prop_assert_eq!(left.structure().steps(), 3);
    }

    #[test]
    fn regrouping_keeps_spectrum_and_inverts(seed in any::<u64>(), parties in dims(), steps in 1usize..=2) {
        let s = PartyStructure::new(parties, steps, Ordering::StepMajor).unwrap();
        let mut rng = stream_rng(seed, 1);
        let a = random_hermitian(&mut rng, &s);
        let p = a.regroup_step_major_to_party_major().unwrap();
        prop_assert!(p.structure().is_party_major());
        for (x, y) in a.eigenvalues().iter().zip(p.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let back = p.regroup_party_major_to_step_major().unwrap();
        prop_assert!(back.matrix() == a.matrix());
        let b = random_hermitian(&mut rng, &s);
        let direct = a.trace_product(&b).unwrap();
        prop_assert!((p.trace_product(&b).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn contraction_is_linear(seed in any::<u64>(), parties in dims(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let s = PartyStructure::new(parties, 1, Ordering::PartyMajor).unwrap();
        let mut rng = stream_rng(seed, 2);
        let a = random_hermitian(&mut rng, &s);
        let b = random_hermitian(&mut rng, &s);
        let state = random_start(&a, seed, 0).unwrap();
        let mix = a.combine(alpha, &b, beta).unwrap();
        for k in 0..s.parties() {
            let lhs = mix.contract_all_but_one(&state, k).unwrap();
            let rhs = a.contract_all_but_one(&state, k).unwrap() * num_complex::Complex64::new(alpha, 0.0)
                + b.contract_all_but_one(&state, k).unwrap() * num_complex::Complex64::new(beta, 0.0);
            prop_assert!((lhs - rhs).camax() < 1e-10);
        }
        // closing the remaining party gives the expectation
        let local = a.contract_all_but_one(&state, 0).unwrap();
        let v = &state.factors()[0];
        let value = v.dotc(&(local * v)).re;
        prop_assert!((value - state.expectation(&a).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn success_probability_factorizes(seed in any::<u64>(), steps in 1usize..=3, n in 2usize..=3) {
        let s = PartyStructure::uniform(2, 2).unwrap();
        let mut rng = stream_rng(seed, 3);
        let factors: Vec<_> = (0..steps).map(|_| random_ensemble(&mut rng, &s, n, 1).unwrap()).collect();
        let povms: Vec<_> = (0..steps).map(|_| random_povm(&mut rng, &s, n).unwrap()).collect();
        let se = SequenceEnsemble::new(factors.clone()).unwrap();
        let joint = sequence_success_probability(&se, &povms).unwrap();
        let product: f64 = factors.iter().zip(&povms).map(|(e, m)| success_probability(e, m).unwrap()).product();
        prop_assert!((joint - product).abs() < 1e-12);
    }

    #[test]
    fn psd_check_matches_spectrum(seed in any::<u64>(), parties in dims(), rank in 1usize..=3) {
        let s = PartyStructure::new(parties, 1, Ordering::StepMajor).unwrap();
        let mut rng = stream_rng(seed, 4);
        let rho = random_density(&mut rng, &s, rank.min(s.total_dim()));
        prop_assert!(rho.is_psd(1e-9));
        let shifted = rho.combine(1.0, &HermitianOperator::identity(s.clone()), -0.01).unwrap();
        let lambda = shifted.min_eigenvalue();
        prop_assert_eq!(shifted.check_psd(1e-9).is_ok(), lambda >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn seesaw_value_is_a_product_expectation(seed in any::<u64>()) {
        let s = PartyStructure::new(vec![2, 2], 2, Ordering::StepMajor).unwrap();
        let mut rng = stream_rng(seed, 5);
        let a = random_hermitian(&mut rng, &s);
        let params = SeesawParams { restarts: 4, sweeps: 50, seed, ..SeesawParams::default() };
        let out = seesaw_min_product(&a, &params).unwrap();
        prop_assert!((out.state.expectation(&a).unwrap() - out.value).abs() < 1e-9);
        prop_assert!(out.value >= a.min_eigenvalue() - 1e-9);
    }
}
