use nonloc::epr2::{self, DecompositionStatus, NumericMode, LOCAL};
use nonloc::polytope::Caps;
use nonloc::scenario::boxes;
use nonloc::{quantum, Behavior, Bipartition, Execution, Rational, Scalar, Scenario};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn chsh_value(b: &Behavior<f64>) -> f64 {
    b.correlator(&[0, 0]) + b.correlator(&[0, 1]) + b.correlator(&[1, 0]) - b.correlator(&[1, 1])
}

#[test]
fn pr_and_deterministic_boxes() {
    let (p, r) = epr2::local_fraction(&boxes::pr_box::<Rational>(), Caps::default()).unwrap();
    assert_eq!(r.status, DecompositionStatus::Optimal);
    assert_eq!(r.mode, NumericMode::Rational);
    assert_eq!(r.model_weight, q(0, 1));
    assert_eq!(r.dual.value, q(0, 1));
    assert!(p.check_dual_certificate(&r));

    let det = boxes::deterministic::<Rational>(&Scenario::uniform(2, 2, 2).unwrap(), &[vec![0, 1], vec![1, 1]]);
    let (p, r) = epr2::local_fraction(&det, Caps::default()).unwrap();
    assert_eq!(r.model_weight, q(1, 1));
    assert_eq!(r.primal.len(), 1);
    assert_eq!(r.primal[0].weight, q(1, 1));
    assert!(p.check_reconstruction(&r));
}

#[test]
fn tsirelson_matches_the_chsh_bound() {
    let b = quantum::tsirelson_box();
    let s = chsh_value(&b).abs();
    assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    let (p, r) = epr2::local_fraction(&b, Caps::default()).unwrap();
    assert_eq!(r.mode, NumericMode::Float);
    let expected = 2.0 - 2f64.sqrt();
    assert!((r.model_weight - expected).abs() < 1e-6);
    // local part scores at most 2, the rest at most 4
    let bound = (4.0 - s) / 2.0;
    assert!(r.model_weight <= bound + 1e-9);
    assert!((r.model_weight - bound).abs() < 1e-6);
    assert!(p.check_dual_certificate(&r));
    assert!(p.check_reconstruction(&r));
}

#[test]
fn mermin_box_certificates() {
    let m = boxes::mermin_box::<Rational>();
    let (p, r) = epr2::local_fraction(&m, Caps::default()).unwrap();
    assert_eq!(r.model_weight, q(0, 1));
    assert!(p.check_dual_certificate(&r));
    assert!(r.dual.coefficients.iter().all(|c| !c.negative(0.0)));

    for (cut, res) in epr2::cut_scan(&m, Caps::default(), Execution::Sequential).unwrap() {
        let (p, r) = res.unwrap();
        assert_eq!(r.model_weight, q(1, 1), "{}", cut.label());
        assert!(p.check_reconstruction(&r));
    }

    let (p, r) = epr2::svetlichny_decomposition(&m, Caps::default()).unwrap();
    assert_eq!(r.p_ns, q(0, 1));
    assert_eq!(r.weight_of(LOCAL), Some(&q(0, 1)));
    assert!(p.check_dual_certificate(&r));
    assert!(p.check_reconstruction(&r));
}

#[test]
fn svetlichny_box_is_genuinely_tripartite() {
    let s = boxes::svetlichny_box::<Rational>();
    for (cut, res) in epr2::cut_scan(&s, Caps::default(), Execution::Parallel).unwrap() {
        let (p, r) = res.unwrap();
        assert_eq!(r.model_weight, q(0, 1), "{}", cut.label());
        assert!(p.check_dual_certificate(&r));
    }
    let (p, r) = epr2::svetlichny_decomposition(&s, Caps::default()).unwrap();
    assert_eq!(r.p_ns, q(1, 1));
    assert_eq!(r.residual.as_ref(), Some(&s));
    assert!(p.check_dual_certificate(&r));
}

#[test]
fn pr_on_two_parties_is_local_only_across_its_cut() {
    let b = nonloc::fixtures::pr_on_last_two();
    let values: Vec<(String, Rational)> = epr2::cut_scan(&b, Caps::default(), Execution::Sequential)
        .unwrap()
        .into_iter()
        .map(|(cut, res)| (cut.label(), res.unwrap().1.model_weight))
        .collect();
    for (label, v) in &values {
        let expected = if label == &Bipartition::new(3, &[0]).unwrap().label() { q(1, 1) } else { q(0, 1) };
        assert_eq!(v, &expected, "{label}");
    }
    let (_, r) = epr2::svetlichny_decomposition(&b, Caps::default()).unwrap();
    assert_eq!(r.p_ns, q(0, 1));
}

#[test]
fn two_party_cut_matches_local_fraction() {
    let sc = Scenario::uniform(2, 2, 2).unwrap();
    let b = Behavior::combine(&[(q(2, 5), &boxes::pr_box()), (q(3, 5), &boxes::uniform(&sc))]).unwrap();
    let (_, full) = epr2::local_fraction(&b, Caps::default()).unwrap();
    let cut = Bipartition::new(2, &[0]).unwrap();
    let (_, across) = epr2::bipartition_local_fraction(&b, &cut, Caps::default()).unwrap();
    assert_eq!(full.model_weight, across.model_weight);
    assert_eq!(full.model_weight, q(1, 1));
}

#[test]
fn chained_values_follow_the_closed_form() {
    let rows = nonloc::certify::chained_sweep(&[2, 3, 4, 5, 6], Caps::default(), Execution::Parallel).unwrap();
    for row in rows {
        let n = row.n as f64;
        let expected = n * (1.0 - (std::f64::consts::PI / (2.0 * n)).cos());
        assert!((row.p_l - expected).abs() < 1e-9, "N={} got {} expected {}", row.n, row.p_l, expected);
    }
}

#[test]
fn frozen_golden_values() {
    // computed once in exact arithmetic and pinned here
    let sc = Scenario::uniform(2, 2, 2).unwrap();
    let b = Behavior::combine(&[(q(3, 4), &boxes::pr_box()), (q(1, 4), &boxes::uniform(&sc))]).unwrap();
    assert_eq!(epr2::local_fraction(&b, Caps::default()).unwrap().1.model_weight, q(1, 2));
    let mix = Behavior::combine(&[(q(1, 3), &boxes::svetlichny_box()), (q(2, 3), &boxes::mermin_box())]).unwrap();
    let (_, r) = epr2::svetlichny_decomposition(&mix, Caps::default()).unwrap();
    assert_eq!(r.p_ns, q(1, 3));
    let (_, r) = epr2::local_fraction(&mix, Caps::default()).unwrap();
    assert_eq!(r.model_weight, q(0, 1));
}

#[test]
fn rational_and_float_modes_agree() {
    let m = boxes::mermin_box::<Rational>();
    let exact = epr2::svetlichny_decomposition(&m, Caps::default()).unwrap().1;
    let float = epr2::svetlichny_decomposition(&m.to_f64(), Caps::default()).unwrap().1;
    assert!((exact.p_ns.to_f64() - float.p_ns).abs() < 1e-9);
    let mix = nonloc::fixtures::pr_on_last_two();
    let exact = epr2::local_fraction(&mix, Caps::default()).unwrap().1;
    let float = epr2::local_fraction(&mix.to_f64(), Caps::default()).unwrap().1;
    assert!((exact.model_weight.to_f64() - float.model_weight).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_fraction_is_relabel_invariant(seed in 0u64..10_000, party in 0usize..2, setting in 0usize..2, swap: bool) {
        use rand::SeedableRng;
        let sc = Scenario::uniform(2, 2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = nonloc::sample::random_ns_behavior(&sc, 3, Caps::default(), &mut rng).unwrap();
        let mut r = b.relabel_outcomes(party, setting, &[1, 0]);
        if swap {
            r = r.relabel_settings(party, &[1, 0]);
        }
        let v1 = epr2::local_fraction(&b, Caps::default()).unwrap().1.model_weight;
        let v2 = epr2::local_fraction(&r, Caps::default()).unwrap().1.model_weight;
        prop_assert_eq!(v1, v2);
    }

    #[test]
    fn mixing_in_local_noise_never_lowers_the_local_part(seed in 0u64..10_000, num in 1i64..10) {
        use rand::SeedableRng;
        let sc = Scenario::uniform(2, 2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = nonloc::sample::random_ns_behavior(&sc, 3, Caps::default(), &mut rng).unwrap();
        let lam = q(num, 10);
        let noisy = Behavior::combine(&[(lam.clone(), &b), (q(1, 1) - &lam, &boxes::uniform(&sc))]).unwrap();
        let (p, r0) = epr2::local_fraction(&b, Caps::default()).unwrap();
        prop_assert!(p.check_dual_certificate(&r0));
        let r1 = epr2::local_fraction(&noisy, Caps::default()).unwrap().1;
        let floor = lam.clone() * &r0.model_weight + (q(1, 1) - &lam);
        prop_assert!(r1.model_weight >= floor);
    }
}
