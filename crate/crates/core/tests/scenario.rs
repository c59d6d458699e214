use nonloc::quantum::{self, gates, MeasurementFamily, PureState};
use nonloc::scenario::{boxes, Violation};
use nonloc::{bipartitions, Behavior, Bipartition, Error, Rational, Scalar, Scenario};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn uniform_box_validates() {
    for sc in [Scenario::uniform(1, 3, 2).unwrap(), Scenario::uniform(3, 2, 2).unwrap(), Scenario::new(vec![2, 3], vec![3, 2]).unwrap()] {
        assert!(boxes::uniform::<Rational>(&sc).validate().is_valid());
    }
}

#[test]
fn signaling_table_is_flagged_on_the_first_party() {
    let b = nonloc::fixtures::signaling_box();
    assert_eq!(*b.get(&[0, 0], &[0, 0]), q(1, 1));
    assert_eq!(*b.get(&[1, 0], &[0, 0]), q(0, 1));
    let report = b.validate();
    match report.first_signaling() {
        Some(Violation::Signaling { party, .. }) => assert_eq!(*party, 0),
        other => panic!("expected a signaling violation, got {other:?}"),
    }
    assert_eq!(report.max_residual(), 1.0);
    assert!(matches!(b.marginal(&[1]), Err(Error::Signaling { party: 0, .. })));
}

#[test]
fn tsirelson_box_validates_at_default_tolerance() {
    let b = quantum::tsirelson_box();
    assert_eq!(b.tolerance(), 1e-9);
    assert!(b.validate().is_valid());
}

#[test]
fn negative_and_unnormalized_entries_are_reported() {
    let sc = Scenario::uniform(1, 1, 2).unwrap();
    let b = Behavior::from_table(sc, vec![q(3, 2), q(-1, 4)]).unwrap();
    let r = b.validate();
    assert!(r.violations.iter().any(|v| matches!(v, Violation::Negative { .. })));
    assert!(r.violations.iter().any(|v| matches!(v, Violation::Normalization { .. })));
}

#[test]
fn wrong_table_length_is_structural() {
    let sc = Scenario::uniform(2, 2, 2).unwrap();
    assert!(matches!(Behavior::<Rational>::from_table(sc, vec![q(1, 4); 15]), Err(Error::Structural(_))));
}

#[test]
fn marginals_of_product_tsirelson_and_mermin() {
    let one = Scenario::uniform(1, 2, 2).unwrap();
    let pa = boxes::deterministic::<Rational>(&one, &[vec![1, 0]]);
    let pb = boxes::uniform::<Rational>(&one);
    let prod = pa.tensor(&pb).unwrap();
    assert_eq!(prod.marginal(&[0]).unwrap(), pa);
    assert_eq!(prod.marginal(&[1]).unwrap(), pb);

    let ts = quantum::tsirelson_box();
    for p in 0..2 {
        let m = ts.marginal(&[p]).unwrap();
        assert!(m.table().iter().all(|v| (v - 0.5).abs() < 1e-12));
    }
    let mermin = boxes::mermin_box::<Rational>();
    for p in 0..3 {
        assert!(mermin.marginal(&[p]).unwrap().table().iter().all(|v| *v == q(1, 2)));
    }
}

#[test]
fn conditioning_a_product_leaves_the_other_side() {
    let one = Scenario::uniform(1, 2, 2).unwrap();
    let pa = boxes::deterministic::<Rational>(&one, &[vec![0, 1]]);
    let pb = boxes::uniform::<Rational>(&one);
    let prod = pa.tensor(&pb).unwrap();
    for x in 0..2 {
        for a in 0..2 {
            assert_eq!(prod.condition(&[1], &[x], &[a]).unwrap(), pa);
        }
    }
}

#[test]
fn ghz_conditioned_on_x_plus_gives_phi_plus_table() {
    let settings = || vec![gates::x(), gates::y(), gates::z()];
    let fam3 = MeasurementFamily::from_observables(vec![settings(), settings(), vec![gates::x()]]).unwrap();
    let ghz = quantum::born_table_pure(&PureState::ghz(3).unwrap(), &fam3).unwrap();
    let cond = ghz.condition(&[2], &[0], &[0]).unwrap();
    let fam2 = MeasurementFamily::from_observables(vec![settings(), settings()]).unwrap();
    let phi = quantum::born_table_pure(&PureState::phi_plus(), &fam2).unwrap();
    assert!(cond.max_abs_diff(&phi) < 1e-12);
}

#[test]
fn zero_probability_conditioning_errors() {
    let sc = Scenario::uniform(2, 1, 2).unwrap();
    let b = boxes::deterministic::<Rational>(&sc, &[vec![0], vec![0]]);
    assert!(matches!(b.condition(&[0], &[0], &[1]), Err(Error::ZeroProbability)));
}

#[test]
fn single_party_scenario_is_allowed() {
    let sc = Scenario::uniform(1, 2, 3).unwrap();
    assert_eq!(sc.table_len(), 6);
    assert!(boxes::deterministic::<Rational>(&sc, &[vec![2, 0]]).validate().is_valid());
}

#[test]
fn scenario_rejects_bad_counts_and_caps() {
    assert!(Scenario::new(vec![], vec![]).is_err());
    assert!(Scenario::new(vec![2, 0], vec![2, 2]).is_err());
    assert!(Scenario::new(vec![2], vec![1]).is_err());
    assert!(matches!(Scenario::with_cap(vec![4; 4], vec![2; 4], 100), Err(Error::CapExceeded { .. })));
}

#[test]
fn table_order_is_settings_major_party_zero_first() {
    let sc = Scenario::new(vec![2, 3], vec![2, 2]).unwrap();
    assert_eq!(sc.index(&[0, 0], &[0, 1]), 1);
    assert_eq!(sc.index(&[0, 0], &[1, 0]), 2);
    assert_eq!(sc.index(&[0, 1], &[0, 0]), 4);
    assert_eq!(sc.index(&[1, 0], &[0, 0]), 12);
    assert_eq!(sc.settings_of(4), vec![1, 1]);
}

#[test]
fn bipartition_counts_and_canonical_form() {
    assert_eq!(bipartitions(2).unwrap().len(), 1);
    assert_eq!(bipartitions(3).unwrap().len(), 3);
    assert_eq!(bipartitions(4).unwrap().len(), 7);
    assert_eq!(bipartitions(5).unwrap().len(), 15);
    for cut in bipartitions(5).unwrap() {
        assert!(cut.block_a().contains(&0));
    }
    assert_eq!(Bipartition::new(3, &[0]).unwrap(), Bipartition::new(3, &[1, 2]).unwrap());
    assert!(Bipartition::new(3, &[]).is_err());
    assert!(bipartitions(1).is_err());
}

fn relabel(b: &Behavior<Rational>, flips: u8, swaps: u8) -> Behavior<Rational> {
    let mut out = b.clone();
    for p in 0..b.scenario().parties() {
        for x in 0..2 {
            if flips >> (2 * p + x) & 1 == 1 {
                out = out.relabel_outcomes(p, x, &[1, 0]);
            }
        }
        if swaps >> p & 1 == 1 {
            out = out.relabel_settings(p, &[1, 0]);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_invariant_under_relabeling(flips in 0u8..64, swaps in 0u8..8, which in 0usize..4) {
        let b = match which {
            0 => boxes::mermin_box::<Rational>(),
            1 => boxes::svetlichny_box::<Rational>(),
            2 => nonloc::fixtures::pr_on_last_two(),
            _ => boxes::uniform::<Rational>(&Scenario::uniform(3, 2, 2).unwrap()),
        };
        let r = relabel(&b, flips, swaps);
        prop_assert!(r.validate().is_valid());
        prop_assert_eq!(relabel(&relabel(&b, flips, 0), flips, 0), b.clone());
        let sum: Rational = r.table().iter().sum();
        prop_assert_eq!(sum, Rational::from_i64(8));
    }

    #[test]
    fn party_permutation_round_trips(perm_index in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let perm = perms[perm_index];
        let b = nonloc::fixtures::pr_on_last_two();
        let mut inverse = [0; 3];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let back = b.permute_parties(&perm).unwrap().permute_parties(&inverse).unwrap();
        prop_assert_eq!(back, b);
    }
}
