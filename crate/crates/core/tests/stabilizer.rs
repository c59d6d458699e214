use nonloc::quantum::{self, gates, MeasurementFamily, PureState};
use nonloc::stabilizer::{
    self, born_table_stabilizer, dense_state, run_protocol, PartyLayout, PauliSpec, PauliString, Protocol, StabilizerEnsemble,
    Step, Tableau,
};
use nonloc::{Error, Execution, Rational, Scalar};
use proptest::prelude::*;

fn spec(s: &str) -> PauliSpec {
    s.parse().unwrap()
}

fn purity_entropy(state: &PureState, qubits: &[usize]) -> usize {
    let rho = state.reduced(qubits).unwrap();
    let purity = (&rho * &rho).trace().re;
    (-purity.log2()).round() as usize
}

fn overlap(a: &PureState, b: &PureState) -> f64 {
    a.amplitudes().dotc(b.amplitudes()).norm()
}

fn dense_graph_state(adj: &[Vec<bool>]) -> PureState {
    let n = adj.len();
    let mut s = PureState::zeros(n).unwrap();
    for q in 0..n {
        s = s.h(q).unwrap();
    }
    for a in 0..n {
        for b in a + 1..n {
            if adj[a][b] {
                s = s.h(b).unwrap().cnot(a, b).unwrap().h(b).unwrap();
            }
        }
    }
    s
}

#[test]
fn graph_state_entropies() {
    let k5 = stabilizer::graph_state(&stabilizer::complete_graph(5)).unwrap();
    for cut in [vec![0], vec![0, 1], vec![1, 3], vec![0, 2, 4]] {
        assert_eq!(k5.entanglement_entropy(&cut), 1);
    }
    let path = stabilizer::adjacency_from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let t = stabilizer::graph_state(&path).unwrap();
    let dense = dense_graph_state(&path);
    assert_eq!(t.entanglement_entropy(&[0, 1]), 1);
    assert_eq!(t.entanglement_entropy(&[0, 2]), 2);
    for cut in [vec![0], vec![1], vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]] {
        assert_eq!(t.entanglement_entropy(&cut), purity_entropy(&dense, &cut), "{cut:?}");
    }
}

#[test]
fn graph_states_match_the_dense_construction() {
    for m in 2..=5 {
        let adj = stabilizer::complete_graph(m);
        let t = stabilizer::graph_state(&adj).unwrap();
        assert!((overlap(&dense_state(&t).unwrap(), &dense_graph_state(&adj)) - 1.0).abs() < 1e-12, "K{m}");
    }
    let adj = stabilizer::adjacency_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
    let t = stabilizer::graph_state(&adj).unwrap();
    assert!((overlap(&dense_state(&t).unwrap(), &dense_graph_state(&adj)) - 1.0).abs() < 1e-12);
}

#[test]
fn z_measurement_deletes_a_vertex() {
    let k4 = stabilizer::graph_state(&stabilizer::complete_graph(4)).unwrap();
    let z0 = PauliString::single(4, 0, 'Z').unwrap();
    let branches = k4.measure_branches(&z0).unwrap();
    assert_eq!(branches.len(), 2);
    let k3 = stabilizer::graph_state(&stabilizer::complete_graph(3)).unwrap();
    for b in branches {
        assert_eq!(b.probability, Rational::new(1, 2));
        let mut expected = Tableau::zeros(1).tensor(&k3);
        if b.outcome == 1 {
            expected.apply_x(0);
            for q in 1..4 {
                expected.apply_z(q);
            }
        }
        assert_eq!(b.state.canonical_stabilizers(), expected.canonical_stabilizers());
        let dense = dense_state(&b.state).unwrap();
        assert!((overlap(&dense, &dense_state(&expected).unwrap()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn measure_branches_on_basis_states() {
    let t = Tableau::zeros(2);
    let z = t.measure_branches(&PauliString::single(2, 1, 'Z').unwrap()).unwrap();
    assert_eq!(z.len(), 1);
    assert_eq!((z[0].outcome, z[0].probability.clone()), (0, Rational::one()));
    let x = t.measure_branches(&PauliString::single(2, 0, 'X').unwrap()).unwrap();
    assert_eq!(x.len(), 2);
    assert!(x.iter().all(|b| b.probability == Rational::new(1, 2)));
    let minus_z = spec("-Z_(0)").to_pauli(2).unwrap();
    assert_eq!(t.deterministic_outcome(&minus_z), Some(1));
    assert!("iZ_(0)".parse::<PauliSpec>().is_err());
    assert!("XZ_(0)".parse::<PauliSpec>().is_err());
}

#[test]
fn ghz_protocols_from_fixtures() {
    let ghz = StabilizerEnsemble::pure(stabilizer::ghz_state(3));
    let layout = PartyLayout::one_qubit_each(3);
    let x = run_protocol(&ghz, &layout, &Protocol::new(vec![Step::new("1", "X_(1)").unwrap()]), Execution::Sequential).unwrap();
    assert_eq!(x.leaves.len(), 2);
    assert_eq!(x.total_weight(), Rational::one());
    for leaf in &x.leaves {
        assert_eq!(leaf.state.entanglement_entropy(&[0]), 1);
    }
    let z = run_protocol(&ghz, &layout, &Protocol::new(vec![Step::new("1", "Z_(1)").unwrap()]), Execution::Sequential).unwrap();
    assert_eq!(z.leaves.len(), 2);
    for leaf in &z.leaves {
        assert_eq!(leaf.state.entanglement_entropy(&[0]), 0);
    }
}

#[test]
fn k4_with_two_z_measurements_has_four_leaves() {
    let k4 = StabilizerEnsemble::pure(stabilizer::graph_state(&stabilizer::complete_graph(4)).unwrap());
    let layout = PartyLayout::one_qubit_each(4);
    let p = Protocol::new(vec![Step::new("2", "Z_(2)").unwrap(), Step::new("3", "Z_(3)").unwrap()]);
    let run = run_protocol(&k4, &layout, &p, Execution::Parallel).unwrap();
    assert_eq!(run.leaves.len(), 4);
    assert_eq!(run.max_random_steps, 2);
    assert!(run.leaves.iter().all(|l| l.weight == Rational::new(1, 4)));
    assert_eq!(run.by_record().len(), 4);
}

#[test]
fn conditional_steps_are_skipped_when_inactive() {
    let ghz = StabilizerEnsemble::pure(stabilizer::ghz_state(3));
    let layout = PartyLayout::one_qubit_each(3);
    let p = Protocol::new(vec![Step::new("1", "X_(1)").unwrap(), Step::new("1", "Z_(1)").unwrap().when(0, 1)]);
    let run = run_protocol(&ghz, &layout, &p, Execution::Sequential).unwrap();
    assert!(run.leaves.iter().any(|l| l.outcomes[1].is_none()));
    assert_eq!(run.total_weight(), Rational::one());
}

#[test]
fn protocol_steps_respect_locality() {
    let ghz = StabilizerEnsemble::pure(stabilizer::ghz_state(3));
    let layout = PartyLayout::one_qubit_each(3);
    let bad = Protocol::new(vec![Step::new("1", "XX_(1,2)").unwrap()]);
    assert!(matches!(run_protocol(&ghz, &layout, &bad, Execution::Sequential), Err(Error::Locality(_))));
}

#[test]
fn smolin_state_entropies() {
    let s = stabilizer::smolin_state();
    assert_eq!(s.branches().len(), 4);
    for (w, t) in s.branches() {
        assert_eq!(*w, Rational::new(1, 4));
        assert_eq!(t.entanglement_entropy(&[0, 1]), 0);
        assert_eq!(t.entanglement_entropy(&[0, 2]), 2);
        assert_eq!(t.entanglement_entropy(&[0, 3]), 2);
    }
}

#[test]
fn five_copy_smolin_register() {
    let (e, layout) = stabilizer::smolin_five_copies();
    assert_eq!(e.branches().len(), 1024);
    assert_eq!(e.num_qubits(), 20);
    assert_eq!(layout.parties(), 5);
    assert!(layout.qubits.iter().all(|q| q.len() == 4));
    for i in 0..5 {
        for j in i + 1..5 {
            let (p, (qi, qj)) = stabilizer::smolin_pair_protocol(i, j).unwrap();
            assert_eq!(p.steps.len(), 6);
            assert_eq!(layout.owner(qi), Some(i));
            assert_eq!(layout.owner(qj), Some(j));
        }
    }
    assert!(stabilizer::smolin_pair_protocol(2, 2).is_err());
}

#[test]
fn stabilizer_born_tables_match_dense() {
    let ghz = StabilizerEnsemble::pure(stabilizer::ghz_state(3));
    let layout = PartyLayout::one_qubit_each(3);
    let settings: Vec<Vec<PauliSpec>> = (0..3).map(|q| vec![spec(&format!("X_({q})")), spec(&format!("Y_({q})"))]).collect();
    let exact = born_table_stabilizer(&ghz, &layout, &settings).unwrap();
    let dense = quantum::born_table_pure(&PureState::ghz(3).unwrap(), &nonloc::fixtures::ghz_xy_measurements()).unwrap();
    assert!(exact.to_f64().max_abs_diff(&dense) < 1e-12);
    // XXX is a stabilizer: odd parity never occurs
    assert_eq!(*exact.get(&[0, 0, 0], &[1, 0, 0]), Rational::zero());
    assert_eq!(*exact.get(&[0, 0, 0], &[1, 1, 0]), Rational::new(1, 4));

    let bell = StabilizerEnsemble::pure(stabilizer::bell_pair(false, false));
    let two = PartyLayout::one_qubit_each(2);
    let zz = born_table_stabilizer(&bell, &two, &[vec![spec("Z_(0)")], vec![spec("Z_(1)")]]).unwrap();
    let fam = MeasurementFamily::from_observables(vec![vec![gates::z()], vec![gates::z()]]).unwrap();
    let d = quantum::born_table_pure(&dense_state(&stabilizer::bell_pair(false, false)).unwrap(), &fam).unwrap();
    assert!(zz.to_f64().max_abs_diff(&d) < 1e-12);
    assert!(matches!(
        born_table_stabilizer(&bell, &two, &[vec![spec("Z_(1)")], vec![spec("Z_(1)")]]),
        Err(Error::Locality(_))
    ));
}

fn random_tableau(n: usize, gates_: &[(u8, usize, usize)]) -> Tableau {
    let mut t = Tableau::zeros(n);
    for &(g, a, b) in gates_ {
        let (a, b) = (a % n, b % n);
        match g {
            0 => t.apply_h(a),
            1 => t.apply_s(a),
            _ if a != b => t.apply_cnot(a, b),
            _ => t.apply_h(a),
        }
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_of_a_set_equals_entropy_of_its_complement(
        n in 2usize..7,
        gates_ in prop::collection::vec((0u8..3, 0usize..7, 0usize..7), 0..40),
        mask in 1u32..64,
    ) {
        let t = random_tableau(n, &gates_);
        let a: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 0).collect();
        prop_assert_eq!(t.entanglement_entropy(&a), t.entanglement_entropy(&b));
        prop_assert!(t.entanglement_entropy(&a) <= a.len().min(b.len()));
    }

    #[test]
    fn tableau_entropy_matches_dense_purity(
        n in 2usize..5,
        gates_ in prop::collection::vec((0u8..3, 0usize..5, 0usize..5), 0..25),
        mask in 1u32..16,
    ) {
        let t = random_tableau(n, &gates_);
        let a: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        prop_assume!(!a.is_empty() && a.len() < n);
        let dense = dense_state(&t).unwrap();
        prop_assert_eq!(t.entanglement_entropy(&a), purity_entropy(&dense, &a));
    }
}
