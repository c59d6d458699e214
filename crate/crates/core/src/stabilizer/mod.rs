//! Exact stabilizer simulation: tableaux, finite ensembles, local Pauli
//! protocols, graph states and the Smolin state.

mod ensemble;
mod pauli;
mod protocol;
mod tableau;

pub use ensemble::{PartyLayout, StabilizerEnsemble};
pub use pauli::{PauliSpec, PauliString};
pub use protocol::{run_compiled, run_protocol, CompiledProtocol, Condition, Leaf, Protocol, ProtocolRun, Record, Step};
pub use tableau::{OutcomeBranch, Tableau};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{gates, PureState};
use crate::scalar::{Rational, Scalar};
use crate::scenario::{Behavior, Scenario};

/// Graph state with generators `K_v = X_v Π_{w∼v} Z_w`.
pub fn graph_state(adjacency: &[Vec<bool>]) -> Result<Tableau> {
    let n = adjacency.len();
    for (v, row) in adjacency.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!("adjacency row {v} has length {}, expected {n}", row.len())));
        }
        if row[v] {
            return Err(Error::invalid(format!("vertex {v} has a self-loop")));
        }
        for (w, &e) in row.iter().enumerate() {
            if e != adjacency[w][v] {
                return Err(Error::invalid(format!("adjacency is not symmetric at ({v}, {w})")));
            }
        }
    }
    let stab = (0..n)
        .map(|v| {
            let mut letters = vec![(v, 'X')];
            letters.extend((0..n).filter(|&w| adjacency[v][w]).map(|w| (w, 'Z')));
            PauliString::from_sparse(n, &letters)
        })
        .collect::<Result<Vec<_>>>()?;
    let destab = (0..n).map(|v| PauliString::single(n, v, 'Z')).collect::<Result<Vec<_>>>()?;
    Tableau::from_rows(destab, stab)
}

/// Adjacency matrix of the complete graph `K_m`.
pub fn complete_graph(m: usize) -> Vec<Vec<bool>> {
    (0..m).map(|v| (0..m).map(|w| v != w).collect()).collect()
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n ≥ 1` qubits.
pub fn ghz_state(n: usize) -> Tableau {
    let mut t = Tableau::zeros(n);
    t.apply_h(0);
    for q in 1..n {
        t.apply_cnot(q - 1, q);
    }
    t
}

/// Adjacency matrix from an edge list.
pub fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<bool>>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        if a >= n || b >= n || a == b {
            return Err(Error::invalid(format!("bad edge ({a}, {b}) for {n} vertices")));
        }
        adj[a][b] = true;
        adj[b][a] = true;
    }
    Ok(adj)
}

/// Bell pair on qubits (0, 1) of a 2-qubit register stabilized by
/// `sx·XX` and `sz·ZZ`.
pub fn bell_pair(sx_negative: bool, sz_negative: bool) -> Tableau {
    let sign = |p: PauliString, neg: bool| if neg { p.negated() } else { p };
    let xx = PauliString::from_sparse(2, &[(0, 'X'), (1, 'X')]).expect("2 qubits");
    let zz = PauliString::from_sparse(2, &[(0, 'Z'), (1, 'Z')]).expect("2 qubits");
    let destab = vec![PauliString::single(2, 0, 'Z').expect("q0"), PauliString::single(2, 1, 'X').expect("q1")];
    Tableau::from_rows(destab, vec![sign(xx, sx_negative), sign(zz, sz_negative)]).expect("valid Bell tableau")
}

/// Four-qubit Smolin state `(1/4) Σ_k |ψ_k⟩⟨ψ_k|_AB ⊗ |ψ_k⟩⟨ψ_k|_CD` over
/// the four Bell states; qubits are A, B, C, D in order.
pub fn smolin_state() -> StabilizerEnsemble {
    let quarter = Rational::new(1, 4);
    let branches = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .map(|&(sx, sz)| (quarter.clone(), bell_pair(sx, sz).tensor(&bell_pair(sx, sz))))
        .collect();
    StabilizerEnsemble::new(branches).expect("weights sum to one")
}

pub const SMOLIN_PARTIES: [&str; 5] = ["A", "B", "C", "D", "E"];

/// Parties sharing each of the five copies, in qubit order. Copy `k`
/// lacks party `4 − k`.
pub const SMOLIN_COPIES: [[usize; 4]; 5] = [[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 3, 4], [0, 2, 3, 4], [1, 2, 3, 4]];

/// Qubit of `party` inside copy `copy`, if that copy includes the party.
pub fn smolin_qubit(copy: usize, party: usize) -> Option<usize> {
    SMOLIN_COPIES[copy].iter().position(|&p| p == party).map(|pos| 4 * copy + pos)
}

/// Five Smolin copies on 20 qubits (1024 branches) with each of A–E
/// holding one qubit of four copies.
pub fn smolin_five_copies() -> (StabilizerEnsemble, PartyLayout) {
    let one = smolin_state();
    let mut e = one.clone();
    for _ in 1..5 {
        e = e.tensor(&one);
    }
    let qubits = (0..5).map(|p| (0..5).filter_map(|c| smolin_qubit(c, p)).collect()).collect();
    let layout = PartyLayout::new(SMOLIN_PARTIES.iter().map(|s| s.to_string()).collect(), qubits, 20)
        .expect("valid Smolin layout");
    (e, layout)
}

/// Entanglement swapping through the two copies that lack `i` and `j`:
/// each of the other three parties Bell-measures (XX then ZZ) its qubits in
/// those copies. Returns the protocol and the qubits of `i` and `j` that
/// end up sharing a Bell pair.
pub fn smolin_pair_protocol(i: usize, j: usize) -> Result<(Protocol, (usize, usize))> {
    if i == j || i > 4 || j > 4 {
        return Err(Error::invalid(format!("({i}, {j}) is not a pair of distinct Smolin parties")));
    }
    let (ci, cj) = (4 - i, 4 - j);
    let mut steps = Vec::new();
    for p in (0..5).filter(|&p| p != i && p != j) {
        let q1 = smolin_qubit(ci, p).expect("party in copy");
        let q2 = smolin_qubit(cj, p).expect("party in copy");
        for word in ["XX", "ZZ"] {
            steps.push(Step::new(SMOLIN_PARTIES[p], &format!("{word}_({q1},{q2})"))?);
        }
    }
    let qi = smolin_qubit(cj, i).expect("i in the copy lacking j");
    let qj = smolin_qubit(ci, j).expect("j in the copy lacking i");
    Ok((Protocol::new(steps), (qi, qj)))
}

/// Exact Born table for local ±1 Pauli observables; `settings[p][x]` is
/// party `p`'s observable for setting `x`, outcome 0 is eigenvalue +1.
pub fn born_table_stabilizer(
    ensemble: &StabilizerEnsemble,
    layout: &PartyLayout,
    settings: &[Vec<PauliSpec>],
) -> Result<Behavior<Rational>> {
    let n = ensemble.num_qubits();
    if settings.len() != layout.parties() {
        return Err(Error::DimensionMismatch(format!(
            "{} setting lists for {} parties",
            settings.len(),
            layout.parties()
        )));
    }
    let mut obs: Vec<Vec<PauliString>> = Vec::with_capacity(settings.len());
    for (p, list) in settings.iter().enumerate() {
        let mut compiled = Vec::with_capacity(list.len());
        for spec in list {
            if let Some(q) = spec.qubits().find(|q| !layout.qubits[p].contains(q)) {
                return Err(Error::Locality(format!(
                    "observable {spec} of party {} touches qubit {q}",
                    layout.names[p]
                )));
            }
            let o = spec.to_pauli(n)?;
            if o.is_identity_word() {
                return Err(Error::invalid(format!("party {}: identity observable", layout.names[p])));
            }
            compiled.push(o);
        }
        obs.push(compiled);
    }
    let sc = Scenario::new(settings.iter().map(Vec::len).collect(), vec![2; settings.len()])?;
    let n_out = sc.num_outcome_tuples();
    let mut table = vec![Rational::zero(); sc.table_len()];
    for xi in 0..sc.num_setting_tuples() {
        let x = sc.settings_of(xi);
        let row = &mut table[xi * n_out..(xi + 1) * n_out];
        for (w, t) in ensemble.branches() {
            accumulate(t.clone(), &obs, &x, 0, 0, w.clone(), row);
        }
    }
    Behavior::from_table(sc, table)
}

fn accumulate(t: Tableau, obs: &[Vec<PauliString>], x: &[usize], p: usize, a: usize, w: Rational, row: &mut [Rational]) {
    if p == obs.len() {
        row[a] += w;
        return;
    }
    let o = &obs[p][x[p]];
    match t.deterministic_outcome(o) {
        Some(bit) => accumulate(t, obs, x, p + 1, 2 * a + bit as usize, w, row),
        None => {
            let half = w * &Rational::new(1, 2);
            for bit in 0..2u8 {
                let next = t.collapsed(o, bit).expect("random outcome");
                accumulate(next, obs, x, p + 1, 2 * a + bit as usize, half.clone(), row);
            }
        }
    }
}

/// Dense matrix of a Pauli string (qubit 0 most significant).
pub fn pauli_matrix(p: &PauliString) -> crate::quantum::Matrix {
    let factors: Vec<_> = (0..p.num_qubits())
        .map(|q| {
            let x = if p.x_bit(q) { gates::x() } else { gates::id() };
            let z = if p.z_bit(q) { gates::z() } else { gates::id() };
            x * z
        })
        .collect();
    let phase = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]
        [p.phase() as usize];
    gates::kron_all(&factors) * phase
}

/// State vector of a stabilizer state, obtained by projecting a basis
/// vector with `Π_k (I + S_k)/2`. Intended for small registers.
pub fn dense_state(t: &Tableau) -> Result<PureState> {
    let n = t.num_qubits();
    let dims = vec![2; n];
    let all: Vec<usize> = (0..n).collect();
    for b in 0..(1usize << n) {
        let digits: Vec<usize> = (0..n).map(|q| (b >> (n - 1 - q)) & 1).collect();
        let mut v = PureState::basis(dims.clone(), &digits)?.amplitudes().clone();
        for s in t.stabilizers() {
            let m = pauli_matrix(s);
            v = (&v + &m * &v) * Complex64::new(0.5, 0.0);
        }
        if v.norm() > 1e-6 {
            let state = PureState::normalized(v.iter().copied().collect(), dims)?;
            debug_assert_eq!(state.dims().len(), all.len());
            return Ok(state);
        }
    }
    Err(Error::invalid("stabilizer group fixes no basis overlap"))
}
