//! Stabilizer tableau with destabilizers and exact Pauli measurement.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Rational;

use super::pauli::PauliString;

/// Pure stabilizer state on `n` qubits: `stab[k]` generate the stabilizer
/// group and `destab[k]` anticommutes with `stab[k]` only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tableau {
    n: usize,
    destab: Vec<PauliString>,
    stab: Vec<PauliString>,
}

/// One outcome of a Pauli measurement. Outcome 0 is eigenvalue +1.
#[derive(Debug, Clone)]
pub struct OutcomeBranch {
    pub outcome: u8,
    pub probability: Rational,
    pub state: Tableau,
}

impl Tableau {
    /// `|0…0⟩`.
    pub fn zeros(n: usize) -> Self {
        let destab = (0..n).map(|q| PauliString::single(n, q, 'X').expect("in range")).collect();
        let stab = (0..n).map(|q| PauliString::single(n, q, 'Z').expect("in range")).collect();
        Tableau { n, destab, stab }
    }

    /// Builds from explicit generators; checks Hermiticity and that the rows
    /// form a symplectic basis (which also implies independence).
    pub fn from_rows(destab: Vec<PauliString>, stab: Vec<PauliString>) -> Result<Self> {
        let n = stab.len();
        if destab.len() != n || stab.iter().chain(&destab).any(|p| p.num_qubits() != n) {
            return Err(Error::DimensionMismatch("tableau needs n stabilizers and n destabilizers on n qubits".into()));
        }
        for (i, s) in stab.iter().enumerate() {
            if !s.is_hermitian() {
                return Err(Error::invalid(format!("stabilizer {s} is not Hermitian")));
            }
            for (j, t) in stab.iter().enumerate() {
                if !s.commutes(t) {
                    return Err(Error::invalid(format!("stabilizers {i} and {j} anticommute")));
                }
                if s.commutes(&destab[j]) == (i == j) {
                    return Err(Error::invalid(format!("destabilizer {j} is not paired with stabilizer {i}")));
                }
                if !destab[i].commutes(&destab[j]) {
                    return Err(Error::invalid(format!("destabilizers {i} and {j} anticommute")));
                }
            }
        }
        Ok(Tableau { n, destab, stab })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stab
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destab
    }

    pub fn apply_h(&mut self, q: usize) {
        self.destab.iter_mut().chain(self.stab.iter_mut()).for_each(|p| p.apply_h(q));
    }

    pub fn apply_s(&mut self, q: usize) {
        self.destab.iter_mut().chain(self.stab.iter_mut()).for_each(|p| p.apply_s(q));
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        self.destab.iter_mut().chain(self.stab.iter_mut()).for_each(|p| p.apply_cnot(c, t));
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        self.apply_h(b);
        self.apply_cnot(a, b);
        self.apply_h(b);
    }

    pub fn apply_x(&mut self, q: usize) {
        let x = PauliString::single(self.n, q, 'X').expect("in range");
        self.flip_anticommuting(&x);
    }

    pub fn apply_z(&mut self, q: usize) {
        let z = PauliString::single(self.n, q, 'Z').expect("in range");
        self.flip_anticommuting(&z);
    }

    fn flip_anticommuting(&mut self, p: &PauliString) {
        for row in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            if !row.commutes(p) {
                row.negate();
            }
        }
    }

    /// Tensor product, `other`'s qubits appended after `self`'s.
    pub fn tensor(&self, other: &Tableau) -> Tableau {
        let n = self.n + other.n;
        let embed = |p: &PauliString, offset: usize| {
            let mut letters = Vec::new();
            for q in 0..p.num_qubits() {
                let l = p.letter(q);
                if l != 'I' {
                    letters.push((q + offset, l));
                }
            }
            let mut out = PauliString::from_sparse(n, &letters).expect("in range");
            if p.is_negative() {
                out.negate();
            }
            out
        };
        let destab = self.destab.iter().map(|p| embed(p, 0)).chain(other.destab.iter().map(|p| embed(p, self.n)));
        let stab = self.stab.iter().map(|p| embed(p, 0)).chain(other.stab.iter().map(|p| embed(p, self.n)));
        Tableau { n, destab: destab.collect(), stab: stab.collect() }
    }

    /// If `obs` is ± an element of the stabilizer group, its eigenvalue
    /// (outcome bit); `None` when the outcome is random.
    pub fn deterministic_outcome(&self, obs: &PauliString) -> Option<u8> {
        if self.stab.iter().any(|s| !s.commutes(obs)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n);
        for (d, s) in self.destab.iter().zip(&self.stab) {
            if !d.commutes(obs) {
                acc.mul_assign_right(s);
            }
        }
        // acc equals ±obs; the state is a +1 eigenvector of acc
        Some(if acc.is_negative() == obs.is_negative() { 0 } else { 1 })
    }

    /// All outcome branches of measuring the Hermitian Pauli `obs`.
    pub fn measure_branches(&self, obs: &PauliString) -> Result<Vec<OutcomeBranch>> {
        self.check_observable(obs)?;
        if let Some(outcome) = self.deterministic_outcome(obs) {
            return Ok(vec![OutcomeBranch { outcome, probability: Rational::from(1), state: self.clone() }]);
        }
        let half = Rational::new(1, 2);
        Ok((0..2u8)
            .map(|outcome| OutcomeBranch {
                outcome,
                probability: half.clone(),
                state: self.collapsed(obs, outcome).expect("random outcome"),
            })
            .collect())
    }

    /// Post-measurement state for a random outcome; `None` if the outcome
    /// of `obs` is deterministic.
    pub fn collapsed(&self, obs: &PauliString, outcome: u8) -> Option<Tableau> {
        let p = self.stab.iter().position(|s| !s.commutes(obs))?;
        let mut t = self.clone();
        let pivot = t.stab[p].clone();
        for i in 0..self.n {
            if i != p && !t.stab[i].commutes(obs) {
                t.stab[i].mul_assign_right(&pivot);
            }
            if i != p && !t.destab[i].commutes(obs) {
                t.destab[i].mul_assign_right(&pivot);
            }
        }
        t.destab[p] = pivot;
        t.stab[p] = if outcome == 0 { obs.clone() } else { obs.negated() };
        Some(t)
    }

    fn check_observable(&self, obs: &PauliString) -> Result<()> {
        if obs.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "observable on {} qubits, state has {}",
                obs.num_qubits(),
                self.n
            )));
        }
        if !obs.is_hermitian() {
            return Err(Error::invalid(format!("observable {obs} is not Hermitian")));
        }
        if obs.is_identity_word() {
            return Err(Error::invalid("identity is not a measurement"));
        }
        Ok(())
    }

    /// Number of independent stabilizers supported inside `qubits`.
    fn supported_count(&self, qubits: &[usize]) -> usize {
        restricted_generators(&self.stab, qubits).len()
    }

    /// Von Neumann entropy (bits) of the reduced state on `qubits`.
    pub fn entanglement_entropy(&self, qubits: &[usize]) -> usize {
        let mut q: Vec<usize> = qubits.to_vec();
        q.sort_unstable();
        q.dedup();
        q.len() - self.supported_count(&q)
    }

    /// Signed generators of the subgroup supported on `qubits`, in reduced
    /// row-echelon form (a canonical description of that subgroup).
    pub fn subgroup_on(&self, qubits: &[usize]) -> Vec<PauliString> {
        restricted_generators(&self.stab, qubits)
    }

    /// Canonical generator list of the stabilizer group; equal for equal
    /// states regardless of how the tableau was reached.
    pub fn canonical_stabilizers(&self) -> Vec<PauliString> {
        let order: Vec<(usize, bool)> = (0..self.n).flat_map(|q| [(q, true), (q, false)]).collect();
        rref(self.stab.clone(), &order)
    }
}

/// Gaussian elimination of commuting Pauli rows over the listed columns
/// (`(qubit, is_x)`), tracking signs. Rows that become the identity on
/// every listed column are dropped; the rest come back in pivot order.
pub(crate) fn rref(mut rows: Vec<PauliString>, order: &[(usize, bool)]) -> Vec<PauliString> {
    let bit = |p: &PauliString, (q, is_x): (usize, bool)| if is_x { p.x_bit(q) } else { p.z_bit(q) };
    let mut r = 0;
    for &col in order {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| bit(&rows[i], col)) else {
            continue;
        };
        rows.swap(r, piv);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && bit(row, col) {
                row.mul_assign_right(&pivot);
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Generators supported on `qubits`: in the echelon form with the outside
/// columns eliminated first, exactly the rows without an outside pivot.
fn restricted_generators(stab: &[PauliString], qubits: &[usize]) -> Vec<PauliString> {
    let n = stab.first().map_or(0, |p| p.num_qubits());
    let mut inside = vec![false; n];
    for &q in qubits {
        inside[q] = true;
    }
    let order: Vec<(usize, bool)> = (0..n)
        .filter(|&q| !inside[q])
        .chain(qubits.iter().copied())
        .flat_map(|q| [(q, true), (q, false)])
        .collect();
    rref(stab.to_vec(), &order)
        .into_iter()
        .filter(|row| (0..n).all(|q| inside[q] || (!row.x_bit(q) && !row.z_bit(q))))
        .collect()
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stab {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
