//! Finite mixtures of stabilizer states with a qubit-to-party layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

use super::tableau::Tableau;

/// Which qubits each party holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyLayout {
    pub names: Vec<String>,
    /// `qubits[p]` lists party `p`'s qubits in ascending order.
    pub qubits: Vec<Vec<usize>>,
}

impl PartyLayout {
    pub fn new(names: Vec<String>, mut qubits: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if names.len() != qubits.len() || names.is_empty() {
            return Err(Error::invalid("party layout needs one qubit list per named party"));
        }
        let mut owner = vec![None; n];
        for (p, qs) in qubits.iter_mut().enumerate() {
            if qs.is_empty() {
                return Err(Error::invalid(format!("party {} owns no qubits", names[p])));
            }
            qs.sort_unstable();
            for &q in qs.iter() {
                if q >= n {
                    return Err(Error::invalid(format!("qubit {q} out of range for {n} qubits")));
                }
                if owner[q].replace(p).is_some() {
                    return Err(Error::invalid(format!("qubit {q} has two owners")));
                }
            }
        }
        if let Some(q) = owner.iter().position(Option::is_none) {
            return Err(Error::invalid(format!("qubit {q} has no owner")));
        }
        Ok(PartyLayout { names, qubits })
    }

    /// One qubit per party, parties named `0, 1, …`.
    pub fn one_qubit_each(n: usize) -> Self {
        PartyLayout { names: (0..n).map(|q| q.to_string()).collect(), qubits: (0..n).map(|q| vec![q]).collect() }
    }

    pub fn parties(&self) -> usize {
        self.names.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.iter().map(Vec::len).sum()
    }

    pub fn owner(&self, q: usize) -> Option<usize> {
        self.qubits.iter().position(|qs| qs.contains(&q))
    }

    pub fn party_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// `Σ_k w_k |ψ_k⟩⟨ψ_k|` with exact positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerEnsemble {
    n: usize,
    branches: Vec<(Rational, Tableau)>,
}

impl StabilizerEnsemble {
    pub fn new(branches: Vec<(Rational, Tableau)>) -> Result<Self> {
        let n = branches.first().map(|(_, t)| t.num_qubits()).ok_or_else(|| Error::invalid("empty ensemble"))?;
        let mut total = Rational::zero();
        for (w, t) in &branches {
            if *w <= Rational::zero() {
                return Err(Error::invalid("ensemble weights must be positive"));
            }
            if t.num_qubits() != n {
                return Err(Error::DimensionMismatch("ensemble branches have different qubit counts".into()));
            }
            total += w.clone();
        }
        if total != Rational::one() {
            return Err(Error::invalid(format!("ensemble weights sum to {total}, not 1")));
        }
        Ok(StabilizerEnsemble { n, branches })
    }

    pub fn pure(t: Tableau) -> Self {
        StabilizerEnsemble { n: t.num_qubits(), branches: vec![(Rational::one(), t)] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn branches(&self) -> &[(Rational, Tableau)] {
        &self.branches
    }

    /// Product ensemble: every pair of branches, `other`'s qubits appended.
    pub fn tensor(&self, other: &StabilizerEnsemble) -> StabilizerEnsemble {
        let mut branches = Vec::with_capacity(self.branches.len() * other.branches.len());
        for (wa, ta) in &self.branches {
            for (wb, tb) in &other.branches {
                branches.push((wa.clone() * wb, ta.tensor(tb)));
            }
        }
        StabilizerEnsemble { n: self.n + other.n, branches }
    }
}
