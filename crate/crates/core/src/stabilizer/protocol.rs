//! Local Pauli measurement protocols and exhaustive branch enumeration.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scalar::Rational;

use super::ensemble::{PartyLayout, StabilizerEnsemble};
use super::pauli::{PauliSpec, PauliString};
use super::tableau::Tableau;

/// Run step `step` only if it produced `outcome`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub step: usize,
    pub outcome: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub party: String,
    pub observable: PauliSpec,
    /// Conjunction over earlier outcomes of the same party.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub condition: Vec<Condition>,
}

impl Step {
    pub fn new(party: impl Into<String>, observable: &str) -> Result<Self> {
        Ok(Step { party: party.into(), observable: observable.parse()?, condition: Vec::new() })
    }

    pub fn when(mut self, step: usize, outcome: u8) -> Self {
        self.condition.push(Condition { step, outcome });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Protocol {
    pub steps: Vec<Step>,
}

impl Serialize for PauliSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A protocol checked against a layout, with observables on the full
/// register and party names resolved.
#[derive(Debug, Clone)]
pub struct CompiledProtocol {
    parties: Vec<usize>,
    observables: Vec<PauliString>,
    conditions: Vec<Vec<Condition>>,
}

impl CompiledProtocol {
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// Parties that perform at least one measurement.
    pub fn measuring_parties(&self) -> Vec<usize> {
        let mut p = self.parties.clone();
        p.sort_unstable();
        p.dedup();
        p
    }
}

impl Protocol {
    pub fn new(steps: Vec<Step>) -> Self {
        Protocol { steps }
    }

    /// Resolves names and enforces locality: each observable acts only on
    /// the measuring party's qubits, conditions only read that party's own
    /// earlier outcomes.
    pub fn compile(&self, layout: &PartyLayout) -> Result<CompiledProtocol> {
        let n = layout.num_qubits();
        let mut parties = Vec::with_capacity(self.steps.len());
        let mut observables = Vec::with_capacity(self.steps.len());
        let mut conditions = Vec::with_capacity(self.steps.len());
        for (k, step) in self.steps.iter().enumerate() {
            let p = layout
                .party_index(&step.party)
                .ok_or_else(|| Error::invalid(format!("step {k}: unknown party {:?}", step.party)))?;
            for q in step.observable.qubits() {
                if !layout.qubits[p].contains(&q) {
                    return Err(Error::Locality(format!(
                        "step {k}: party {} measures qubit {q}, which it does not hold",
                        step.party
                    )));
                }
            }
            for c in &step.condition {
                if c.step >= k {
                    return Err(Error::invalid(format!("step {k}: condition refers to later step {}", c.step)));
                }
                if parties[c.step] != p {
                    return Err(Error::Locality(format!(
                        "step {k}: party {} conditions on step {} of party {}",
                        step.party, c.step, self.steps[c.step].party
                    )));
                }
                if c.outcome > 1 {
                    return Err(Error::invalid(format!("step {k}: outcome {} is not a bit", c.outcome)));
                }
            }
            let obs = step.observable.to_pauli(n)?;
            if obs.is_identity_word() {
                return Err(Error::invalid(format!("step {k}: identity observable")));
            }
            parties.push(p);
            observables.push(obs);
            conditions.push(step.condition.clone());
        }
        Ok(CompiledProtocol { parties, observables, conditions })
    }
}

/// Outcome record: `None` for steps skipped by their condition.
pub type Record = Vec<Option<u8>>;

#[derive(Debug, Clone)]
pub struct Leaf {
    pub outcomes: Record,
    pub weight: Rational,
    pub state: Tableau,
}

/// Every positive-weight leaf, merged on identical `(record, state)` and
/// sorted by record, then by canonical state.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub leaves: Vec<Leaf>,
    /// Largest number of random outcomes along any path.
    pub max_random_steps: usize,
}

impl ProtocolRun {
    pub fn total_weight(&self) -> Rational {
        self.leaves.iter().map(|l| l.weight.clone()).sum()
    }

    /// Leaves grouped by outcome record (the groups are contiguous).
    pub fn by_record(&self) -> Vec<(&Record, &[Leaf])> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.leaves.len() {
            if i == self.leaves.len() || self.leaves[i].outcomes != self.leaves[start].outcomes {
                out.push((&self.leaves[start].outcomes, &self.leaves[start..i]));
                start = i;
            }
        }
        out
    }
}

fn walk(
    proto: &CompiledProtocol,
    k: usize,
    state: Tableau,
    record: &mut Record,
    weight: Rational,
    random: usize,
    out: &mut Vec<(Leaf, usize)>,
) {
    if k == proto.len() {
        out.push((Leaf { outcomes: record.clone(), weight, state }, random));
        return;
    }
    let active = proto.conditions[k].iter().all(|c| record[c.step] == Some(c.outcome));
    if !active {
        record.push(None);
        walk(proto, k + 1, state, record, weight, random, out);
        record.pop();
        return;
    }
    let obs = &proto.observables[k];
    if let Some(outcome) = state.deterministic_outcome(obs) {
        record.push(Some(outcome));
        walk(proto, k + 1, state, record, weight, random, out);
        record.pop();
        return;
    }
    let half = weight * &Rational::new(1, 2);
    for outcome in 0..2u8 {
        let next = state.collapsed(obs, outcome).expect("random outcome");
        record.push(Some(outcome));
        walk(proto, k + 1, next, record, half.clone(), random + 1, out);
        record.pop();
    }
}

/// Enumerates all leaves of `protocol` on every ensemble branch.
pub fn run_protocol(
    ensemble: &StabilizerEnsemble,
    layout: &PartyLayout,
    protocol: &Protocol,
    exec: Execution,
) -> Result<ProtocolRun> {
    if layout.num_qubits() != ensemble.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "layout covers {} qubits, ensemble has {}",
            layout.num_qubits(),
            ensemble.num_qubits()
        )));
    }
    let compiled = protocol.compile(layout)?;
    Ok(run_compiled(ensemble, &compiled, exec))
}

pub fn run_compiled(ensemble: &StabilizerEnsemble, compiled: &CompiledProtocol, exec: Execution) -> ProtocolRun {
    let per_branch = exec.map(ensemble.branches(), |(w, t)| {
        let mut out = Vec::new();
        walk(compiled, 0, t.clone(), &mut Vec::with_capacity(compiled.len()), w.clone(), 0, &mut out);
        out.into_iter().map(|(leaf, r)| (leaf.state.canonical_stabilizers(), leaf, r)).collect::<Vec<_>>()
    });
    let mut merged: BTreeMap<(Record, Vec<PauliString>), Leaf> = BTreeMap::new();
    let mut max_random_steps = 0;
    for (key, leaf, r) in per_branch.into_iter().flatten() {
        max_random_steps = max_random_steps.max(r);
        match merged.entry((leaf.outcomes.clone(), key)) {
            std::collections::btree_map::Entry::Occupied(mut e) => e.get_mut().weight += leaf.weight,
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(leaf);
            }
        }
    }
    ProtocolRun { leaves: merged.into_values().collect(), max_random_steps }
}
