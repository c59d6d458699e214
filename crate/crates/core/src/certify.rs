//! Branch-by-branch pair certificates and bipartition coverings.
//!
//! A pair certificate enumerates every outcome record of a local protocol
//! run by the other parties and checks that, for each record, the two
//! designated parties hold a pure maximally entangled qubit pair. Records
//! are audited as mixtures: all ensemble branches that produce the same
//! record must leave the same signed two-qubit stabilizer group.
//!
//! A covering certificate combines passing pair certificates: if every
//! bipartition separates some certified pair, `p_NS = 1` follows.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::epr2;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::polytope::Caps;
use crate::quantum::{self, PureState};
use crate::scalar::{Rational, Scalar};
use crate::scenario::bipartitions;
use crate::stabilizer::{
    self, pauli_matrix, CompiledProtocol, PartyLayout, PauliString, Protocol, ProtocolRun, Record,
    StabilizerEnsemble,
};

pub const FAIL_CAVEAT: &str = "criterion not met";
pub const EXACT: &str = "exact";
pub const DENSE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Theorem1,
    Theorem2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub id: String,
    pub parties: Vec<String>,
    /// SHA-256 of the canonical protocol JSON (combined over pairs for a
    /// covering certificate).
    pub protocol_hash: String,
}

/// Audit of one outcome record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafAudit {
    pub outcomes: Vec<Option<u8>>,
    pub weight: Rational,
    /// Ensemble branches merged into this record.
    pub branches: usize,
    pub maximally_entangled: bool,
    /// Qubits carrying the pair, when found.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qubits: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub bipartition: String,
    pub pair: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// Always `theorem`: the claim follows from the theorems, not from an LP.
    pub basis: String,
    pub subject: Subject,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<(usize, usize)>,
    pub numerics: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub leaves: Vec<LeafAudit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total_weight: Option<Rational>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub covering: Vec<CoverEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub uncovered: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_failing_leaf: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub caveat: Option<String>,
}

impl Certificate {
    fn finish(mut self) -> Self {
        if self.verdict.passed() {
            self.caveat = None;
        } else {
            self.claim = None;
            self.caveat = Some(FAIL_CAVEAT.to_string());
        }
        self
    }

    /// Structural checks that do not need the state: leaf weights, leaf
    /// verdicts and, for coverings, that each recorded pair straddles its
    /// bipartition.
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            CertificateKind::Theorem1 => {
                let total: Rational = self.leaves.iter().map(|l| l.weight.clone()).sum();
                let all = self.leaves.iter().all(|l| l.maximally_entangled);
                let first = self.leaves.iter().position(|l| !l.maximally_entangled);
                let weight_ok = self.numerics != EXACT || total == Rational::one();
                weight_ok && first == self.first_failing_leaf && (all && weight_ok) == self.verdict.passed()
            }
            CertificateKind::Theorem2 => {
                let m = self.subject.parties.len();
                let Ok(cuts) = bipartitions(m) else { return false };
                let straddles = self.covering.iter().all(|c| {
                    cuts.iter().find(|b| b.label() == c.bipartition).is_some_and(|b| b.separates(c.pair.0, c.pair.1))
                });
                straddles && self.covering.len() + self.uncovered.len() == cuts.len()
                    && self.uncovered.is_empty() == self.verdict.passed()
            }
        }
    }
}

/// SHA-256 (hex) of the protocol's canonical JSON.
pub fn protocol_hash(p: &Protocol) -> String {
    let json = serde_json::to_string(p).expect("protocol serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn check_pair(layout: &PartyLayout, pair: (usize, usize), compiled: &CompiledProtocol) -> Result<()> {
    let m = layout.parties();
    if pair.0 == pair.1 || pair.0 >= m || pair.1 >= m {
        return Err(Error::invalid(format!("({}, {}) is not a pair of distinct parties among {m}", pair.0, pair.1)));
    }
    if let Some(p) = compiled.measuring_parties().into_iter().find(|&p| p == pair.0 || p == pair.1) {
        return Err(Error::Locality(format!("party {} is in the certified pair and may not measure", layout.names[p])));
    }
    Ok(())
}

/// Checks one record group; returns the qubit pair that works, if any.
fn audit_group(
    leaves: &[stabilizer::Leaf],
    candidates: &[(usize, usize)],
) -> Option<(usize, usize)> {
    candidates.iter().copied().find(|&(a, b)| {
        let mut reference: Option<Vec<PauliString>> = None;
        leaves.iter().all(|leaf| {
            let t = &leaf.state;
            if t.entanglement_entropy(&[a, b]) != 0 || t.entanglement_entropy(&[a]) != 1 {
                return false;
            }
            let g = t.subgroup_on(&[a, b]);
            match &reference {
                None => {
                    reference = Some(g);
                    true
                }
                Some(r) => *r == g,
            }
        })
    })
}

/// Exact pair certificate on a stabilizer ensemble. `hint` is tried first
/// among the candidate qubit pairs.
pub fn theorem1_certify(
    subject_id: &str,
    ensemble: &StabilizerEnsemble,
    layout: &PartyLayout,
    pair: (usize, usize),
    protocol: &Protocol,
    hint: Option<(usize, usize)>,
    exec: Execution,
) -> Result<Certificate> {
    if layout.num_qubits() != ensemble.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "layout covers {} qubits, ensemble has {}",
            layout.num_qubits(),
            ensemble.num_qubits()
        )));
    }
    let compiled = protocol.compile(layout)?;
    check_pair(layout, pair, &compiled)?;
    let run = stabilizer::run_compiled(ensemble, &compiled, exec);
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    if let Some(h) = hint {
        candidates.push(h);
    }
    for &a in &layout.qubits[pair.0] {
        for &b in &layout.qubits[pair.1] {
            if Some((a, b)) != hint {
                candidates.push((a, b));
            }
        }
    }
    Ok(assemble_exact(subject_id, layout, pair, protocol, &run, &candidates, exec))
}

fn assemble_exact(
    subject_id: &str,
    layout: &PartyLayout,
    pair: (usize, usize),
    protocol: &Protocol,
    run: &ProtocolRun,
    candidates: &[(usize, usize)],
    exec: Execution,
) -> Certificate {
    let groups = run.by_record();
    let found = exec.map(&groups, |(_, leaves)| audit_group(leaves, candidates));
    let leaves: Vec<LeafAudit> = groups
        .iter()
        .zip(found)
        .map(|((record, ls), q)| LeafAudit {
            outcomes: (*record).clone(),
            weight: ls.iter().map(|l| l.weight.clone()).sum(),
            branches: ls.len(),
            maximally_entangled: q.is_some(),
            qubits: q,
        })
        .collect();
    let total: Rational = leaves.iter().map(|l| l.weight.clone()).sum();
    let first_failing_leaf = leaves.iter().position(|l| !l.maximally_entangled);
    let verdict = if first_failing_leaf.is_none() && total == Rational::one() { Verdict::Pass } else { Verdict::Fail };
    Certificate {
        kind: CertificateKind::Theorem1,
        basis: "theorem".into(),
        subject: Subject {
            id: subject_id.to_string(),
            parties: layout.names.clone(),
            protocol_hash: protocol_hash(protocol),
        },
        pair: Some(pair),
        numerics: EXACT.into(),
        leaves,
        total_weight: Some(total),
        covering: Vec::new(),
        uncovered: Vec::new(),
        verdict,
        first_failing_leaf,
        claim: Some(format!(
            "p_L = 0 across every bipartition separating {} and {}",
            layout.names[pair.0], layout.names[pair.1]
        )),
        caveat: None,
    }
    .finish()
}

/// Dense counterpart of [`theorem1_certify`] for a pure qubit state (one
/// dense subsystem per qubit). Verdicts are numerical at `tol`.
pub fn theorem1_certify_dense(
    subject_id: &str,
    state: &PureState,
    layout: &PartyLayout,
    pair: (usize, usize),
    protocol: &Protocol,
    tol: f64,
) -> Result<Certificate> {
    if state.dims().iter().any(|&d| d != 2) || state.dims().len() != layout.num_qubits() {
        return Err(Error::DimensionMismatch("dense path expects one qubit subsystem per layout qubit".into()));
    }
    let compiled = protocol.compile(layout)?;
    check_pair(layout, pair, &compiled)?;
    let n = layout.num_qubits();
    let mut steps: Vec<(Vec<usize>, [quantum::Matrix; 2])> = Vec::new();
    for step in &protocol.steps {
        let obs = step.observable.to_pauli(n)?;
        let support = obs.support();
        let local = local_pauli(&obs, &support);
        let proj = quantum::observable_projectors(&local);
        steps.push((support, [proj[0].clone(), proj[1].clone()]));
    }
    let mut leaves_out: Vec<(Record, f64, PureState)> = Vec::new();
    dense_walk(protocol, &steps, 0, state.clone(), 1.0, &mut Vec::new(), &mut leaves_out)?;
    leaves_out.sort_by(|a, b| a.0.cmp(&b.0));
    let mut leaves = Vec::with_capacity(leaves_out.len());
    let mut total = 0.0;
    for (record, p, psi) in &leaves_out {
        total += p;
        let mut q = None;
        'search: for &a in &layout.qubits[pair.0] {
            for &b in &layout.qubits[pair.1] {
                let rho = psi.reduced(&[a, b])?;
                let purity = (&rho * &rho).trace().re;
                let ra = psi.reduced(&[a])?;
                let mixed = (ra - quantum::Matrix::identity(2, 2) * quantum::C::new(0.5, 0.0)).iter().all(|z| z.norm() <= tol);
                if (purity - 1.0).abs() <= tol && mixed {
                    q = Some((a, b));
                    break 'search;
                }
            }
        }
        leaves.push(LeafAudit {
            outcomes: record.clone(),
            weight: Rational::approximate(*p).unwrap_or_else(Rational::zero),
            branches: 1,
            maximally_entangled: q.is_some(),
            qubits: q,
        });
    }
    let first_failing_leaf = leaves.iter().position(|l| !l.maximally_entangled);
    let verdict = if first_failing_leaf.is_none() && (total - 1.0).abs() <= tol { Verdict::Pass } else { Verdict::Fail };
    Ok(Certificate {
        kind: CertificateKind::Theorem1,
        basis: "theorem".into(),
        subject: Subject {
            id: subject_id.to_string(),
            parties: layout.names.clone(),
            protocol_hash: protocol_hash(protocol),
        },
        pair: Some(pair),
        numerics: format!("numerical (tol={tol:e})"),
        leaves,
        total_weight: None,
        covering: Vec::new(),
        uncovered: Vec::new(),
        verdict,
        first_failing_leaf,
        claim: Some(format!(
            "p_L = 0 across every bipartition separating {} and {}",
            layout.names[pair.0], layout.names[pair.1]
        )),
        caveat: None,
    }
    .finish())
}

fn local_pauli(obs: &PauliString, support: &[usize]) -> quantum::Matrix {
    let letters: Vec<(usize, char)> = support.iter().enumerate().map(|(k, &q)| (k, obs.letter(q))).collect();
    let mut local = PauliString::from_sparse(support.len(), &letters).expect("support fits");
    if obs.is_negative() {
        local.negate();
    }
    pauli_matrix(&local)
}

fn dense_walk(
    protocol: &Protocol,
    steps: &[(Vec<usize>, [quantum::Matrix; 2])],
    k: usize,
    psi: PureState,
    p: f64,
    record: &mut Record,
    out: &mut Vec<(Record, f64, PureState)>,
) -> Result<()> {
    if k == steps.len() {
        out.push((record.clone(), p, psi));
        return Ok(());
    }
    let active = protocol.steps[k].condition.iter().all(|c| record[c.step] == Some(c.outcome));
    if !active {
        record.push(None);
        dense_walk(protocol, steps, k + 1, psi, p, record, out)?;
        record.pop();
        return Ok(());
    }
    let (support, proj) = &steps[k];
    for (bit, e) in proj.iter().enumerate() {
        let v = psi.apply(support, e)?;
        let q = v.norm_squared();
        if q <= 1e-12 {
            continue;
        }
        let next = PureState::normalized(v.iter().copied().collect(), psi.dims().to_vec())?;
        record.push(Some(bit as u8));
        dense_walk(protocol, steps, k + 1, next, p * q, record, out)?;
        record.pop();
    }
    Ok(())
}

/// Bipartition covering from pair certificates over one subject. Failing
/// inputs are kept out of the covering.
pub fn theorem2_certify(certs: &[Certificate]) -> Result<Certificate> {
    let first = certs.first().ok_or_else(|| Error::invalid("no pair certificates given"))?;
    for c in certs {
        if c.kind != CertificateKind::Theorem1 {
            return Err(Error::invalid("covering needs pair (theorem1) certificates"));
        }
        if c.subject.id != first.subject.id || c.subject.parties != first.subject.parties {
            return Err(Error::invalid(format!(
                "mixed subjects: {:?} and {:?}",
                first.subject.id, c.subject.id
            )));
        }
    }
    let m = first.subject.parties.len();
    let passing: Vec<(usize, usize)> = certs.iter().filter(|c| c.verdict.passed()).filter_map(|c| c.pair).collect();
    let mut covering = Vec::new();
    let mut uncovered = Vec::new();
    for cut in bipartitions(m)? {
        match passing.iter().find(|&&(i, j)| cut.separates(i, j)) {
            Some(&pair) => covering.push(CoverEntry { bipartition: cut.label(), pair }),
            None => uncovered.push(cut.label()),
        }
    }
    let mut hasher = Sha256::new();
    for c in certs {
        hasher.update(c.subject.protocol_hash.as_bytes());
    }
    let verdict = if uncovered.is_empty() { Verdict::Pass } else { Verdict::Fail };
    Ok(Certificate {
        kind: CertificateKind::Theorem2,
        basis: "theorem".into(),
        subject: Subject {
            id: first.subject.id.clone(),
            parties: first.subject.parties.clone(),
            protocol_hash: hex::encode(hasher.finalize()),
        },
        pair: None,
        numerics: if certs.iter().all(|c| c.numerics == EXACT) { EXACT.into() } else { first.numerics.clone() },
        leaves: Vec::new(),
        total_weight: None,
        covering,
        uncovered,
        verdict,
        first_failing_leaf: None,
        claim: Some("p_NS = 1".into()),
        caveat: None,
    }
    .finish())
}

/// Re-runs a pair certificate's protocol and compares bit for bit.
pub fn replay(
    cert: &Certificate,
    ensemble: &StabilizerEnsemble,
    layout: &PartyLayout,
    protocol: &Protocol,
) -> Result<bool> {
    let pair = cert.pair.ok_or_else(|| Error::invalid("only pair certificates can be replayed"))?;
    if protocol_hash(protocol) != cert.subject.protocol_hash {
        return Ok(false);
    }
    let hint = cert.leaves.iter().find_map(|l| l.qubits);
    let again = theorem1_certify(&cert.subject.id, ensemble, layout, pair, protocol, hint, Execution::Sequential)?;
    Ok(again == *cert)
}

/// All pair certificates and the covering for a graph state in which the
/// parties outside each pair measure `Z`.
#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub pairs: Vec<Certificate>,
    pub covering: Certificate,
}

impl Bundle {
    pub fn passed(&self) -> bool {
        self.covering.verdict.passed() && self.pairs.iter().all(|c| c.verdict.passed())
    }
}

/// `Z` on every vertex outside the pair.
pub fn graph_pair_protocol(m: usize, pair: (usize, usize)) -> Protocol {
    Protocol::new(
        (0..m)
            .filter(|&v| v != pair.0 && v != pair.1)
            .map(|v| stabilizer::Step::new(v.to_string(), &format!("Z_({v})")).expect("valid step"))
            .collect(),
    )
}

pub fn graph_demo(adjacency: &[Vec<bool>], subject_id: &str, exec: Execution) -> Result<(Bundle, Vec<Protocol>)> {
    let m = adjacency.len();
    if m < 2 {
        return Err(Error::invalid("graph needs at least two vertices"));
    }
    let t = stabilizer::graph_state(adjacency)?;
    let ensemble = StabilizerEnsemble::pure(t);
    let layout = PartyLayout::one_qubit_each(m);
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let protocols: Vec<Protocol> = pairs.iter().map(|&p| graph_pair_protocol(m, p)).collect();
    let certs = exec.try_map(&(0..pairs.len()).collect::<Vec<_>>(), |&k| {
        theorem1_certify(subject_id, &ensemble, &layout, pairs[k], &protocols[k], None, Execution::Sequential)
    })?;
    let covering = theorem2_certify(&certs)?;
    Ok((Bundle { pairs: certs, covering }, protocols))
}

/// Complete-graph demonstration for `K_m`.
pub fn complete_graph_demo(m: usize, exec: Execution) -> Result<(Bundle, Vec<Protocol>)> {
    graph_demo(&stabilizer::complete_graph(m), &format!("graph:K{m}"), exec)
}

#[derive(Debug, Clone, Serialize)]
pub struct SmolinReport {
    pub bundle: Bundle,
    pub protocols: Vec<Protocol>,
    pub negative_control: Certificate,
}

impl SmolinReport {
    /// Demo succeeds when all pairs pass, the covering passes and the
    /// single-copy control fails.
    pub fn passed(&self) -> bool {
        self.bundle.passed() && !self.negative_control.verdict.passed()
    }
}

pub const SMOLIN_SUBJECT: &str = "smolin:5-copies";

pub fn smolin_demo(exec: Execution) -> Result<SmolinReport> {
    let (ensemble, layout) = stabilizer::smolin_five_copies();
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
    let plans = pairs.iter().map(|&(i, j)| stabilizer::smolin_pair_protocol(i, j)).collect::<Result<Vec<_>>>()?;
    let mut certs = Vec::with_capacity(pairs.len());
    for (&pair, (proto, qubits)) in pairs.iter().zip(&plans) {
        certs.push(theorem1_certify(SMOLIN_SUBJECT, &ensemble, &layout, pair, proto, Some(*qubits), exec)?);
    }
    let covering = theorem2_certify(&certs)?;
    Ok(SmolinReport {
        bundle: Bundle { pairs: certs, covering },
        protocols: plans.into_iter().map(|(p, _)| p).collect(),
        negative_control: smolin_negative_control(exec)?,
    })
}

/// One Smolin copy, pair (A, B), C and D each measuring `X` on their own.
pub fn smolin_negative_control(exec: Execution) -> Result<Certificate> {
    let names: Vec<String> = stabilizer::SMOLIN_PARTIES[..4].iter().map(|s| s.to_string()).collect();
    let layout = PartyLayout::new(names, (0..4).map(|q| vec![q]).collect(), 4)?;
    let proto = Protocol::new(vec![stabilizer::Step::new("C", "X_(2)")?, stabilizer::Step::new("D", "X_(3)")?]);
    theorem1_certify("smolin:1-copy", &stabilizer::smolin_state(), &layout, (0, 1), &proto, None, exec)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub p_l: f64,
}

/// Singlet local fraction under the chained settings for each `N`.
pub fn chained_sweep(ns: &[usize], caps: Caps, exec: Execution) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::invalid(format!("chained scenario needs N >= 2, got {bad}")));
    }
    exec.try_map(ns, |&n| {
        let meas = quantum::chained_measurements(n)?;
        let b = quantum::born_table_pure(&PureState::singlet(), &meas)?;
        let (_, r) = epr2::local_fraction(&b, caps)?;
        Ok(SweepRow { n, p_l: r.model_weight.to_f64() })
    })
}
