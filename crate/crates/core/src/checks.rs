//! Seeded self-check suites: conditioning identities, stabilizer/dense
//! oracle equivalence and the bipartition consistency bounds.
//!
//! Case `k` draws from its own generator seeded with `seed + k`, so a
//! report is identical under sequential and parallel execution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::epr2;
use crate::error::Result;
use crate::par::Execution;
use crate::polytope::Caps;
use crate::quantum::{self, gates, DensityOperator, MeasurementFamily, PureState};
use crate::sample;
use crate::scalar::{Rational, Scalar};
use crate::scenario::{bipartitions, Behavior, Scenario};
use crate::stabilizer::{self, PartyLayout, PauliSpec, StabilizerEnsemble, Tableau};

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// One line per failing case.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures.is_empty()
    }
}

fn rng_for(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64))
}

fn collect(name: &'static str, results: Vec<Result<Option<String>>>) -> Result<SuiteReport> {
    let cases = results.len();
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    Ok(SuiteReport { name, cases, failures })
}

// ------------------------------------------------------------ conditioning

/// Random no-signaling behaviors on three scenario shapes; checks that
/// every conditional passes validation, that conditionals re-sum to the
/// complement's marginal, and (three parties) that two-step conditioning
/// equals one-step conditioning.
pub fn conditioning_suite(cases: usize, seed: u64, exec: Execution) -> Result<SuiteReport> {
    let caps = Caps::default();
    let two = Scenario::uniform(2, 2, 2)?;
    let two_three = Scenario::uniform(2, 3, 2)?;
    let pools = [
        crate::io::cached_ns_vertices(&two, caps)?.vertices,
        crate::io::cached_ns_vertices(&two_three, caps)?.vertices,
        sample::tripartite_pool(caps)?,
    ];
    let idx: Vec<usize> = (0..cases).collect();
    let results = exec.map(&idx, |&k| {
        let mut rng = rng_for(seed, k);
        let pool = &pools[k % 3];
        let terms = rng.gen_range(1..=5);
        let b = sample::random_mixture(pool, terms, &mut rng)?;
        conditioning_case(&b, &mut rng).map(|f| f.map(|msg| format!("case {k}: {msg}")))
    });
    collect("conditioning", results)
}

fn conditioning_case(b: &Behavior<Rational>, rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    if !b.validate().is_valid() {
        return Ok(Some("sampled behavior is not no-signaling".into()));
    }
    let sc = b.scenario();
    let m = sc.parties();
    let size = rng.gen_range(1..m);
    let mut parties: Vec<usize> = (0..m).collect();
    parties.shuffle(rng);
    let mut subset = parties[..size].to_vec();
    subset.sort_unstable();
    let complement: Vec<usize> = (0..m).filter(|p| !subset.contains(p)).collect();
    let settings: Vec<usize> = subset.iter().map(|&p| rng.gen_range(0..sc.settings()[p])).collect();
    let sub = sc.restrict(&subset)?;

    let mut terms = Vec::new();
    for a in sub.outcome_tuples() {
        let w = b.subset_probability(&subset, &settings, &a)?;
        if w.is_zero() {
            if b.condition(&subset, &settings, &a).is_ok() {
                return Ok(Some(format!("conditioning on zero-probability {a:?} did not fail")));
            }
            continue;
        }
        let c = b.condition(&subset, &settings, &a)?;
        if !c.validate().is_valid() {
            return Ok(Some(format!("conditional on {subset:?}={a:?} fails validation")));
        }
        if m == 3 && subset.len() == 1 {
            if let Some(msg) = chain_check(b, subset[0], settings[0], a[0], &c, rng)? {
                return Ok(Some(msg));
            }
        }
        terms.push((w, c));
    }
    let refs: Vec<(Rational, &Behavior<Rational>)> = terms.iter().map(|(w, c)| (w.clone(), c)).collect();
    if Behavior::combine(&refs)? != b.marginal(&complement)? {
        return Ok(Some(format!("conditionals on {subset:?} do not re-sum to the marginal")));
    }
    Ok(None)
}

fn chain_check(
    b: &Behavior<Rational>,
    p: usize,
    xp: usize,
    ap: usize,
    first: &Behavior<Rational>,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>> {
    let rest: Vec<usize> = (0..3).filter(|&q| q != p).collect();
    let k = rng.gen_range(0..2);
    let q = rest[k];
    let xq = rng.gen_range(0..b.scenario().settings()[q]);
    for aq in 0..b.scenario().outcomes()[q] {
        let Ok(two_step) = first.condition(&[k], &[xq], &[aq]) else { continue };
        let (pair, xs, as_) = if p < q { ([p, q], [xp, xq], [ap, aq]) } else { ([q, p], [xq, xp], [aq, ap]) };
        let one_step = b.condition(&pair, &xs, &as_)?;
        if one_step != two_step {
            return Ok(Some(format!("chain rule fails conditioning {p} then {q}")));
        }
    }
    Ok(None)
}

// ------------------------------------------------------- oracle equivalence

fn random_clifford(n: usize, rng: &mut ChaCha8Rng) -> Result<(Tableau, PureState)> {
    let mut t = Tableau::zeros(n);
    let mut psi = PureState::zeros(n)?;
    for _ in 0..4 * n + 2 {
        match rng.gen_range(0..3) {
            0 => {
                let q = rng.gen_range(0..n);
                t.apply_h(q);
                psi = psi.h(q)?;
            }
            1 => {
                let q = rng.gen_range(0..n);
                t.apply_s(q);
                psi = psi.s(q)?;
            }
            _ if n > 1 => {
                let c = rng.gen_range(0..n);
                let mut d = rng.gen_range(0..n - 1);
                if d >= c {
                    d += 1;
                }
                t.apply_cnot(c, d);
                psi = psi.cnot(c, d)?;
            }
            _ => {}
        }
    }
    Ok((t, psi))
}

/// Random Clifford circuits (occasionally two-branch mixtures) on 1–4
/// qubits measured with random signed local Paulis; the exact stabilizer
/// table must match the dense Born table within `1e-12`.
pub fn oracle_equivalence_suite(cases: usize, seed: u64, exec: Execution) -> Result<SuiteReport> {
    let idx: Vec<usize> = (0..cases).collect();
    let results = exec.map(&idx, |&k| {
        let mut rng = rng_for(seed, k);
        oracle_case(1 + k % 4, &mut rng).map(|f| f.map(|msg| format!("case {k}: {msg}")))
    });
    collect("oracle-equivalence", results)
}

fn oracle_case(n: usize, rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (t1, psi1) = random_clifford(n, rng)?;
    let (ensemble, rho) = if rng.gen_bool(0.3) {
        let (t2, psi2) = random_clifford(n, rng)?;
        let e = StabilizerEnsemble::new(vec![(Rational::new(1, 3), t1), (Rational::new(2, 3), t2)])?;
        (e, DensityOperator::mixture(&[(1.0 / 3.0, &psi1), (2.0 / 3.0, &psi2)])?)
    } else {
        (StabilizerEnsemble::pure(t1), psi1.density())
    };
    let mut specs = Vec::with_capacity(n);
    let mut observables = Vec::with_capacity(n);
    for q in 0..n {
        let count = rng.gen_range(1..=2);
        let mut sp = Vec::new();
        let mut ob = Vec::new();
        for _ in 0..count {
            let letter = *['X', 'Y', 'Z'].choose(rng).expect("nonempty");
            let negative = rng.gen_bool(0.5);
            let sign = if negative { -1.0 } else { 1.0 };
            sp.push(PauliSpec { negative, letters: vec![(q, letter)] });
            ob.push(gates::pauli(letter).expect("Pauli letter") * num_complex::Complex64::new(sign, 0.0));
        }
        specs.push(sp);
        observables.push(ob);
    }
    let exact = stabilizer::born_table_stabilizer(&ensemble, &PartyLayout::one_qubit_each(n), &specs)?;
    let dense = quantum::born_table(&rho, &MeasurementFamily::from_observables(observables)?)?;
    if !exact.validate().is_valid() || !dense.validate().is_valid() {
        return Ok(Some("a Born table fails validation".into()));
    }
    let diff = exact.to_f64().max_abs_diff(&dense);
    if diff > 1e-12 {
        return Ok(Some(format!("{n} qubits: tables differ by {diff:e}")));
    }
    Ok(None)
}

// ------------------------------------------------- bipartition consistency

/// Values of one tripartite consistency case.
#[derive(Debug, Clone)]
pub struct CutBounds {
    pub p_l: Rational,
    pub per_cut: Vec<Rational>,
    pub p_ns: Rational,
}

/// Solves the local, three bipartition and the full hybrid LPs for `b`;
/// every dual certificate and reconstruction is re-checked.
pub fn cut_bounds(b: &Behavior<Rational>, caps: Caps) -> Result<std::result::Result<CutBounds, String>> {
    let (p, r) = epr2::local_fraction(b, caps)?;
    if !p.check_dual_certificate(&r) || !p.check_reconstruction(&r) {
        return Ok(Err("local LP certificate does not verify".into()));
    }
    let mut per_cut = Vec::new();
    for cut in bipartitions(3)? {
        let (p, c) = epr2::bipartition_local_fraction(b, &cut, caps)?;
        if !p.check_dual_certificate(&c) || !p.check_reconstruction(&c) {
            return Ok(Err(format!("cut {cut} certificate does not verify")));
        }
        per_cut.push(c.model_weight);
    }
    let (p, s) = epr2::svetlichny_decomposition(b, caps)?;
    if !p.check_dual_certificate(&s) || !p.check_reconstruction(&s) {
        return Ok(Err("hybrid LP certificate does not verify".into()));
    }
    Ok(Ok(CutBounds { p_l: r.model_weight, per_cut, p_ns: s.p_ns }))
}

/// Random tripartite behaviors: `1 − p_NS ≤ Σ_cuts p_L^{A:B}` and
/// `p_L ≤ min_cut p_L^{A:B}`, exactly.
pub fn theorem2_consistency_suite(cases: usize, seed: u64, exec: Execution) -> Result<SuiteReport> {
    let caps = Caps::default();
    let pool = sample::tripartite_pool(caps)?;
    let idx: Vec<usize> = (0..cases).collect();
    let results = exec.map(&idx, |&k| {
        let mut rng = rng_for(seed, k);
        let b = sample::random_tripartite(&pool, &mut rng)?;
        let v = match cut_bounds(&b, caps)? {
            Ok(v) => v,
            Err(msg) => return Ok(Some(format!("case {k}: {msg}"))),
        };
        let sum: Rational = v.per_cut.iter().sum();
        let min = v.per_cut.iter().min().cloned().expect("three cuts");
        if Rational::one() - &v.p_ns > sum {
            return Ok(Some(format!("case {k}: 1 - p_NS = {} exceeds the cut sum {sum}", Rational::one() - &v.p_ns)));
        }
        if v.p_l > min {
            return Ok(Some(format!("case {k}: p_L = {} exceeds min cut {min}", v.p_l)));
        }
        Ok(None)
    });
    collect("theorem2-consistency", results)
}
