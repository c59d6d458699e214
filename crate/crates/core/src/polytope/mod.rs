//! Vertex sets of the local, no-signaling and bipartition-hybrid
//! correlation polytopes.

pub mod dd;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::scenario::{boxes, Behavior, Bipartition, Scenario};

pub use crate::scenario::bipartitions;

/// Default cap on the number of deterministic vertices.
pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;
/// Default cap on the table dimension handed to double description.
pub const DEFAULT_NS_TABLE_CAP: usize = 36;

/// A local deterministic strategy: `outputs[p][x]` is party `p`'s outcome
/// when it receives setting `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub outputs: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn behavior<S: Scalar>(&self, sc: &Scenario) -> Behavior<S> {
        boxes::deterministic(sc, &self.outputs)
    }
}

/// How a vertex set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexMethod {
    LocalDeterministic,
    NoSignaling,
    Hybrid,
}

/// Duplicate-free list of exact extreme points of one polytope.
#[derive(Debug, Clone)]
pub struct VertexSet {
    pub scenario: Scenario,
    pub method: VertexMethod,
    /// Present for hybrid sets.
    pub cut: Option<Bipartition>,
    pub vertices: Vec<Behavior<Rational>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn dedup(mut self) -> Self {
        let mut seen = HashSet::new();
        self.vertices.retain(|v| seen.insert(v.table().to_vec()));
        self
    }

    pub fn contains(&self, b: &Behavior<Rational>) -> bool {
        self.vertices.iter().any(|v| v == b)
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    pub vertex_cap: usize,
    pub ns_table_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { vertex_cap: DEFAULT_VERTEX_CAP, ns_table_cap: DEFAULT_NS_TABLE_CAP }
    }
}

/// Number of deterministic strategies, `Π_i o_i^{s_i}`, saturating.
pub fn deterministic_count(sc: &Scenario) -> u128 {
    sc.settings()
        .iter()
        .zip(sc.outcomes())
        .fold(1u128, |acc, (&s, &o)| acc.saturating_mul((o as u128).saturating_pow(s as u32)))
}

/// All deterministic strategies in lexicographic order (party 0, setting 0
/// most significant).
pub fn deterministic_strategies(sc: &Scenario, cap: usize) -> Result<Vec<DeterministicStrategy>> {
    let count = deterministic_count(sc);
    if count > cap as u128 {
        return Err(Error::cap("local deterministic vertex count", count, cap));
    }
    let slots: Vec<(usize, usize)> = sc
        .settings()
        .iter()
        .enumerate()
        .flat_map(|(p, &s)| (0..s).map(move |x| (p, x)))
        .collect();
    let radix: Vec<usize> = slots.iter().map(|&(p, _)| sc.outcomes()[p]).collect();
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; slots.len()];
    loop {
        let mut outputs: Vec<Vec<usize>> = sc.settings().iter().map(|&s| vec![0; s]).collect();
        for (k, &(p, x)) in slots.iter().enumerate() {
            outputs[p][x] = digits[k];
        }
        out.push(DeterministicStrategy { outputs });
        // increment, last slot least significant
        let mut k = slots.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
        }
    }
}

pub fn local_deterministic_vertices(sc: &Scenario, caps: Caps) -> Result<VertexSet> {
    let vertices = deterministic_strategies(sc, caps.vertex_cap)?
        .iter()
        .map(|s| s.behavior(sc))
        .collect();
    Ok(VertexSet { scenario: sc.clone(), method: VertexMethod::LocalDeterministic, cut: None, vertices })
}

/// Normalization and no-signaling equalities of a scenario, as sparse rows
/// over the canonical table index.
pub fn ns_equalities(sc: &Scenario) -> Vec<dd::Equality> {
    let n_out = sc.num_outcome_tuples();
    let mut eqs = Vec::new();
    for xi in 0..sc.num_setting_tuples() {
        let row = (0..n_out).map(|ai| (xi * n_out + ai, Rational::one())).collect();
        eqs.push((row, Rational::one()));
    }
    let m = sc.parties();
    if m < 2 {
        return eqs;
    }
    for k in 0..m {
        for xi in 0..sc.num_setting_tuples() {
            let x = sc.settings_of(xi);
            if x[k] == 0 {
                continue;
            }
            let mut x0 = x.clone();
            x0[k] = 0;
            let x0i = sc.setting_index(&x0);
            // one row per outcome assignment of the other parties
            let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
            for ai in 0..n_out {
                let mut a = sc.outcomes_of(ai);
                a.remove(k);
                groups.entry(a).or_default().push(ai);
            }
            for members in groups.values() {
                let mut row = Vec::with_capacity(2 * members.len());
                for &ai in members {
                    row.push((xi * n_out + ai, Rational::one()));
                    row.push((x0i * n_out + ai, -Rational::one()));
                }
                eqs.push((row, Rational::zero()));
            }
        }
    }
    eqs
}

/// Extreme points of the no-signaling polytope by exact double description.
pub fn ns_polytope_vertices(sc: &Scenario, caps: Caps) -> Result<VertexSet> {
    let dim = sc.table_len();
    if dim > caps.ns_table_cap {
        return Err(Error::cap("scenario too large for V-enumeration: table dimension", dim, caps.ns_table_cap));
    }
    let points = dd::enumerate_vertices(dim, &ns_equalities(sc))?;
    let mut vertices = points
        .into_iter()
        .map(|p| Behavior::from_table(sc.clone(), p))
        .collect::<Result<Vec<_>>>()?;
    // deterministic points first, then the rest, each in table order
    vertices.sort_by(|a, b| {
        let da = a.table().iter().all(|v| v.is_zero() || *v == Rational::one());
        let db = b.table().iter().all(|v| v.is_zero() || *v == Rational::one());
        db.cmp(&da).then_with(|| b.table().cmp(a.table()))
    });
    Ok(VertexSet { scenario: sc.clone(), method: VertexMethod::NoSignaling, cut: None, vertices }.dedup())
}

/// Products `(NS vertex of block A) ⊗ (NS vertex of block B)`, embedded in
/// the full scenario's party order.
pub fn hybrid_vertices(sc: &Scenario, cut: &Bipartition, caps: Caps) -> Result<VertexSet> {
    let side_a = crate::io::cached_ns_vertices(&sc.restrict(cut.block_a())?, caps)?;
    let side_b = crate::io::cached_ns_vertices(&sc.restrict(cut.block_b())?, caps)?;
    hybrid_from_sides(sc, cut, &side_a, &side_b, caps)
}

/// As [`hybrid_vertices`] with precomputed side vertex sets.
pub fn hybrid_from_sides(
    sc: &Scenario,
    cut: &Bipartition,
    side_a: &VertexSet,
    side_b: &VertexSet,
    caps: Caps,
) -> Result<VertexSet> {
    if cut.parties() != sc.parties() {
        return Err(Error::DimensionMismatch(format!(
            "bipartition of {} parties on a {}-party scenario",
            cut.parties(),
            sc.parties()
        )));
    }
    let count = side_a.len() as u128 * side_b.len() as u128;
    if count > caps.vertex_cap as u128 {
        return Err(Error::cap("hybrid vertex count", count, caps.vertex_cap));
    }
    let concat: Vec<usize> = cut.block_a().iter().chain(cut.block_b()).copied().collect();
    let mut order = vec![0; sc.parties()];
    for (pos, &p) in concat.iter().enumerate() {
        order[p] = pos;
    }
    let mut vertices = Vec::with_capacity(count as usize);
    for va in &side_a.vertices {
        for vb in &side_b.vertices {
            vertices.push(va.tensor(vb)?.permute_parties(&order)?);
        }
    }
    Ok(VertexSet { scenario: sc.clone(), method: VertexMethod::Hybrid, cut: Some(cut.clone()), vertices }.dedup())
}

/// Rank test: `b` is a vertex of the no-signaling polytope iff the
/// equalities together with the constraints `p_e = 0` on its zero entries
/// have full rank.
pub fn is_ns_vertex(b: &Behavior<Rational>) -> bool {
    if !b.validate().is_valid() {
        return false;
    }
    let sc = b.scenario();
    let dim = sc.table_len();
    let mut rows: Vec<Vec<Rational>> = ns_equalities(sc)
        .into_iter()
        .map(|(coeffs, _)| {
            let mut r = vec![Rational::zero(); dim];
            for (j, v) in coeffs {
                r[j] += v;
            }
            r
        })
        .collect();
    for (e, v) in b.table().iter().enumerate() {
        if v.is_zero() {
            let mut r = vec![Rational::zero(); dim];
            r[e] = Rational::one();
            rows.push(r);
        }
    }
    dd::rank(rows) == dim
}
