//! File formats: behaviors, states, measurement families, graphs, protocols,
//! vertex sets, decomposition results, certificates and sweep tables.
//!
//! Parse errors carry the line of the offending JSON token where one exists.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::certify::{Certificate, SweepRow};
use crate::epr2::{DecompositionResult, NumericMode, LOCAL};
use crate::error::{Error, Result};
use crate::polytope::{self, Caps, VertexMethod, VertexSet};
use crate::quantum::{DensityOperator, Matrix, MeasurementFamily, PureState};
use crate::scalar::{Rational, Scalar};
use crate::scenario::{Behavior, Scenario, ValidationReport};
use crate::stabilizer::Protocol;

/// Environment variable naming the vertex-set cache directory.
pub const CACHE_ENV: &str = "NONLOC_CACHE_DIR";

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

fn schema(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
    Error::Schema { line: Some(e.line()), message: format!("{msg} (column {})", e.column()) }
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(schema)
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Line (1-based) of the `k`-th object inside the top-level `"table"` array.
fn table_entry_line(text: &str, k: usize) -> Option<usize> {
    let start = text.find("\"table\"")?;
    let open = start + text[start..].find('[')?;
    let (mut depth, mut in_str, mut escaped, mut seen) = (0usize, false, false, 0usize);
    for (off, ch) in text[open..].char_indices() {
        if in_str {
            match ch {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match ch {
            '"' => in_str = true,
            '[' | '{' => {
                if ch == '{' && depth == 1 {
                    if seen == k {
                        let pos = open + off;
                        return Some(text[..pos].matches('\n').count() + 1);
                    }
                    seen += 1;
                }
                depth += 1;
            }
            ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return None;
                }
            }
            _ => {}
        }
    }
    None
}

// ---------------------------------------------------------------- behaviors

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

impl From<&Scenario> for RawScenario {
    fn from(sc: &Scenario) -> Self {
        RawScenario { settings: sc.settings().to_vec(), outcomes: sc.outcomes().to_vec() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    Rational,
    Float,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawProb {
    Text(String),
    Number(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    x: Vec<usize>,
    a: Vec<usize>,
    p: RawProb,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBehavior {
    scenario: RawScenario,
    mode: RawMode,
    table: Vec<RawEntry>,
}

#[derive(Serialize)]
struct EntryOut<'a, S> {
    x: Vec<usize>,
    a: Vec<usize>,
    p: &'a S,
}

#[derive(Serialize)]
struct BehaviorOut<'a, S> {
    scenario: RawScenario,
    mode: NumericMode,
    table: Vec<EntryOut<'a, S>>,
}

/// A behavior loaded from disk in whichever mode the file declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyBehavior {
    Rational(Behavior<Rational>),
    Float(Behavior<f64>),
}

impl AnyBehavior {
    pub fn scenario(&self) -> &Scenario {
        match self {
            AnyBehavior::Rational(b) => b.scenario(),
            AnyBehavior::Float(b) => b.scenario(),
        }
    }

    pub fn mode(&self) -> NumericMode {
        match self {
            AnyBehavior::Rational(_) => NumericMode::Rational,
            AnyBehavior::Float(_) => NumericMode::Float,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            AnyBehavior::Rational(b) => b.validate(),
            AnyBehavior::Float(b) => b.validate(),
        }
    }

    pub fn to_f64(&self) -> Behavior<f64> {
        match self {
            AnyBehavior::Rational(b) => b.to_f64(),
            AnyBehavior::Float(b) => b.clone(),
        }
    }

    /// Exact view; float tables are converted entrywise to fractions with
    /// denominator at most 10^6 (within 1e-15) and rejected when an entry
    /// has no such form or the converted table is not exactly valid.
    pub fn to_rational(&self) -> Result<Behavior<Rational>> {
        match self {
            AnyBehavior::Rational(b) => Ok(b.clone()),
            AnyBehavior::Float(b) => {
                let table = b
                    .table()
                    .iter()
                    .map(|&v| {
                        Rational::approximate_bounded(v, 1_000_000, 1e-15)
                            .ok_or_else(|| Error::invalid(format!("{v} has no exact rational form")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let exact = Behavior::from_table(b.scenario().clone(), table)?;
                if !exact.validate().is_valid() {
                    return Err(Error::invalid("table is not exactly normalized and no-signaling after rational conversion"));
                }
                Ok(exact)
            }
        }
    }

    pub fn with_tolerance(self, eps: f64) -> Self {
        match self {
            AnyBehavior::Float(b) => AnyBehavior::Float(b.with_tolerance(eps)),
            other => other,
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyBehavior::Rational(b) => behavior_json(b),
            AnyBehavior::Float(b) => behavior_json(b),
        }
    }
}

/// Behavior file text; entries in canonical order.
pub fn behavior_json<S: Scalar + Serialize>(b: &Behavior<S>) -> String {
    to_pretty(&behavior_value(b))
}

pub fn behavior_value<S: Scalar + Serialize>(b: &Behavior<S>) -> Value {
    let sc = b.scenario();
    let n_out = sc.num_outcome_tuples();
    let table = b
        .table()
        .iter()
        .enumerate()
        .map(|(i, p)| EntryOut { x: sc.settings_of(i / n_out), a: sc.outcomes_of(i % n_out), p })
        .collect();
    serde_json::to_value(BehaviorOut { scenario: sc.into(), mode: NumericMode::of::<S>(), table })
        .expect("serializable behavior")
}

pub fn parse_behavior(text: &str) -> Result<AnyBehavior> {
    let raw: RawBehavior = from_json(text)?;
    let sc = Scenario::new(raw.scenario.settings, raw.scenario.outcomes)?;
    let at = |k: usize, msg: String| Error::Schema {
        line: table_entry_line(text, k),
        message: format!("table entry {k}: {msg}"),
    };
    let mut slots: Vec<Option<(usize, RawProb)>> = (0..sc.table_len()).map(|_| None).collect();
    for (k, e) in raw.table.into_iter().enumerate() {
        let m = sc.parties();
        if e.x.len() != m || e.a.len() != m {
            return Err(at(k, format!("x and a need {m} components")));
        }
        for p in 0..m {
            if e.x[p] >= sc.settings()[p] {
                return Err(at(k, format!("setting {} out of range for party {p}", e.x[p])));
            }
            if e.a[p] >= sc.outcomes()[p] {
                return Err(at(k, format!("outcome {} out of range for party {p}", e.a[p])));
            }
        }
        let idx = sc.index(&e.x, &e.a);
        if let Some((first, _)) = &slots[idx] {
            return Err(Error::Structural(format!(
                "entry x={:?} a={:?} appears twice (entries {first} and {k}, line {})",
                e.x,
                e.a,
                table_entry_line(text, k).map_or("?".to_string(), |l| l.to_string())
            )));
        }
        slots[idx] = Some((k, e.p));
    }
    if let Some(missing) = slots.iter().position(Option::is_none) {
        let n_out = sc.num_outcome_tuples();
        return Err(Error::Structural(format!(
            "missing entry x={:?} a={:?} ({} of {} entries present)",
            sc.settings_of(missing / n_out),
            sc.outcomes_of(missing % n_out),
            slots.iter().filter(|s| s.is_some()).count(),
            slots.len()
        )));
    }
    let slots = slots.into_iter().flatten();
    match raw.mode {
        RawMode::Rational => {
            let table = slots
                .map(|(k, p)| match p {
                    RawProb::Text(s) => s.parse::<Rational>().map_err(|e| at(k, e.to_string())),
                    RawProb::Number(v) if v.is_finite() && v.fract() == 0.0 => Ok(Rational::from_i64(v as i64)),
                    RawProb::Number(v) => Err(at(k, format!("rational mode needs \"p/q\" strings, got {v}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyBehavior::Rational(Behavior::from_table(sc, table)?))
        }
        RawMode::Float => {
            let table = slots
                .map(|(k, p)| match p {
                    RawProb::Number(v) => Ok(v),
                    RawProb::Text(s) => s
                        .parse::<Rational>()
                        .map(|q| q.to_f64())
                        .or_else(|_| s.trim().parse::<f64>())
                        .map_err(|_| at(k, format!("{s:?} is not a number"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyBehavior::Float(Behavior::from_table(sc, table)?))
        }
    }
}

// ----------------------------------------------------------- dense states

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<RawMatrix>,
}

/// A state file holds either amplitudes or a density matrix.
#[derive(Debug, Clone)]
pub enum AnyState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl AnyState {
    pub fn density(&self) -> DensityOperator {
        match self {
            AnyState::Pure(s) => s.density(),
            AnyState::Mixed(d) => d.clone(),
        }
    }
}

fn matrix_from_rows(rows: &RawMatrix, what: &str) -> Result<Matrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Schema { line: None, message: format!("{what} must be a nonempty square matrix") });
    }
    Ok(Matrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn matrix_to_rows(m: &Matrix) -> RawMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn parse_state(text: &str) -> Result<AnyState> {
    let raw: RawState = from_json(text)?;
    match (raw.amplitudes, raw.density) {
        (Some(amps), None) => Ok(AnyState::Pure(PureState::new(
            amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            raw.dims,
        )?)),
        (None, Some(rows)) => Ok(AnyState::Mixed(DensityOperator::new(matrix_from_rows(&rows, "density")?, raw.dims)?)),
        _ => Err(Error::Schema { line: None, message: "state needs exactly one of `amplitudes` or `density`".into() }),
    }
}

pub fn state_json(s: &PureState) -> String {
    let amplitudes = s.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    to_pretty(&RawState { dims: s.dims().to_vec(), amplitudes: Some(amplitudes), density: None })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasurements {
    /// party → setting → effect → matrix rows of `[re, im]`.
    parties: Vec<Vec<Vec<RawMatrix>>>,
}

pub fn parse_measurements(text: &str) -> Result<MeasurementFamily> {
    let raw: RawMeasurements = from_json(text)?;
    let parties = raw
        .parties
        .iter()
        .enumerate()
        .map(|(p, settings)| {
            settings
                .iter()
                .enumerate()
                .map(|(x, effects)| {
                    effects
                        .iter()
                        .map(|e| matrix_from_rows(e, &format!("party {p} setting {x} effect")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementFamily::new(parties)
}

pub fn measurements_json(m: &MeasurementFamily) -> String {
    let parties = m
        .settings()
        .iter()
        .map(|settings| settings.iter().map(|effects| effects.iter().map(matrix_to_rows).collect()).collect())
        .collect();
    to_pretty(&RawMeasurements { parties })
}

// ------------------------------------------------------ graphs, protocols

/// Adjacency list: `neighbors[v]` lists the vertices adjacent to `v`.
pub fn parse_graph(text: &str) -> Result<Vec<Vec<bool>>> {
    let neighbors: Vec<Vec<usize>> = from_json(text)?;
    let n = neighbors.len();
    let mut adj = vec![vec![false; n]; n];
    for (v, ws) in neighbors.iter().enumerate() {
        for &w in ws {
            if w >= n {
                return Err(Error::invalid(format!("vertex {v} lists neighbor {w}, but there are only {n} vertices")));
            }
            adj[v][w] = true;
        }
    }
    for v in 0..n {
        for w in 0..n {
            if adj[v][w] != adj[w][v] {
                return Err(Error::invalid(format!("edge {v}-{w} is listed in one direction only")));
            }
        }
    }
    Ok(adj)
}

pub fn graph_json(adj: &[Vec<bool>]) -> String {
    let neighbors: Vec<Vec<usize>> =
        adj.iter().map(|row| row.iter().enumerate().filter(|(_, &e)| e).map(|(w, _)| w).collect()).collect();
    let mut s = serde_json::to_string(&neighbors).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_protocol(text: &str) -> Result<Protocol> {
    from_json(text)
}

pub fn protocol_json(p: &Protocol) -> String {
    to_pretty(p)
}

// ------------------------------------------------------------ vertex sets

const ORDER_NOTE: &str = "settings tuple outer, outcomes tuple inner, party 0 most significant";

pub fn vertex_set_json(v: &VertexSet) -> String {
    let deterministic = v
        .vertices
        .iter()
        .filter(|b| b.table().iter().all(|p| p.is_zero() || *p == Rational::one()))
        .count();
    to_pretty(&json!({
        "provenance": {
            "scenario": RawScenario::from(&v.scenario),
            "method": v.method,
            "cut": v.cut.as_ref().map(|c| c.label()),
            "count": v.len(),
            "deterministic": deterministic,
            "order": ORDER_NOTE,
        },
        "vertices": v.vertices.iter().map(|b| b.table()).collect::<Vec<_>>(),
    }))
}

#[derive(Deserialize)]
struct RawProvenance {
    scenario: RawScenario,
    method: VertexMethod,
    cut: Option<String>,
    count: usize,
}

#[derive(Deserialize)]
struct RawVertexSet {
    provenance: RawProvenance,
    vertices: Vec<Vec<Rational>>,
}

/// Reads a vertex export. Hybrid sets are not reloaded (their cut label is
/// informational only).
pub fn parse_vertex_set(text: &str) -> Result<VertexSet> {
    let raw: RawVertexSet = from_json(text)?;
    if raw.provenance.cut.is_some() || raw.provenance.method == VertexMethod::Hybrid {
        return Err(Error::invalid("hybrid vertex exports cannot be reloaded"));
    }
    if raw.provenance.count != raw.vertices.len() {
        return Err(Error::Structural(format!(
            "header says {} vertices, file has {}",
            raw.provenance.count,
            raw.vertices.len()
        )));
    }
    let sc = Scenario::new(raw.provenance.scenario.settings, raw.provenance.scenario.outcomes)?;
    let vertices = raw
        .vertices
        .into_iter()
        .map(|t| Behavior::from_table(sc.clone(), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexSet { scenario: sc, method: raw.provenance.method, cut: None, vertices })
}

/// Content address of a scenario's vertex set.
pub fn scenario_key(sc: &Scenario, method: VertexMethod) -> String {
    let canon = json!({ "method": method, "settings": sc.settings(), "outcomes": sc.outcomes() });
    hex::encode(Sha256::digest(canon.to_string().as_bytes()))
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|s| !s.is_empty()).map(PathBuf::from)
}

/// [`polytope::ns_polytope_vertices`] backed by the `NONLOC_CACHE_DIR`
/// cache when that variable is set. Entries that fail to parse or validate
/// are recomputed and overwritten.
pub fn cached_ns_vertices(sc: &Scenario, caps: Caps) -> Result<VertexSet> {
    let Some(dir) = cache_dir() else {
        return polytope::ns_polytope_vertices(sc, caps);
    };
    if sc.table_len() > caps.ns_table_cap {
        return polytope::ns_polytope_vertices(sc, caps);
    }
    let path = dir.join(format!("ns-{}.json", scenario_key(sc, VertexMethod::NoSignaling)));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(vs) = parse_vertex_set(&text) {
            let sound = vs.scenario == *sc
                && vs.method == VertexMethod::NoSignaling
                && !vs.is_empty()
                && vs.vertices.iter().all(|v| v.validate().is_valid());
            if sound {
                return Ok(vs);
            }
        }
    }
    let vs = polytope::ns_polytope_vertices(sc, caps)?;
    // a read-only or missing cache directory only costs recomputation
    let _ = write_atomic(&path, &vertex_set_json(&vs));
    Ok(vs)
}

// ---------------------------------------------------------------- results

/// Result document: `values` (p_L, per-cut weights, p_NS), sparse primal
/// weights, the dual functional, mode and status.
pub fn result_value<S: Scalar + Serialize>(r: &DecompositionResult<S>, dual_verified: bool) -> Value {
    let per_cut: serde_json::Map<String, Value> = r
        .family_weights
        .iter()
        .filter(|(l, _)| l != LOCAL)
        .map(|(l, w)| (l.clone(), json!(w)))
        .collect();
    json!({
        "values": {
            "p_L": r.weight_of(LOCAL),
            "per_cut": per_cut,
            "p_NS": r.p_ns,
        },
        "primal": r.primal,
        "dual": {
            "coefficients": r.dual.coefficients,
            "model_bound": r.dual.model_bound,
            "value": r.dual.value,
            "verified": dual_verified,
        },
        "mode": r.mode,
        "status": r.status,
    })
}

pub fn result_json<S: Scalar + Serialize>(r: &DecompositionResult<S>, dual_verified: bool) -> String {
    to_pretty(&result_value(r, dual_verified))
}

// ----------------------------------------------------------- certificates

pub fn certificate_json(c: &Certificate) -> String {
    to_pretty(c)
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    from_json(text)
}

// ------------------------------------------------------------------ sweeps

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("N,p_L\n");
    for r in rows {
        out.push_str(&format!("{},{:.12}\n", r.n, r.p_l));
    }
    out
}
