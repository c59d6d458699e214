//! EPR-2 decompositions as linear programs.
//!
//! For a target table `b` and model columns `V_j` (local deterministic or
//! bipartition-hybrid vertices) the solver maximizes `Σ_j w_j` subject to
//! `Σ_j w_j V_j ≤ b` entrywise and `w ≥ 0`. The slack `b − Σ_j w_j V_j`,
//! renormalized, is the no-signaling remainder: it is automatically
//! normalized and no-signaling because `b` and every `V_j` are.
//!
//! The LP dual is a nonnegative functional `y` on table entries with
//! `y·V_j ≥ 1` for every column and `y·b` equal to the optimum. That pair
//! of facts is a self-contained proof of optimality (weak duality), so it is
//! emitted as the certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation};
use crate::par::Execution;
use crate::polytope::{self, Caps, VertexSet};
use crate::scalar::Scalar;
use crate::scenario::{bipartitions, Behavior, Bipartition};

/// Label used for the fully local family.
pub const LOCAL: &str = "local";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    Rational,
    Float,
}

impl NumericMode {
    pub fn of<S: Scalar>() -> Self {
        if S::EXACT { NumericMode::Rational } else { NumericMode::Float }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionStatus {
    Optimal,
    InfeasibleInput,
    CapExceeded,
}

/// One family of model columns with the label its weight is reported under.
#[derive(Debug, Clone)]
pub struct ModelFamily {
    pub label: String,
    pub vertices: VertexSet,
}

impl ModelFamily {
    pub fn local(vertices: VertexSet) -> Self {
        ModelFamily { label: LOCAL.to_string(), vertices }
    }

    pub fn hybrid(cut: &Bipartition, vertices: VertexSet) -> Self {
        ModelFamily { label: cut.label(), vertices }
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionProblem<S> {
    pub target: Behavior<S>,
    pub families: Vec<ModelFamily>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimalWeight<S> {
    pub family: String,
    pub vertex: usize,
    pub weight: S,
}

/// Bell-type functional proving the optimum: `coefficients ≥ 0`, every
/// model vertex scores at least `model_bound`, the target scores `value`.
#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate<S> {
    pub coefficients: Vec<S>,
    pub model_bound: S,
    pub value: S,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult<S> {
    pub status: DecompositionStatus,
    pub mode: NumericMode,
    /// `(family label, total weight)` in problem order.
    pub family_weights: Vec<(String, S)>,
    /// Total model weight `1 − p_NS`.
    pub model_weight: S,
    pub p_ns: S,
    pub primal: Vec<PrimalWeight<S>>,
    pub dual: DualCertificate<S>,
    /// Normalized remainder, present when `p_ns > 0`.
    #[serde(skip)]
    pub residual: Option<Behavior<S>>,
    pub pivots: usize,
}

impl<S: Scalar> DecompositionResult<S> {
    pub fn weight_of(&self, label: &str) -> Option<&S> {
        self.family_weights.iter().find(|(l, _)| l == label).map(|(_, w)| w)
    }
}

impl<S: Scalar> DecompositionProblem<S> {
    pub fn new(target: Behavior<S>, families: Vec<ModelFamily>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::invalid("decomposition needs at least one model family"));
        }
        for f in &families {
            if f.vertices.scenario != *target.scenario() {
                return Err(Error::DimensionMismatch(format!(
                    "family {} lives on a different scenario than the target",
                    f.label
                )));
            }
        }
        Ok(DecompositionProblem { target, families })
    }

    fn columns(&self) -> impl Iterator<Item = (usize, usize, &Behavior<crate::Rational>)> {
        self.families
            .iter()
            .enumerate()
            .flat_map(|(fi, f)| f.vertices.vertices.iter().enumerate().map(move |(vi, v)| (fi, vi, v)))
    }

    pub fn solve(&self) -> Result<DecompositionResult<S>> {
        let report = self.target.validate();
        if !report.is_valid() {
            return Err(Error::invalid(format!(
                "target behavior is not a valid no-signaling table ({} violations, max residual {:e})",
                report.violations.len(),
                report.max_residual()
            )));
        }
        let eps = self.target.tolerance();
        let cols: Vec<_> = self.columns().collect();
        let n = cols.len();
        let dim = self.target.scenario().table_len();

        // row e: Σ_j V_j[e] w_j ≤ b[e]
        let mut rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); dim];
        for (j, (_, _, v)) in cols.iter().enumerate() {
            for (e, val) in v.table().iter().enumerate() {
                if !val.is_zero() {
                    rows[e].push((j, S::from_rational(val)));
                }
            }
        }
        let mut lp = LinearProgram::new(n, vec![S::one(); n]);
        for (e, coeffs) in rows.into_iter().enumerate() {
            let rhs = self.target.table()[e].clone();
            // tiny negative float entries are treated as zero
            let rhs = if rhs.negative(0.0) { S::zero() } else { rhs };
            lp.add(coeffs, Relation::Le, rhs);
        }
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Lp("reported an infeasible decomposition".into())),
            LpStatus::Unbounded => return Err(Error::Lp("reported an unbounded decomposition".into())),
        }

        let mut family_weights: Vec<(String, S)> =
            self.families.iter().map(|f| (f.label.clone(), S::zero())).collect();
        let mut primal = Vec::new();
        let mut reconstructed = vec![S::zero(); dim];
        for (j, w) in sol.primal.iter().enumerate() {
            if w.near_zero(if S::EXACT { 0.0 } else { 1e-15 }) {
                continue;
            }
            let (fi, vi, v) = cols[j];
            family_weights[fi].1 += w.clone();
            for (r, val) in reconstructed.iter_mut().zip(v.table()) {
                if !val.is_zero() {
                    *r += w.clone() * &S::from_rational(val);
                }
            }
            primal.push(PrimalWeight { family: self.families[fi].label.clone(), vertex: vi, weight: w.clone() });
        }
        let model_weight = sol.value.clone();
        let p_ns = S::one() - &model_weight;
        let residual = if p_ns.positive(eps) {
            let table: Vec<S> = self
                .target
                .table()
                .iter()
                .zip(&reconstructed)
                .map(|(b, r)| (b.clone() - r) / &p_ns)
                .collect();
            Some(Behavior::from_table(self.target.scenario().clone(), table)?.with_tolerance(self.target.tolerance()))
        } else {
            None
        };
        let coefficients: Vec<S> = sol
            .dual
            .iter()
            .map(|y| if !S::EXACT && y.negative(0.0) { S::zero() } else { y.clone() })
            .collect();
        let value = dot(&coefficients, self.target.table());
        Ok(DecompositionResult {
            status: DecompositionStatus::Optimal,
            mode: NumericMode::of::<S>(),
            family_weights,
            model_weight,
            p_ns,
            primal,
            dual: DualCertificate { coefficients, model_bound: S::one(), value },
            residual,
            pivots: sol.pivots,
        })
    }

    /// Re-evaluates `certificate` against every model vertex and the target.
    pub fn check_dual_certificate(&self, result: &DecompositionResult<S>) -> bool {
        let eps = if S::EXACT { 0.0 } else { self.target.tolerance().max(1e-9) };
        let cert = &result.dual;
        if cert.coefficients.len() != self.target.scenario().table_len() {
            return false;
        }
        if cert.coefficients.iter().any(|c| c.negative(eps)) {
            return false;
        }
        for (_, _, v) in self.columns() {
            let score: S = cert
                .coefficients
                .iter()
                .zip(v.table())
                .filter(|(_, val)| !val.is_zero())
                .map(|(c, val)| c.clone() * &S::from_rational(val))
                .sum();
            if (score - &cert.model_bound).negative(eps) {
                return false;
            }
        }
        let value = dot(&cert.coefficients, self.target.table());
        // the functional proves model weight ≤ value / model_bound
        let bound = value.clone() / &cert.model_bound;
        (bound.clone() - &result.model_weight).near_zero(eps) && (cert.value.clone() - &value).near_zero(eps)
    }

    /// Checks `Σ w·V + p_NS·R = target` and that `R` is a valid behavior.
    pub fn check_reconstruction(&self, result: &DecompositionResult<S>) -> bool {
        let eps = if S::EXACT { 0.0 } else { 1e-7 };
        let dim = self.target.scenario().table_len();
        let mut acc = vec![S::zero(); dim];
        for pw in &result.primal {
            let Some(fam) = self.families.iter().find(|f| f.label == pw.family) else {
                return false;
            };
            let Some(v) = fam.vertices.vertices.get(pw.vertex) else {
                return false;
            };
            if pw.weight.negative(eps) {
                return false;
            }
            for (a, val) in acc.iter_mut().zip(v.table()) {
                *a += pw.weight.clone() * &S::from_rational(val);
            }
        }
        if let Some(r) = &result.residual {
            if !r.clone().with_tolerance(eps.max(1e-7)).validate().is_valid() && S::EXACT {
                return false;
            }
            if !S::EXACT && !r.clone().with_tolerance(1e-6).validate().is_valid() {
                return false;
            }
            for (a, rv) in acc.iter_mut().zip(r.table()) {
                *a += result.p_ns.clone() * rv;
            }
        } else if !result.p_ns.near_zero(if S::EXACT { 0.0 } else { self.target.tolerance() }) {
            return false;
        }
        acc.iter().zip(self.target.table()).all(|(a, b)| (a.clone() - b).near_zero(eps))
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x.clone() * y).sum()
}

/// Maximal local weight `p_L` over fully local deterministic models.
pub fn local_fraction<S: Scalar>(b: &Behavior<S>, caps: Caps) -> Result<(DecompositionProblem<S>, DecompositionResult<S>)> {
    let local = polytope::local_deterministic_vertices(b.scenario(), caps)?;
    let problem = DecompositionProblem::new(b.clone(), vec![ModelFamily::local(local)])?;
    let result = problem.solve()?;
    Ok((problem, result))
}

/// Maximal weight `p_L^{A:B}` of hybrid models local across `cut`.
pub fn bipartition_local_fraction<S: Scalar>(
    b: &Behavior<S>,
    cut: &Bipartition,
    caps: Caps,
) -> Result<(DecompositionProblem<S>, DecompositionResult<S>)> {
    let hybrid = polytope::hybrid_vertices(b.scenario(), cut, caps)?;
    let problem = DecompositionProblem::new(b.clone(), vec![ModelFamily::hybrid(cut, hybrid)])?;
    let result = problem.solve()?;
    Ok((problem, result))
}

/// Tripartite decomposition into local, three hybrid families and a
/// genuinely tripartite remainder `p_NS`.
pub fn svetlichny_decomposition<S: Scalar>(
    b: &Behavior<S>,
    caps: Caps,
) -> Result<(DecompositionProblem<S>, DecompositionResult<S>)> {
    let sc = b.scenario();
    if sc.parties() != 3 {
        return Err(Error::invalid(format!("svetlichny decomposition needs 3 parties, got {}", sc.parties())));
    }
    let mut families = vec![ModelFamily::local(polytope::local_deterministic_vertices(sc, caps)?)];
    for cut in bipartitions(3)? {
        families.push(ModelFamily::hybrid(&cut, polytope::hybrid_vertices(sc, &cut, caps)?));
    }
    let problem = DecompositionProblem::new(b.clone(), families)?;
    let result = problem.solve()?;
    Ok((problem, result))
}

/// Problem and solution of one bipartition in a [`cut_scan`].
pub type CutSolve<S> = Result<(DecompositionProblem<S>, DecompositionResult<S>)>;

/// `p_L^{A:B}` for every canonical bipartition, solved independently.
/// A cut whose hybrid vertex set exceeds the caps reports its error in place.
pub fn cut_scan<S: Scalar>(b: &Behavior<S>, caps: Caps, exec: Execution) -> Result<Vec<(Bipartition, CutSolve<S>)>> {
    let cuts = bipartitions(b.scenario().parties())?;
    let results = exec.map(&cuts, |cut| bipartition_local_fraction(b, cut, caps));
    Ok(cuts.into_iter().zip(results).collect())
}
