//! Two-phase primal simplex over a generic [`Scalar`] field.
//!
//! Problems have the form `maximize cᵀx  s.t.  A x (≤ | = | ≥) b,  x ≥ 0`.
//! Exact runs use Bland's rule throughout, so they terminate on degenerate
//! problems; floating runs price by the most negative reduced cost and drop
//! to Bland's rule after a run of degenerate pivots.
//!
//! The tableau is dense but every row update skips the zero entries of the
//! pivot row, which is what keeps the exact path usable on correlation LPs
//! (their columns are 0/1 or small dyadic vectors).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint<S> {
    /// Sparse row: `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub num_vars: usize,
    /// Dense objective (maximized).
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    Bland,
    /// Most negative reduced cost, with a Bland fallback against cycling.
    Dantzig,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub eps: f64,
    pub pricing: Pricing,
    pub max_pivots: usize,
}

impl SimplexOptions {
    pub fn for_scalar<S: Scalar>() -> Self {
        if S::EXACT {
            SimplexOptions { eps: 0.0, pricing: Pricing::Bland, max_pivots: 5_000_000 }
        } else {
            SimplexOptions { eps: 1e-9, pricing: Pricing::Dantzig, max_pivots: 5_000_000 }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub value: S,
    pub primal: Vec<S>,
    /// One multiplier per constraint. For a `≤` row the multiplier is
    /// nonnegative, for `≥` nonpositive, for `=` free; at optimality
    /// `bᵀy = cᵀx` and `Aᵀy ≥ c`.
    pub dual: Vec<S>,
    pub pivots: usize,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(num_vars: usize, objective: Vec<S>) -> Self {
        assert_eq!(objective.len(), num_vars);
        LinearProgram { num_vars, objective, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, S)>, relation: Relation, rhs: S) {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.num_vars));
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution<S>> {
        self.solve_with(SimplexOptions::for_scalar::<S>())
    }

    pub fn solve_with(&self, opts: SimplexOptions) -> Result<LpSolution<S>> {
        Tableau::build(self, opts).run(self)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Original,
    Slack,
    Artificial,
}

struct Tableau<S> {
    opts: SimplexOptions,
    m: usize,
    ncols: usize,
    /// `m` rows of `ncols + 1` entries; last entry is the right-hand side.
    rows: Vec<Vec<S>>,
    /// Reduced costs `c_B B⁻¹ A_j − c_j` followed by the objective value.
    obj: Vec<S>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column that started as `e_i` for row `i`.
    identity_col: Vec<usize>,
    negated: Vec<bool>,
    pivots: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>, opts: SimplexOptions) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let mut kinds = vec![ColKind::Original; n];
        let mut negated = vec![false; m];
        let mut relations = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut rel = c.relation;
            if c.rhs.negative(0.0) {
                negated[i] = true;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            relations.push(rel);
        }
        // column layout: originals, one slack/surplus per inequality, one
        // artificial per ≥/= row
        let mut slack_col = vec![usize::MAX; m];
        let mut art_col = vec![usize::MAX; m];
        let mut next = n;
        for (i, rel) in relations.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_col[i] = next;
                kinds.push(ColKind::Slack);
                next += 1;
            }
        }
        for (i, rel) in relations.iter().enumerate() {
            if *rel != Relation::Le {
                art_col[i] = next;
                kinds.push(ColKind::Artificial);
                next += 1;
            }
        }
        let ncols = next;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut identity_col = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![S::zero(); ncols + 1];
            for (j, v) in &c.coeffs {
                row[*j] += v.clone();
            }
            row[ncols] = c.rhs.clone();
            if negated[i] {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            match relations[i] {
                Relation::Le => {
                    row[slack_col[i]] = S::one();
                    basis.push(slack_col[i]);
                    identity_col.push(slack_col[i]);
                }
                Relation::Ge => {
                    row[slack_col[i]] = -S::one();
                    row[art_col[i]] = S::one();
                    basis.push(art_col[i]);
                    identity_col.push(art_col[i]);
                }
                Relation::Eq => {
                    row[art_col[i]] = S::one();
                    basis.push(art_col[i]);
                    identity_col.push(art_col[i]);
                }
            }
            rows.push(row);
        }
        Tableau {
            opts,
            m,
            ncols,
            rows,
            obj: vec![S::zero(); ncols + 1],
            basis,
            kinds,
            identity_col,
            negated,
            pivots: 0,
        }
    }

    fn run(mut self, lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
        let has_artificial = self.kinds.contains(&ColKind::Artificial);
        if has_artificial {
            let cost: Vec<S> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { -S::one() } else { S::zero() })
                .collect();
            self.price_objective(&cost);
            match self.optimize(true)? {
                LpStatus::Optimal => {}
                other => unreachable!("phase one cannot end {other:?}"),
            }
            if self.obj[self.ncols].negative(self.opts.eps) {
                return Ok(self.finish(LpStatus::Infeasible, lp));
            }
            self.drive_out_artificials();
        }
        let mut cost = lp.objective.clone();
        cost.resize(self.ncols, S::zero());
        self.price_objective(&cost);
        let status = self.optimize(false)?;
        Ok(self.finish(status, lp))
    }

    /// Sets `obj` to the reduced costs of `cost` for the current basis.
    fn price_objective(&mut self, cost: &[S]) {
        let mut obj: Vec<S> = cost.iter().map(|c| -c.clone()).collect();
        obj.push(S::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                if !v.is_zero() {
                    *o += cb.clone() * v;
                }
            }
        }
        self.obj = obj;
    }

    fn can_enter(&self, j: usize, phase_one: bool) -> bool {
        phase_one || self.kinds[j] != ColKind::Artificial
    }

    fn optimize(&mut self, phase_one: bool) -> Result<LpStatus> {
        let eps = self.opts.eps;
        let mut degenerate_run = 0usize;
        loop {
            let use_bland = self.opts.pricing == Pricing::Bland || degenerate_run > 50;
            let entering = if use_bland {
                (0..self.ncols).find(|&j| self.can_enter(j, phase_one) && self.obj[j].negative(eps))
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    if !self.can_enter(j, phase_one) || !self.obj[j].negative(eps) {
                        continue;
                    }
                    let v = self.obj[j].to_f64();
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((j, v));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let Some(row) = self.ratio_test(col) else {
                return Ok(LpStatus::Unbounded);
            };
            if self.rows[row][self.ncols].near_zero(eps) {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
            if self.pivots > self.opts.max_pivots {
                return Err(Error::Lp(format!("exceeded {} pivots", self.opts.max_pivots)));
            }
        }
    }

    /// Minimum-ratio row; ties go to the smallest basic column (Bland).
    fn ratio_test(&self, col: usize) -> Option<usize> {
        let eps = self.opts.eps;
        let mut best: Option<(usize, S)> = None;
        for i in 0..self.m {
            let a = &self.rows[i][col];
            if !a.positive(eps) {
                continue;
            }
            let ratio = self.rows[i][self.ncols].clone() / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let better = if S::EXACT {
                        ratio < br || (ratio == br && self.basis[i] < self.basis[bi])
                    } else {
                        let d = ratio.to_f64() - br.to_f64();
                        d < -eps || (d.abs() <= eps && self.basis[i] < self.basis[bi])
                    };
                    if better { Some((i, ratio)) } else { Some((bi, br)) }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let width = self.ncols + 1;
        let piv = self.rows[row][col].clone();
        let prow = &mut self.rows[row];
        for v in prow.iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / &piv;
            }
        }
        prow[col] = S::one();
        let nz: Vec<usize> = (0..width).filter(|&j| !prow[j].is_zero()).collect();
        let prow = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for &j in &nz {
                let d = f.clone() * &prow[j];
                r[j] -= d;
            }
            r[col] = S::zero();
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &j in &nz {
                let d = f.clone() * &prow[j];
                self.obj[j] -= d;
            }
            self.obj[col] = S::zero();
        }
        self.basis[row] = col;
        if !S::EXACT {
            // keep round-off from accumulating in the basic columns
            for r in self.rows.iter_mut() {
                for v in r.iter_mut() {
                    if v.near_zero(1e-14) {
                        *v = S::zero();
                    }
                }
            }
        }
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.kinds[self.basis[i]] != ColKind::Artificial {
                continue;
            }
            let col = (0..self.ncols)
                .find(|&j| self.kinds[j] != ColKind::Artificial && !self.rows[i][j].near_zero(self.opts.eps));
            if let Some(j) = col {
                self.pivot(i, j);
            }
        }
    }

    fn finish(self, status: LpStatus, lp: &LinearProgram<S>) -> LpSolution<S> {
        let mut primal = vec![S::zero(); lp.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                let v = self.rows[i][self.ncols].clone();
                primal[b] = if !S::EXACT && v.negative(0.0) { S::zero() } else { v };
            }
        }
        let value: S = lp
            .objective
            .iter()
            .zip(&primal)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| c.clone() * x)
            .sum();
        let dual = (0..self.m)
            .map(|i| {
                let y = self.obj[self.identity_col[i]].clone();
                if self.negated[i] { -y } else { y }
            })
            .collect();
        LpSolution { status, value, primal, dual, pivots: self.pivots }
    }
}
