use serde::Serialize;

use super::Scenario;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default tolerance for floating-point behaviors.
pub const DEFAULT_EPS: f64 = 1e-9;

/// A probability table `P(a⃗ | x⃗)` over a [`Scenario`].
///
/// Immutable after construction. `S` is either [`Rational`] (exact) or `f64`
/// (floating, compared under `tolerance`).
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior<S> {
    scenario: Scenario,
    table: Vec<S>,
    tolerance: f64,
}

/// One violated behavior constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Negative {
        settings: Vec<usize>,
        outcomes: Vec<usize>,
        value: f64,
    },
    Normalization {
        settings: Vec<usize>,
        residual: f64,
    },
    /// The marginal of everyone except `party` changes when `party` switches
    /// from `setting_a` to `setting_b`.
    Signaling {
        party: usize,
        setting_a: usize,
        setting_b: usize,
        other_settings: Vec<usize>,
        other_outcomes: Vec<usize>,
        residual: f64,
    },
}

impl Violation {
    pub fn residual(&self) -> f64 {
        match self {
            Violation::Negative { value, .. } => value.abs(),
            Violation::Normalization { residual, .. } | Violation::Signaling { residual, .. } => residual.abs(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_signaling(&self) -> Option<&Violation> {
        self.violations.iter().find(|v| matches!(v, Violation::Signaling { .. }))
    }

    pub fn max_residual(&self) -> f64 {
        self.violations.iter().map(Violation::residual).fold(0.0, f64::max)
    }
}

impl<S: Scalar> Behavior<S> {
    /// Wraps a table given in canonical order.
    pub fn from_table(scenario: Scenario, table: Vec<S>) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return Err(Error::Structural(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.table_len()
            )));
        }
        Ok(Behavior { scenario, table, tolerance: DEFAULT_EPS })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> S) -> Self {
        let mut table = Vec::with_capacity(scenario.table_len());
        for xi in 0..scenario.num_setting_tuples() {
            let x = scenario.settings_of(xi);
            for ai in 0..scenario.num_outcome_tuples() {
                table.push(f(&x, &scenario.outcomes_of(ai)));
            }
        }
        Behavior { scenario, table, tolerance: DEFAULT_EPS }
    }

    pub fn with_tolerance(mut self, eps: f64) -> Self {
        self.tolerance = eps;
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[S] {
        &self.table
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn into_table(self) -> Vec<S> {
        self.table
    }

    pub fn get(&self, x: &[usize], a: &[usize]) -> &S {
        &self.table[self.scenario.index(x, a)]
    }

    /// Block of outcome probabilities for one setting tuple.
    pub fn row(&self, x: &[usize]) -> &[S] {
        let n = self.scenario.num_outcome_tuples();
        let start = self.scenario.setting_index(x) * n;
        &self.table[start..start + n]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Behavior<T> {
        Behavior {
            scenario: self.scenario.clone(),
            table: self.table.iter().map(f).collect(),
            tolerance: self.tolerance,
        }
    }

    pub fn to_f64(&self) -> Behavior<f64> {
        self.map(|v| v.to_f64())
    }

    /// Correlator `E(x⃗) = Σ_a (−1)^{Σ a_i} P(a|x)` for binary-outcome scenarios.
    pub fn correlator(&self, x: &[usize]) -> S {
        let mut acc = S::zero();
        for (ai, p) in self.row(x).iter().enumerate() {
            let parity = self.scenario.outcomes_of(ai).iter().sum::<usize>() % 2;
            if parity == 0 {
                acc += p.clone();
            } else {
                acc -= p.clone();
            }
        }
        acc
    }

    /// Checks nonnegativity, normalization and no-signaling.
    ///
    /// No-signaling is tested party by party: the marginal of the other
    /// parties must not depend on that party's setting. By induction this
    /// covers every subset marginal.
    pub fn validate(&self) -> ValidationReport {
        let eps = self.tolerance;
        let sc = &self.scenario;
        let mut violations = Vec::new();
        let n_out = sc.num_outcome_tuples();

        for xi in 0..sc.num_setting_tuples() {
            let row = &self.table[xi * n_out..(xi + 1) * n_out];
            for (ai, p) in row.iter().enumerate() {
                if p.negative(eps) {
                    violations.push(Violation::Negative {
                        settings: sc.settings_of(xi),
                        outcomes: sc.outcomes_of(ai),
                        value: p.to_f64(),
                    });
                }
            }
            let total: S = row.iter().cloned().sum();
            let resid = total - S::one();
            if !resid.near_zero(eps) {
                violations.push(Violation::Normalization {
                    settings: sc.settings_of(xi),
                    residual: resid.to_f64(),
                });
            }
        }

        for party in 0..sc.parties() {
            self.signaling_violations(party, &mut violations);
        }
        ValidationReport { violations }
    }

    fn signaling_violations(&self, party: usize, out: &mut Vec<Violation>) {
        let sc = &self.scenario;
        let eps = self.tolerance;
        let others: Vec<usize> = (0..sc.parties()).filter(|&p| p != party).collect();
        let s_k = sc.settings()[party];
        if s_k < 2 || others.is_empty() {
            return;
        }
        let rest = match sc.restrict(&others) {
            Ok(r) => r,
            Err(_) => return,
        };
        for xo in 0..rest.num_setting_tuples() {
            let x_rest = rest.settings_of(xo);
            let reference = self.drop_party_marginal(party, 0, &x_rest);
            for xk in 1..s_k {
                let m = self.drop_party_marginal(party, xk, &x_rest);
                for (ao, (r, v)) in reference.iter().zip(&m).enumerate() {
                    let resid = v.clone() - r;
                    if !resid.near_zero(eps) {
                        out.push(Violation::Signaling {
                            party,
                            setting_a: 0,
                            setting_b: xk,
                            other_settings: x_rest.clone(),
                            other_outcomes: rest.outcomes_of(ao),
                            residual: resid.to_f64(),
                        });
                    }
                }
            }
        }
    }

    /// Distribution of the other parties' outcomes with `party` at setting
    /// `xk` and the others at `x_rest`, summing over `party`'s outcome.
    fn drop_party_marginal(&self, party: usize, xk: usize, x_rest: &[usize]) -> Vec<S> {
        let sc = &self.scenario;
        let mut x = Vec::with_capacity(sc.parties());
        x.extend_from_slice(&x_rest[..party]);
        x.push(xk);
        x.extend_from_slice(&x_rest[party..]);
        let row = self.row(&x);
        let n_rest: usize = sc
            .outcomes()
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != party)
            .map(|(_, &o)| o)
            .product();
        let mut acc = vec![S::zero(); n_rest];
        for (ai, p) in row.iter().enumerate() {
            let mut a = sc.outcomes_of(ai);
            a.remove(party);
            let idx = a.iter().zip(sc.outcomes().iter().enumerate().filter(|&(q, _)| q != party))
                .fold(0, |acc, (&d, (_, &r))| acc * r + d);
            acc[idx] += p.clone();
        }
        acc
    }

    fn require_no_signaling(&self) -> Result<()> {
        let report = self.validate();
        if let Some(Violation::Signaling { party, setting_a, setting_b, residual, .. }) = report.first_signaling() {
            return Err(Error::Signaling {
                party: *party,
                setting_a: *setting_a,
                setting_b: *setting_b,
                residual: *residual,
            });
        }
        Ok(())
    }

    /// Marginal on `subset` (listed order becomes the party order).
    ///
    /// Requires no-signaling; the discarded parties' settings are fixed to 0.
    pub fn marginal(&self, subset: &[usize]) -> Result<Behavior<S>> {
        self.require_no_signaling()?;
        self.marginal_unchecked(subset)
    }

    fn marginal_unchecked(&self, subset: &[usize]) -> Result<Behavior<S>> {
        let sc = &self.scenario;
        let sub = sc.restrict(subset)?;
        let mut table = vec![S::zero(); sub.table_len()];
        let n_sub_out = sub.num_outcome_tuples();
        for xs in 0..sub.num_setting_tuples() {
            let x_sub = sub.settings_of(xs);
            let mut x = vec![0; sc.parties()];
            for (&p, &v) in subset.iter().zip(&x_sub) {
                x[p] = v;
            }
            for (ai, p) in self.row(&x).iter().enumerate() {
                let a = sc.outcomes_of(ai);
                let a_sub: Vec<usize> = subset.iter().map(|&q| a[q]).collect();
                table[xs * n_sub_out + sub.outcome_index(&a_sub)] += p.clone();
            }
        }
        Ok(Behavior { scenario: sub, table, tolerance: self.tolerance })
    }

    /// Probability `P(ã | x̃)` of outcomes `outcomes` on `subset` at `settings`.
    pub fn subset_probability(&self, subset: &[usize], settings: &[usize], outcomes: &[usize]) -> Result<S> {
        let m = self.marginal_unchecked(subset)?;
        Ok(m.get(settings, outcomes).clone())
    }

    /// Conditions on `subset` having measured `settings` and obtained
    /// `outcomes`; the result lives on the complement (ascending order).
    pub fn condition(&self, subset: &[usize], settings: &[usize], outcomes: &[usize]) -> Result<Behavior<S>> {
        let sc = &self.scenario;
        if subset.len() != settings.len() || subset.len() != outcomes.len() {
            return Err(Error::invalid("subset, settings and outcomes must have equal length"));
        }
        let mut in_subset = vec![false; sc.parties()];
        for (i, &p) in subset.iter().enumerate() {
            if p >= sc.parties() || in_subset[p] {
                return Err(Error::invalid(format!("bad conditioning party {p}")));
            }
            if settings[i] >= sc.settings()[p] || outcomes[i] >= sc.outcomes()[p] {
                return Err(Error::invalid(format!("setting/outcome out of range for party {p}")));
            }
            in_subset[p] = true;
        }
        let complement: Vec<usize> = (0..sc.parties()).filter(|&p| !in_subset[p]).collect();
        if complement.is_empty() {
            return Err(Error::invalid("cannot condition on every party"));
        }
        self.require_no_signaling()?;
        let norm = self.subset_probability(subset, settings, outcomes)?;
        if !norm.positive(self.tolerance) {
            return Err(Error::ZeroProbability);
        }
        let sub = sc.restrict(&complement)?;
        let mut x = vec![0; sc.parties()];
        let mut a = vec![0; sc.parties()];
        for (i, &p) in subset.iter().enumerate() {
            x[p] = settings[i];
            a[p] = outcomes[i];
        }
        let result = Behavior::from_fn(sub, |xc, ac| {
            let mut x = x.clone();
            let mut a = a.clone();
            for (k, &p) in complement.iter().enumerate() {
                x[p] = xc[k];
                a[p] = ac[k];
            }
            self.get(&x, &a).clone() / &norm
        });
        Ok(result.with_tolerance(self.tolerance))
    }

    /// Product behavior: parties of `self` followed by parties of `other`.
    pub fn tensor(&self, other: &Behavior<S>) -> Result<Behavior<S>> {
        let sc = self.scenario.join(&other.scenario)?;
        let m = self.scenario.parties();
        Ok(Behavior::from_fn(sc, |x, a| {
            self.get(&x[..m], &a[..m]).clone() * other.get(&x[m..], &a[m..])
        })
        .with_tolerance(self.tolerance.max(other.tolerance)))
    }

    /// Reorders parties: party `k` of the result is party `order[k]` of `self`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<Behavior<S>> {
        let m = self.scenario.parties();
        let mut seen = vec![false; m];
        if order.len() != m || order.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("party order must be a permutation"));
        }
        let sc = self.scenario.restrict(order)?;
        Ok(Behavior::from_fn(sc, |x, a| {
            let mut xo = vec![0; m];
            let mut ao = vec![0; m];
            for (k, &p) in order.iter().enumerate() {
                xo[p] = x[k];
                ao[p] = a[k];
            }
            self.get(&xo, &ao).clone()
        })
        .with_tolerance(self.tolerance))
    }

    /// Relabels settings of `party` by `perm` (new setting `s` is old `perm[s]`).
    pub fn relabel_settings(&self, party: usize, perm: &[usize]) -> Behavior<S> {
        Behavior::from_fn(self.scenario.clone(), |x, a| {
            let mut xo = x.to_vec();
            xo[party] = perm[x[party]];
            self.get(&xo, a).clone()
        })
        .with_tolerance(self.tolerance)
    }

    /// Relabels outcomes of `party` when it uses `setting` (new `o` is old `perm[o]`).
    pub fn relabel_outcomes(&self, party: usize, setting: usize, perm: &[usize]) -> Behavior<S> {
        Behavior::from_fn(self.scenario.clone(), |x, a| {
            let mut ao = a.to_vec();
            if x[party] == setting {
                ao[party] = perm[a[party]];
            }
            self.get(x, &ao).clone()
        })
        .with_tolerance(self.tolerance)
    }

    /// Convex (or general linear) combination of behaviors on one scenario.
    pub fn combine(terms: &[(S, &Behavior<S>)]) -> Result<Behavior<S>> {
        let first = terms.first().ok_or_else(|| Error::invalid("empty combination"))?;
        let sc = first.1.scenario.clone();
        let mut table = vec![S::zero(); sc.table_len()];
        for (w, b) in terms {
            if b.scenario != sc {
                return Err(Error::DimensionMismatch("combined behaviors differ in scenario".into()));
            }
            for (t, v) in table.iter_mut().zip(&b.table) {
                *t += w.clone() * v;
            }
        }
        Ok(Behavior { scenario: sc, table, tolerance: first.1.tolerance })
    }

    pub fn max_abs_diff(&self, other: &Behavior<S>) -> f64 {
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a.clone() - b).to_f64().abs())
            .fold(0.0, f64::max)
    }
}
