//! Measurement scenarios, bipartitions and behaviors (probability tables).

mod behavior;
pub mod boxes;

pub use behavior::{Behavior, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest table (settings tuples × outcome tuples) a scenario may describe.
pub const DEFAULT_TABLE_CAP: usize = 1 << 24;

/// Per-party setting and outcome counts.
///
/// Tables over a scenario are indexed row-major: the settings tuple is the
/// outer index and the outcomes tuple the inner one, each a mixed-radix
/// number with party 0 most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

impl Scenario {
    pub fn new(settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        Self::with_cap(settings, outcomes, DEFAULT_TABLE_CAP)
    }

    pub fn with_cap(settings: Vec<usize>, outcomes: Vec<usize>, cap: usize) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        if settings.len() != outcomes.len() {
            return Err(Error::InvalidScenario(format!(
                "{} setting counts but {} outcome counts",
                settings.len(),
                outcomes.len()
            )));
        }
        if let Some(p) = settings.iter().position(|&s| s == 0) {
            return Err(Error::InvalidScenario(format!("party {p} has no settings")));
        }
        if let Some(p) = outcomes.iter().position(|&o| o < 2) {
            return Err(Error::InvalidScenario(format!("party {p} needs at least two outcomes")));
        }
        let mut size: u128 = 1;
        for (&s, &o) in settings.iter().zip(&outcomes) {
            size = size.saturating_mul(s as u128 * o as u128);
        }
        if size > cap as u128 {
            return Err(Error::cap("scenario table", size, cap));
        }
        Ok(Scenario { settings, outcomes })
    }

    /// `parties` parties, each with `settings` settings and `outcomes` outcomes.
    pub fn uniform(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        Self::new(vec![settings; parties], vec![outcomes; parties])
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn num_setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn num_outcome_tuples(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn table_len(&self) -> usize {
        self.num_setting_tuples() * self.num_outcome_tuples()
    }

    pub fn setting_index(&self, x: &[usize]) -> usize {
        mixed_radix(x, &self.settings)
    }

    pub fn outcome_index(&self, a: &[usize]) -> usize {
        mixed_radix(a, &self.outcomes)
    }

    pub fn index(&self, x: &[usize], a: &[usize]) -> usize {
        self.setting_index(x) * self.num_outcome_tuples() + self.outcome_index(a)
    }

    /// Digits of a setting-tuple index (not a table index).
    pub fn settings_of(&self, idx: usize) -> Vec<usize> {
        mixed_radix_digits(idx, &self.settings)
    }

    pub fn outcomes_of(&self, idx: usize) -> Vec<usize> {
        mixed_radix_digits(idx, &self.outcomes)
    }

    /// Scenario of the listed parties, in the listed order.
    pub fn restrict(&self, parties: &[usize]) -> Result<Scenario> {
        let mut s = Vec::with_capacity(parties.len());
        let mut o = Vec::with_capacity(parties.len());
        for &p in parties {
            if p >= self.parties() {
                return Err(Error::invalid(format!("party {p} out of range")));
            }
            s.push(self.settings[p]);
            o.push(self.outcomes[p]);
        }
        Scenario::new(s, o)
    }

    /// Scenario whose parties are those of `self` followed by those of `other`.
    pub fn join(&self, other: &Scenario) -> Result<Scenario> {
        let mut s = self.settings.clone();
        s.extend_from_slice(&other.settings);
        let mut o = self.outcomes.clone();
        o.extend_from_slice(&other.outcomes);
        Scenario::new(s, o)
    }

    /// Iterator over all setting tuples in table order.
    pub fn setting_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_setting_tuples()).map(move |i| self.settings_of(i))
    }

    /// Iterator over all outcome tuples in table order.
    pub fn outcome_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_outcome_tuples()).map(move |i| self.outcomes_of(i))
    }
}

fn mixed_radix(digits: &[usize], radix: &[usize]) -> usize {
    debug_assert_eq!(digits.len(), radix.len());
    digits.iter().zip(radix).fold(0, |acc, (&d, &r)| {
        debug_assert!(d < r);
        acc * r + d
    })
}

fn mixed_radix_digits(mut idx: usize, radix: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for (slot, &r) in out.iter_mut().zip(radix).rev() {
        *slot = idx % r;
        idx /= r;
    }
    out
}

/// A split of the parties into two nonempty blocks.
///
/// Canonical form keeps party 0 in `block_a`; both blocks are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bipartition {
    block_a: Vec<usize>,
    block_b: Vec<usize>,
}

impl Bipartition {
    /// Builds the canonical bipartition with `side` on one side of an
    /// `parties`-party system.
    pub fn new(parties: usize, side: &[usize]) -> Result<Self> {
        let mut in_side = vec![false; parties];
        for &p in side {
            if p >= parties {
                return Err(Error::invalid(format!("party {p} out of range for {parties} parties")));
            }
            if in_side[p] {
                return Err(Error::invalid(format!("party {p} listed twice")));
            }
            in_side[p] = true;
        }
        let a: Vec<usize> = (0..parties).filter(|&p| in_side[p]).collect();
        let b: Vec<usize> = (0..parties).filter(|&p| !in_side[p]).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("both blocks of a bipartition must be nonempty"));
        }
        Ok(if in_side[0] {
            Bipartition { block_a: a, block_b: b }
        } else {
            Bipartition { block_a: b, block_b: a }
        })
    }

    pub fn block_a(&self) -> &[usize] {
        &self.block_a
    }

    pub fn block_b(&self) -> &[usize] {
        &self.block_b
    }

    pub fn parties(&self) -> usize {
        self.block_a.len() + self.block_b.len()
    }

    /// True when `i` and `j` lie on opposite sides.
    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.block_a.contains(&i) != self.block_a.contains(&j)
    }

    /// Label like `0:12` (party indices, block A first).
    pub fn label(&self) -> String {
        let join = |b: &[usize]| b.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        format!("{}:{}", join(&self.block_a), join(&self.block_b))
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// All canonical bipartitions of `m` parties, ordered by the bitmask of the
/// block not containing party 0.
pub fn bipartitions(m: usize) -> Result<Vec<Bipartition>> {
    if m < 2 {
        return Err(Error::invalid("bipartitions need at least two parties"));
    }
    if m > 30 {
        return Err(Error::cap("party count for bipartition enumeration", m, 30));
    }
    let mut out = Vec::with_capacity((1 << (m - 1)) - 1);
    for mask in 1u32..(1 << (m - 1)) {
        let side_b: Vec<usize> = (0..m - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        out.push(Bipartition::new(m, &side_b)?);
    }
    Ok(out)
}
