//! Pauli strings `i^phase · X^x Z^z` over packed bit vectors.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

pub(crate) fn words(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

#[inline]
pub(crate) fn get(bits: &[u64], q: usize) -> bool {
    bits[q / WORD] >> (q % WORD) & 1 == 1
}

#[inline]
pub(crate) fn set(bits: &mut [u64], q: usize, v: bool) {
    let mask = 1u64 << (q % WORD);
    if v {
        bits[q / WORD] |= mask;
    } else {
        bits[q / WORD] &= !mask;
    }
}

#[inline]
fn dot(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// An `n`-qubit Pauli operator. Per qubit the factor is `X^x Z^z`, so a
/// `Y` contributes one unit of phase (`Y = i·XZ`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    phase: u8,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, phase: 0, x: vec![0; words(n)], z: vec![0; words(n)] }
    }

    /// Single-qubit Pauli `letter` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut p = Self::identity(n);
        p.set_letter(q, letter)?;
        Ok(p)
    }

    /// Letters on the listed qubits (identity elsewhere).
    pub fn from_sparse(n: usize, letters: &[(usize, char)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            if q >= n {
                return Err(Error::invalid(format!("qubit {q} out of range for {n} qubits")));
            }
            if p.letter(q) != 'I' {
                return Err(Error::invalid(format!("qubit {q} appears twice in a Pauli word")));
            }
            p.set_letter(q, l)?;
        }
        Ok(p)
    }

    fn set_letter(&mut self, q: usize, letter: char) -> Result<()> {
        if q >= self.n {
            return Err(Error::invalid(format!("qubit {q} out of range for {} qubits", self.n)));
        }
        let (x, z) = match letter {
            'I' => (false, false),
            'X' => (true, false),
            'Z' => (false, true),
            'Y' => (true, true),
            other => return Err(Error::invalid(format!("unknown Pauli letter {other:?}"))),
        };
        // remove any Y phase previously carried by this qubit
        if self.x_bit(q) && self.z_bit(q) {
            self.phase = (self.phase + 3) % 4;
        }
        set(&mut self.x, q, x);
        set(&mut self.z, q, z);
        if x && z {
            self.phase = (self.phase + 1) % 4;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        get(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        get(&self.z, q)
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// Raw power of `i` in front of `X^x Z^z`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    fn y_count(&self) -> u32 {
        dot(&self.x, &self.z)
    }

    /// Phase relative to the letter word (Y counted as a letter).
    fn word_phase(&self) -> u8 {
        ((self.phase as u32 + 4 * self.n as u32 - self.y_count()) % 4) as u8
    }

    pub fn is_hermitian(&self) -> bool {
        self.word_phase().is_multiple_of(2)
    }

    /// `true` when the operator is `−(letter word)`; only meaningful for
    /// Hermitian strings.
    pub fn is_negative(&self) -> bool {
        self.word_phase() == 2
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.negate();
        p
    }

    /// The letter word with a `+` sign.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = (self.y_count() % 4) as u8;
        p
    }

    pub fn is_identity_word(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        (dot(&self.x, &other.z) + dot(&self.z, &other.x)).is_multiple_of(2)
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(other);
        out
    }

    /// `self ← self · other`.
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        debug_assert_eq!(self.n, other.n);
        let swap = dot(&self.z, &other.x);
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * swap) % 4) as u8;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// Restriction to `qubits` (phase of the letters kept, sign dropped).
    pub fn restricted_word(&self, qubits: &[usize]) -> Vec<char> {
        qubits.iter().map(|&q| self.letter(q)).collect()
    }

    /// Conjugation by Hadamard on `q`.
    pub fn apply_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.phase = (self.phase + 2) % 4;
        }
        set(&mut self.x, q, z);
        set(&mut self.z, q, x);
    }

    /// Conjugation by the phase gate on `q`.
    pub fn apply_s(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x {
            self.phase = (self.phase + 1) % 4;
            set(&mut self.z, q, !z);
        }
    }

    /// Conjugation by CNOT with control `c` and target `t`.
    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let (xc, zt) = (self.x_bit(c), self.z_bit(t));
        if xc {
            let v = self.x_bit(t);
            set(&mut self.x, t, !v);
        }
        if zt {
            let v = self.z_bit(c);
            set(&mut self.z, c, !v);
        }
    }

    /// Sparse form `-XZ_(3,7)` (0-based qubits), or `I` for the identity.
    pub fn sparse_string(&self) -> String {
        let sup = self.support();
        let sign = if self.is_hermitian() {
            if self.is_negative() { "-" } else { "" }
        } else if self.word_phase() == 1 {
            "i"
        } else {
            "-i"
        };
        if sup.is_empty() {
            return format!("{sign}I");
        }
        let letters: String = sup.iter().map(|&q| self.letter(q)).collect();
        let qs: Vec<String> = sup.iter().map(|q| q.to_string()).collect();
        format!("{sign}{letters}_({})", qs.join(","))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.word_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        let word: String = (0..self.n).map(|q| self.letter(q)).collect();
        write!(f, "{sign}{word}")
    }
}

/// A Pauli word given without a fixed qubit count: `XZ_(3,7)`, `-Y_(0)` or
/// a dense word such as `+XIZ` (qubit `k` is the `k`-th letter).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliSpec {
    pub negative: bool,
    pub letters: Vec<(usize, char)>,
}

impl PauliSpec {
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters.iter().map(|&(q, _)| q)
    }

    pub fn to_pauli(&self, n: usize) -> Result<PauliString> {
        let p = PauliString::from_sparse(n, &self.letters)?;
        Ok(if self.negative { p.negated() } else { p })
    }
}

impl FromStr for PauliSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let bad = || Error::invalid(format!("malformed Pauli word {s:?}"));
        let letters = if let Some((word, qs)) = body.split_once('_') {
            let qs = qs.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
            let qubits: Vec<usize> =
                qs.split(',').map(|v| v.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
            let chars: Vec<char> = word.chars().collect();
            if chars.len() != qubits.len() {
                return Err(Error::invalid(format!(
                    "Pauli word {s:?} has {} letters for {} qubits",
                    chars.len(),
                    qubits.len()
                )));
            }
            qubits.into_iter().zip(chars).collect()
        } else {
            if body.is_empty() {
                return Err(bad());
            }
            body.chars().enumerate().filter(|&(_, c)| c != 'I').collect::<Vec<_>>()
        };
        let mut seen = std::collections::HashSet::new();
        for &(q, c) in &letters {
            if !matches!(c, 'I' | 'X' | 'Y' | 'Z') {
                return Err(Error::invalid(format!("unknown Pauli letter {c:?} in {s:?}")));
            }
            if !seen.insert(q) {
                return Err(Error::invalid(format!("qubit {q} repeated in {s:?}")));
            }
        }
        Ok(PauliSpec { negative, letters })
    }
}

impl fmt::Display for PauliSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters: String = self.letters.iter().map(|&(_, c)| c).collect();
        let qs: Vec<String> = self.letters.iter().map(|(q, _)| q.to_string()).collect();
        write!(f, "{}{}_({})", if self.negative { "-" } else { "" }, letters, qs.join(","))
    }
}
