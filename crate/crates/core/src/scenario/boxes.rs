//! Standard correlation boxes used as fixtures and test targets.

use super::{Behavior, Scenario};
use crate::scalar::Scalar;

/// `P(a⃗|x⃗) = 1 / Π o_i`.
pub fn uniform<S: Scalar>(sc: &Scenario) -> Behavior<S> {
    let n = sc.num_outcome_tuples() as i64;
    Behavior::from_fn(sc.clone(), |_, _| S::ratio(1, n))
}

/// Deterministic box: `strategy[p][x]` is party `p`'s outcome at setting `x`.
pub fn deterministic<S: Scalar>(sc: &Scenario, strategy: &[Vec<usize>]) -> Behavior<S> {
    Behavior::from_fn(sc.clone(), |x, a| {
        if (0..x.len()).all(|p| strategy[p][x[p]] == a[p]) {
            S::one()
        } else {
            S::zero()
        }
    })
}

/// Canonical PR box: `a ⊕ b = x·y` with uniform marginals.
pub fn pr_box<S: Scalar>() -> Behavior<S> {
    let sc = Scenario::uniform(2, 2, 2).expect("2222 scenario");
    Behavior::from_fn(sc, |x, a| {
        if (a[0] ^ a[1]) == (x[0] & x[1]) {
            S::ratio(1, 2)
        } else {
            S::zero()
        }
    })
}

/// Tripartite box with `a ⊕ b ⊕ c = xy ⊕ yz ⊕ xz`, uniform on the allowed
/// outcomes. An extremal no-signaling box that saturates the Svetlichny
/// functional, so no bipartition-hybrid model reproduces any part of it.
pub fn svetlichny_box<S: Scalar>() -> Behavior<S> {
    let sc = Scenario::uniform(3, 2, 2).expect("3-party scenario");
    Behavior::from_fn(sc, |x, a| {
        let target = (x[0] & x[1]) ^ (x[1] & x[2]) ^ (x[0] & x[2]);
        if a[0] ^ a[1] ^ a[2] == target {
            S::ratio(1, 4)
        } else {
            S::zero()
        }
    })
}

/// GHZ statistics for settings {X, Y} on three qubits: correlator +1 for
/// XXX, −1 for the three XYY permutations, 0 for odd Y-counts; all
/// marginals uniform. Outcome 0 is eigenvalue +1.
pub fn mermin_box<S: Scalar>() -> Behavior<S> {
    let sc = Scenario::uniform(3, 2, 2).expect("3-party scenario");
    Behavior::from_fn(sc, |x, a| {
        let ys = x.iter().sum::<usize>();
        if ys % 2 == 1 {
            return S::ratio(1, 8);
        }
        let parity = (a[0] + a[1] + a[2]) % 2;
        if parity == (ys / 2) % 2 {
            S::ratio(1, 4)
        } else {
            S::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn standard_boxes_are_valid() {
        assert!(pr_box::<Rational>().validate().is_valid());
        assert!(svetlichny_box::<Rational>().validate().is_valid());
        assert!(mermin_box::<Rational>().validate().is_valid());
        let sc = Scenario::uniform(3, 2, 3).unwrap();
        let d = deterministic::<Rational>(&sc, &[vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert!(d.validate().is_valid());
    }

    #[test]
    fn mermin_correlators() {
        let m = mermin_box::<Rational>();
        assert_eq!(m.correlator(&[0, 0, 0]), Rational::from_i64(1));
        for x in [[0, 1, 1], [1, 0, 1], [1, 1, 0]] {
            assert_eq!(m.correlator(&x), Rational::from_i64(-1));
        }
        assert_eq!(m.correlator(&[0, 0, 1]), Rational::zero());
    }

    #[test]
    fn pr_box_chsh_value_is_four() {
        let pr = pr_box::<Rational>();
        let chsh = pr.correlator(&[0, 0]) + pr.correlator(&[0, 1]) + pr.correlator(&[1, 0]) - pr.correlator(&[1, 1]);
        assert_eq!(chsh, Rational::from_i64(4));
    }
}
