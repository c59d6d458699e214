//! Seeded random behaviors for property suites and the `sample` command.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::polytope::{self, Caps};
use crate::scalar::{Rational, Scalar};
use crate::scenario::{bipartitions, boxes, Behavior, Scenario};

/// Convex mixture of `terms` members of `pool` (drawn with replacement)
/// with random small-integer weights, normalized exactly.
pub fn random_mixture<R: Rng + ?Sized>(pool: &[Behavior<Rational>], terms: usize, rng: &mut R) -> Result<Behavior<Rational>> {
    if pool.is_empty() || terms == 0 {
        return Err(Error::invalid("random mixture needs a nonempty pool and at least one term"));
    }
    let raw: Vec<i64> = (0..terms).map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    let picks: Vec<(Rational, &Behavior<Rational>)> = raw
        .iter()
        .map(|&w| (Rational::new(w, total), pool.choose(rng).expect("nonempty pool")))
        .collect();
    Behavior::combine(&picks.iter().map(|(w, b)| (w.clone(), *b)).collect::<Vec<_>>())
}

/// Random point of the no-signaling polytope of `sc` (mixture of its
/// enumerated vertices).
pub fn random_ns_behavior<R: Rng + ?Sized>(sc: &Scenario, terms: usize, caps: Caps, rng: &mut R) -> Result<Behavior<Rational>> {
    let vs = crate::io::cached_ns_vertices(sc, caps)?;
    random_mixture(&vs.vertices, terms, rng)
}

/// Candidate columns for random three-party binary behaviors: fully local
/// vertices, hybrid vertices of every cut and outcome relabelings of the
/// Svetlichny box.
pub fn tripartite_pool(caps: Caps) -> Result<Vec<Behavior<Rational>>> {
    let sc = Scenario::uniform(3, 2, 2)?;
    let mut pool = polytope::local_deterministic_vertices(&sc, caps)?.vertices;
    for cut in bipartitions(3)? {
        pool.extend(polytope::hybrid_vertices(&sc, &cut, caps)?.vertices);
    }
    let sv = boxes::svetlichny_box::<Rational>();
    for mask in 0u32..64 {
        let mut b = sv.clone();
        for bit in 0..6 {
            if mask >> bit & 1 == 1 {
                b = b.relabel_outcomes(bit / 2, bit % 2, &[1, 0]);
            }
        }
        pool.push(b);
    }
    Ok(pool)
}

/// Random three-party binary behavior drawn from [`tripartite_pool`].
pub fn random_tripartite<R: Rng + ?Sized>(pool: &[Behavior<Rational>], rng: &mut R) -> Result<Behavior<Rational>> {
    let terms = rng.gen_range(1..=4);
    random_mixture(pool, terms, rng)
}

/// `true` when every entry of `b` lies in the unit interval.
pub fn is_probability_table<S: Scalar>(b: &Behavior<S>) -> bool {
    b.table().iter().all(|p| !p.negative(b.tolerance()) && !(p.clone() - S::one()).positive(b.tolerance()))
}
