//! Exact double-description vertex enumeration for polytopes given as
//! `{ p : E p = f, p ≥ 0 }`.
//!
//! The equalities are eliminated first (RREF parametrization
//! `p = p₀ + N z`), then the homogenized cone `{(t, z) : t ≥ 0,
//! t·p₀ + N z ≥ 0}` is built by inserting one inequality at a time. A
//! lineality basis is carried until the inequalities pin it down, and
//! adjacency is decided combinatorially from zero sets.

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Sparse equality row `Σ coeff·p_j = rhs`.
pub type Equality = (Vec<(usize, Rational)>, Rational);

/// Reduced row-echelon form of a dense system; returns pivot columns.
pub(crate) fn rref(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= f.clone() * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Rank of a dense rational matrix.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    rref(&mut rows, ncols).len()
}

struct Parametrization {
    /// Particular solution (free coordinates zero).
    base: Vec<Rational>,
    /// Column `k` is the direction of free coordinate `k`.
    directions: Vec<Vec<Rational>>,
}

fn parametrize(dim: usize, eqs: &[Equality]) -> Result<Parametrization> {
    let mut rows: Vec<Vec<Rational>> = eqs
        .iter()
        .map(|(coeffs, rhs)| {
            let mut row = vec![Rational::zero(); dim + 1];
            for (j, v) in coeffs {
                row[*j] += v.clone();
            }
            row[dim] = rhs.clone();
            row
        })
        .collect();
    let pivots = rref(&mut rows, dim + 1);
    if pivots.last() == Some(&dim) {
        return Err(Error::invalid("equality system is inconsistent"));
    }
    let mut is_pivot = vec![false; dim];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..dim).filter(|&j| !is_pivot[j]).collect();
    let mut base = vec![Rational::zero(); dim];
    for (r, &c) in pivots.iter().enumerate() {
        base[c] = rows[r][dim].clone();
    }
    let directions = free
        .iter()
        .map(|&fj| {
            let mut d = vec![Rational::zero(); dim];
            d[fj] = Rational::one();
            for (r, &c) in pivots.iter().enumerate() {
                d[c] = -rows[r][fj].clone();
            }
            d
        })
        .collect();
    Ok(Parametrization { base, directions })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x.clone() * y;
        }
    }
    acc
}

fn axpy(y: &mut [Rational], alpha: &Rational, x: &[Rational]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += alpha.clone() * xi;
        }
    }
}

fn normalize(v: &mut [Rational]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        let inv = first.recip();
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
    }
}

struct Ray {
    v: Vec<Rational>,
    zeros: u128,
}

/// Vertices of `{ p ∈ ℝ^dim : eqs, p ≥ 0 }` (must be bounded and nonempty).
///
/// `dim` is limited to 127 so that zero sets fit in one machine word pair.
pub fn enumerate_vertices(dim: usize, eqs: &[Equality]) -> Result<Vec<Vec<Rational>>> {
    if dim > 127 {
        return Err(Error::cap("double description dimension", dim, 127));
    }
    let param = parametrize(dim, eqs)?;
    let d = param.directions.len() + 1;
    // homogenized inequality rows: index 0 is t ≥ 0, then p_e ≥ 0
    let mut ineqs: Vec<Vec<Rational>> = Vec::with_capacity(dim + 1);
    let mut t_row = vec![Rational::zero(); d];
    t_row[0] = Rational::one();
    ineqs.push(t_row);
    for e in 0..dim {
        let mut h = Vec::with_capacity(d);
        h.push(param.base[e].clone());
        for dir in &param.directions {
            h.push(dir[e].clone());
        }
        if h.iter().all(Rational::is_zero) {
            continue;
        }
        ineqs.push(h);
    }

    let mut lineality: Vec<Vec<Rational>> = (0..d)
        .map(|k| {
            let mut v = vec![Rational::zero(); d];
            v[k] = Rational::one();
            v
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, h) in ineqs.iter().enumerate() {
        let bit = 1u128 << k;
        if let Some(pos) = lineality.iter().position(|l| !dot(h, l).is_zero()) {
            let mut l0 = lineality.swap_remove(pos);
            let hl0 = dot(h, &l0);
            for l in lineality.iter_mut() {
                let c = dot(h, l);
                if !c.is_zero() {
                    axpy(l, &(-(c / &hl0)), &l0);
                }
            }
            for r in rays.iter_mut() {
                let c = dot(h, &r.v);
                if !c.is_zero() {
                    axpy(&mut r.v, &(-(c / &hl0)), &l0);
                    normalize(&mut r.v);
                }
                r.zeros |= bit;
            }
            if hl0 < Rational::zero() {
                for x in l0.iter_mut() {
                    *x = -x.clone();
                }
            }
            normalize(&mut l0);
            // tight on every earlier constraint (they vanish on the lineality)
            rays.push(Ray { v: l0, zeros: bit - 1 });
            continue;
        }

        let vals: Vec<Rational> = rays.iter().map(|r| dot(h, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > Rational::zero()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < Rational::zero()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            if vals[i] >= Rational::zero() {
                let zeros = if vals[i].is_zero() { r.zeros | bit } else { r.zeros };
                next.push(Ray { v: r.v.clone(), zeros });
            }
        }
        let min_common = (d - lineality.len()).saturating_sub(2);
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros & rays[n].zeros;
                if (common.count_ones() as usize) < min_common {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || r.zeros & common != common);
                if !adjacent {
                    continue;
                }
                let mut v: Vec<Rational> = rays[p].v.iter().map(|x| x.clone() * &vals[n].abs()).collect();
                axpy(&mut v, &vals[p], &rays[n].v);
                normalize(&mut v);
                next.push(Ray { v, zeros: common | bit });
            }
        }
        rays = next;
    }

    if !lineality.is_empty() {
        return Err(Error::invalid("polytope is unbounded"));
    }
    let mut out = Vec::new();
    for r in rays {
        if r.v[0].is_zero() {
            return Err(Error::invalid("polytope is unbounded"));
        }
        let t = r.v[0].clone();
        let mut p = param.base.clone();
        for (k, dir) in param.directions.iter().enumerate() {
            let z = r.v[k + 1].clone() / &t;
            if !z.is_zero() {
                axpy(&mut p, &z, dir);
            }
        }
        out.push(p);
    }
    Ok(out)
}
