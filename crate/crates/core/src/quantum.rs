//! Dense state-vector and density-matrix simulation for small systems.
//!
//! Basis order follows the behavior tables: party 0 is the most significant
//! digit of the computational-basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenario::{Behavior, Bipartition, Scenario};

pub type C = Complex64;
pub type Matrix = DMatrix<C>;

/// Largest Hilbert-space dimension accepted by default (12 qubits).
pub const DEFAULT_DIM_CAP: usize = 1 << 12;
pub const DEFAULT_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn check_dims(dims: &[usize], cap: usize) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::invalid("every party needs local dimension >= 2"));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if total > cap {
        return Err(Error::cap("Hilbert-space dimension", total, cap));
    }
    Ok(total)
}

/// Splits a basis index into per-party digits.
fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for p in (0..dims.len()).rev() {
        out[p] = idx % dims[p];
        idx /= dims[p];
    }
    out
}

fn compose(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (d, dim)| acc * dim + d)
}

/// Index maps `full index -> (subsystem index, environment index)`.
fn split_indices(dims: &[usize], parties: &[usize]) -> (usize, usize, Vec<(usize, usize)>) {
    let total: usize = dims.iter().product();
    let d_sub: usize = parties.iter().map(|&p| dims[p]).product();
    let env: Vec<usize> = (0..dims.len()).filter(|p| !parties.contains(p)).collect();
    let map = (0..total)
        .map(|i| {
            let dg = digits(i, dims);
            let s = compose(parties.iter().map(|&p| (dg[p], dims[p])));
            let e = compose(env.iter().map(|&p| (dg[p], dims[p])));
            (s, e)
        })
        .collect();
    (d_sub, total / d_sub, map)
}

fn check_parties(dims: &[usize], parties: &[usize]) -> Result<()> {
    for (k, &p) in parties.iter().enumerate() {
        if p >= dims.len() {
            return Err(Error::DimensionMismatch(format!("party {p} out of range for {} parties", dims.len())));
        }
        if parties[..k].contains(&p) {
            return Err(Error::invalid(format!("party {p} listed twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: DVector<C>,
    dims: Vec<usize>,
}

impl PureState {
    /// Requires unit norm within 1e-12.
    pub fn new(amplitudes: Vec<C>, dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims, DEFAULT_DIM_CAP)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amplitudes.len()
            )));
        }
        let v = DVector::from_vec(amplitudes);
        if (v.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {} is not 1", v.norm())));
        }
        Ok(PureState { amplitudes: v, dims })
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(amplitudes: Vec<C>, dims: Vec<usize>) -> Result<Self> {
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::invalid("zero vector is not a state"));
        }
        Self::new(amplitudes.into_iter().map(|a| a / n).collect(), dims)
    }

    pub fn basis(dims: Vec<usize>, digits_: &[usize]) -> Result<Self> {
        let total = check_dims(&dims, DEFAULT_DIM_CAP)?;
        if digits_.len() != dims.len() || digits_.iter().zip(&dims).any(|(d, n)| d >= n) {
            return Err(Error::DimensionMismatch("basis label does not fit dims".into()));
        }
        let mut amps = vec![C::new(0.0, 0.0); total];
        amps[compose(digits_.iter().copied().zip(dims.iter().copied()))] = c(1.0);
        Self::new(amps, dims)
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        Self::basis(vec![2; n_qubits], &vec![0; n_qubits])
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let total = 1usize << n;
        let mut amps = vec![C::new(0.0, 0.0); total];
        amps[0] = c(1.0);
        amps[total - 1] = c(1.0);
        Self::normalized(amps, vec![2; n])
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        Self::normalized(vec![c(0.0), c(1.0), c(-1.0), c(0.0)], vec![2, 2]).expect("singlet")
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        Self::ghz(2).expect("phi+")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &DVector<C> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|ψ⟩ ⊗ |φ⟩` with the parties of `other` appended.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims, DEFAULT_DIM_CAP)?;
        Ok(PureState { amplitudes: amps, dims })
    }

    /// Applies `op` (acting on the listed parties, in listed order) without
    /// renormalizing.
    pub fn apply(&self, parties: &[usize], op: &Matrix) -> Result<DVector<C>> {
        check_parties(&self.dims, parties)?;
        let (d_sub, d_env, map) = split_indices(&self.dims, parties);
        if op.nrows() != d_sub || op.ncols() != d_sub {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, subsystem dimension is {d_sub}",
                op.nrows(),
                op.ncols()
            )));
        }
        let mut m = Matrix::zeros(d_sub, d_env);
        for (i, &(s, e)) in map.iter().enumerate() {
            m[(s, e)] = self.amplitudes[i];
        }
        let out = op * m;
        Ok(DVector::from_iterator(map.len(), map.iter().map(|&(s, e)| out[(s, e)])))
    }

    /// Applies a unitary on the listed parties.
    pub fn apply_unitary(&self, parties: &[usize], u: &Matrix) -> Result<PureState> {
        let amplitudes = self.apply(parties, u)?;
        PureState::new(amplitudes.iter().copied().collect(), self.dims.clone())
    }

    /// Projects the listed parties with one effect each; returns the branch
    /// probability and, when it is positive, the renormalized post-state.
    pub fn partial_measure(&self, parties: &[usize], effects: &[Matrix]) -> Result<(f64, Option<PureState>)> {
        if parties.len() != effects.len() {
            return Err(Error::DimensionMismatch("one effect per listed party expected".into()));
        }
        let mut v = self.clone();
        for (&p, e) in parties.iter().zip(effects) {
            if !is_projector(e) {
                return Err(Error::invalid(format!("effect on party {p} is not a projector")));
            }
            v.amplitudes = v.apply(&[p], e)?;
        }
        let prob = v.amplitudes.norm_squared();
        if prob <= NORM_TOL {
            return Ok((0.0, None));
        }
        v.amplitudes /= c(prob.sqrt());
        Ok((prob, Some(v)))
    }

    /// Reduced density matrix on `parties` (listed order).
    pub fn reduced(&self, parties: &[usize]) -> Result<Matrix> {
        check_parties(&self.dims, parties)?;
        let (d_sub, d_env, map) = split_indices(&self.dims, parties);
        let mut m = Matrix::zeros(d_sub, d_env);
        for (i, &(s, e)) in map.iter().enumerate() {
            m[(s, e)] = self.amplitudes[i];
        }
        Ok(&m * m.adjoint())
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator { matrix: &self.amplitudes * self.amplitudes.adjoint(), dims: self.dims.clone() }
    }

    /// Whether the reduced state on the smaller side of `cut` is maximally
    /// mixed within `tol` (max-abs entry difference).
    pub fn is_maximally_entangled(&self, cut: &Bipartition, tol: f64) -> Result<bool> {
        if cut.parties() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "cut over {} parties, state has {}",
                cut.parties(),
                self.dims.len()
            )));
        }
        let da: usize = cut.block_a().iter().map(|&p| self.dims[p]).product();
        let db: usize = cut.block_b().iter().map(|&p| self.dims[p]).product();
        let side = if da <= db { cut.block_a() } else { cut.block_b() };
        let rho = self.reduced(side)?;
        let d = rho.nrows();
        let target = Matrix::identity(d, d) / c(d as f64);
        Ok((rho - target).iter().all(|z| z.norm() <= tol))
    }

    /// Hadamard, phase and CNOT on qubit parties (used by oracle tests).
    pub fn h(&self, q: usize) -> Result<PureState> {
        self.apply_unitary(&[q], &gates::h())
    }

    pub fn s(&self, q: usize) -> Result<PureState> {
        self.apply_unitary(&[q], &gates::s())
    }

    pub fn cnot(&self, control: usize, target: usize) -> Result<PureState> {
        self.apply_unitary(&[control, target], &gates::cnot())
    }
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: Matrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Checks Hermiticity, unit trace and eigenvalues ≥ −1e-10.
    pub fn new(matrix: Matrix, dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims, DEFAULT_DIM_CAP)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims give {total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > NORM_TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        if (matrix.trace() - c(1.0)).norm() > NORM_TOL {
            return Err(Error::invalid("density matrix trace is not 1"));
        }
        if min_eigenvalue(&matrix) < -PSD_TOL {
            return Err(Error::invalid("density matrix has a negative eigenvalue"));
        }
        Ok(DensityOperator { matrix, dims })
    }

    /// `Σ w_k |ψ_k⟩⟨ψ_k|`.
    pub fn mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::invalid("empty mixture"))?;
        let dims = first.1.dims.clone();
        let d = first.1.dim();
        let mut m = Matrix::zeros(d, d);
        for (w, s) in terms {
            if s.dims != dims {
                return Err(Error::DimensionMismatch("mixture terms have different dims".into()));
            }
            m += s.density().matrix * c(*w);
        }
        Self::new(m, dims)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `tr(ρ · E_{p0} ⊗ … )` with one effect per party.
    fn expectation(&self, effects: &[&Matrix]) -> C {
        let dims = &self.dims;
        let total = self.matrix.nrows();
        let dg: Vec<Vec<usize>> = (0..total).map(|i| digits(i, dims)).collect();
        // tr(ρE) = Σ_{ij} ρ_ji E_ij with E a product of local matrices
        let mut acc = C::new(0.0, 0.0);
        for i in 0..total {
            for j in 0..total {
                let r = self.matrix[(j, i)];
                if r.norm_sqr() == 0.0 {
                    continue;
                }
                let mut e = c(1.0);
                for (p, m) in effects.iter().enumerate() {
                    e *= m[(dg[i][p], dg[j][p])];
                    if e.norm_sqr() == 0.0 {
                        break;
                    }
                }
                acc += r * e;
            }
        }
        acc
    }
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn is_projector(e: &Matrix) -> bool {
    e.is_square() && (e * e - e).iter().all(|z| z.norm() <= 1e-9) && (e - e.adjoint()).iter().all(|z| z.norm() <= 1e-9)
}

/// Per party, per setting, a list of effects summing to the identity.
#[derive(Debug, Clone)]
pub struct MeasurementFamily {
    parties: Vec<Vec<Vec<Matrix>>>,
}

impl MeasurementFamily {
    pub fn new(parties: Vec<Vec<Vec<Matrix>>>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::invalid("measurement family has no parties"));
        }
        for (p, settings) in parties.iter().enumerate() {
            if settings.is_empty() {
                return Err(Error::invalid(format!("party {p} has no settings")));
            }
            let outcomes = settings[0].len();
            for (x, effects) in settings.iter().enumerate() {
                if effects.len() < 2 || effects.len() != outcomes {
                    return Err(Error::invalid(format!(
                        "party {p} setting {x}: every setting needs the same number (>= 2) of outcomes"
                    )));
                }
                let d = effects[0].nrows();
                let mut sum = Matrix::zeros(d, d);
                for e in effects {
                    if e.nrows() != d || !e.is_square() {
                        return Err(Error::DimensionMismatch(format!("party {p} setting {x}: effect shapes differ")));
                    }
                    if (e - e.adjoint()).iter().any(|z| z.norm() > NORM_TOL) || min_eigenvalue(e) < -NORM_TOL {
                        return Err(Error::invalid(format!("party {p} setting {x}: effect is not positive")));
                    }
                    sum += e;
                }
                if (sum - Matrix::identity(d, d)).iter().any(|z| z.norm() > NORM_TOL) {
                    return Err(Error::invalid(format!("party {p} setting {x}: effects do not sum to identity")));
                }
            }
        }
        Ok(MeasurementFamily { parties })
    }

    /// Two-outcome projective measurements of Hermitian ±1 observables.
    pub fn from_observables(parties: Vec<Vec<Matrix>>) -> Result<Self> {
        let fam = parties
            .into_iter()
            .map(|obs| obs.into_iter().map(|o| observable_projectors(&o)).collect())
            .collect();
        Self::new(fam)
    }

    pub fn settings(&self) -> &[Vec<Vec<Matrix>>] {
        &self.parties
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.parties.iter().map(|s| s[0][0].nrows()).collect()
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(
            self.parties.iter().map(Vec::len).collect(),
            self.parties.iter().map(|s| s[0].len()).collect(),
        )
    }
}

/// `(I ± O)/2` for a ±1-valued observable; outcome 0 is the +1 eigenspace.
pub fn observable_projectors(o: &Matrix) -> Vec<Matrix> {
    let id = Matrix::identity(o.nrows(), o.ncols());
    vec![(&id + o) * c(0.5), (&id - o) * c(0.5)]
}

/// `cos θ · Z + sin θ · X`.
pub fn planar_observable(theta: f64) -> Matrix {
    gates::z() * c(theta.cos()) + gates::x() * c(theta.sin())
}

/// Two parties measuring planar observables at the given angles.
pub fn planar_measurements(angles_a: &[f64], angles_b: &[f64]) -> Result<MeasurementFamily> {
    MeasurementFamily::from_observables(vec![
        angles_a.iter().map(|&t| planar_observable(t)).collect(),
        angles_b.iter().map(|&t| planar_observable(t)).collect(),
    ])
}

/// CHSH-optimal planar settings: A at 0 and π/2, B at ±π/4.
pub fn chsh_measurements() -> MeasurementFamily {
    let pi = std::f64::consts::PI;
    planar_measurements(&[0.0, pi / 2.0], &[pi / 4.0, -pi / 4.0]).expect("planar observables are valid")
}

/// Singlet under [`chsh_measurements`]; every correlator is ±1/√2.
pub fn tsirelson_box() -> Behavior<f64> {
    born_table_pure(&PureState::singlet(), &chsh_measurements()).expect("dimensions agree")
}

/// Chained-Bell settings: `A_k = (k−1)π/N`, `B_k = (2k−1)π/(2N)`.
pub fn chained_measurements(n: usize) -> Result<MeasurementFamily> {
    if n < 2 {
        return Err(Error::invalid(format!("chained scenario needs N >= 2, got {n}")));
    }
    let pi = std::f64::consts::PI;
    let nf = n as f64;
    let a: Vec<f64> = (1..=n).map(|k| (k as f64 - 1.0) * pi / nf).collect();
    let b: Vec<f64> = (1..=n).map(|k| (2.0 * k as f64 - 1.0) * pi / (2.0 * nf)).collect();
    planar_measurements(&a, &b)
}

/// Born-rule table of `state` under `meas` (float mode).
pub fn born_table(state: &DensityOperator, meas: &MeasurementFamily) -> Result<Behavior<f64>> {
    if meas.local_dims() != state.dims {
        return Err(Error::DimensionMismatch(format!(
            "measurement dims {:?} do not match state dims {:?}",
            meas.local_dims(),
            state.dims
        )));
    }
    let sc = meas.scenario()?;
    let table: Vec<f64> = (0..sc.table_len())
        .map(|idx| {
            let x = sc.settings_of(idx / sc.num_outcome_tuples());
            let a = sc.outcomes_of(idx % sc.num_outcome_tuples());
            let effects: Vec<&Matrix> = (0..x.len()).map(|p| &meas.parties[p][x[p]][a[p]]).collect();
            let v = state.expectation(&effects).re;
            if v.abs() < 1e-15 { 0.0 } else { v }
        })
        .collect();
    Behavior::from_table(sc, table)
}

/// Born-rule table for a pure state, computed on the state vector.
pub fn born_table_pure(state: &PureState, meas: &MeasurementFamily) -> Result<Behavior<f64>> {
    if meas.local_dims() != state.dims {
        return Err(Error::DimensionMismatch(format!(
            "measurement dims {:?} do not match state dims {:?}",
            meas.local_dims(),
            state.dims
        )));
    }
    let sc = meas.scenario()?;
    let mut table = Vec::with_capacity(sc.table_len());
    for idx in 0..sc.table_len() {
        let x = sc.settings_of(idx / sc.num_outcome_tuples());
        let a = sc.outcomes_of(idx % sc.num_outcome_tuples());
        let mut v = state.clone();
        for p in 0..x.len() {
            v.amplitudes = v.apply(&[p], &meas.parties[p][x[p]][a[p]])?;
        }
        let p = state.amplitudes.dotc(&v.amplitudes).re;
        table.push(if p.abs() < 1e-15 { 0.0 } else { p });
    }
    Behavior::from_table(sc, table)
}

pub mod gates {
    use super::{c, Matrix, C};

    fn m2(a: [[C; 2]; 2]) -> Matrix {
        Matrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
    }

    pub fn id() -> Matrix {
        Matrix::identity(2, 2)
    }

    pub fn x() -> Matrix {
        m2([[c(0.0), c(1.0)], [c(1.0), c(0.0)]])
    }

    pub fn y() -> Matrix {
        m2([[c(0.0), C::new(0.0, -1.0)], [C::new(0.0, 1.0), c(0.0)]])
    }

    pub fn z() -> Matrix {
        m2([[c(1.0), c(0.0)], [c(0.0), c(-1.0)]])
    }

    pub fn h() -> Matrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        m2([[c(s), c(s)], [c(s), c(-s)]])
    }

    pub fn s() -> Matrix {
        m2([[c(1.0), c(0.0)], [c(0.0), C::new(0.0, 1.0)]])
    }

    /// Control is the first listed qubit.
    pub fn cnot() -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = c(1.0);
        m[(1, 1)] = c(1.0);
        m[(2, 3)] = c(1.0);
        m[(3, 2)] = c(1.0);
        m
    }

    /// Single-qubit Pauli by letter (`I`, `X`, `Y`, `Z`).
    pub fn pauli(letter: char) -> Option<Matrix> {
        match letter {
            'I' => Some(id()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }

    /// Kronecker product of several matrices, first factor most significant.
    pub fn kron_all(ms: &[Matrix]) -> Matrix {
        ms.iter().fold(Matrix::identity(1, 1), |acc, m| acc.kronecker(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn product_state_z_measurement_is_deterministic() {
        let s = PureState::zeros(2).unwrap();
        let m = MeasurementFamily::from_observables(vec![vec![gates::z()], vec![gates::z()]]).unwrap();
        let b = born_table_pure(&s, &m).unwrap();
        assert!(close(*b.get(&[0, 0], &[0, 0]), 1.0));
        assert!(close(*b.get(&[0, 0], &[1, 1]), 0.0));
    }

    #[test]
    fn singlet_chsh_settings_give_tsirelson_correlators() {
        let pi = std::f64::consts::PI;
        let m = planar_measurements(&[0.0, pi / 2.0], &[pi / 4.0, -pi / 4.0]).unwrap();
        let b = born_table(&PureState::singlet().density(), &m).unwrap();
        assert!(b.validate().is_valid());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert!((b.correlator(&x).abs() - r).abs() < 1e-12);
        }
        let pure = born_table_pure(&PureState::singlet(), &m).unwrap();
        assert!(b.max_abs_diff(&pure) < 1e-12);
    }

    #[test]
    fn ghz_xy_gives_mermin_box() {
        let obs = vec![vec![gates::x(), gates::y()]; 3];
        let m = MeasurementFamily::from_observables(obs).unwrap();
        let b = born_table_pure(&PureState::ghz(3).unwrap(), &m).unwrap();
        let mermin = crate::scenario::boxes::mermin_box::<f64>();
        assert!(b.max_abs_diff(&mermin) < 1e-12);
        assert!(b.correlator(&[0, 0, 0]).to_f64() > 0.999);
    }

    #[test]
    fn ghz_x_projection_leaves_bell_pair() {
        let plus = observable_projectors(&gates::x()).remove(0);
        let (p, post) = PureState::ghz(3).unwrap().partial_measure(&[2], &[plus]).unwrap();
        assert!(close(p, 0.5));
        let post = post.unwrap();
        let cut = Bipartition::new(3, &[0]).unwrap();
        assert!(post.is_maximally_entangled(&cut, DEFAULT_TOL).unwrap());
        let pair = post.reduced(&[0, 1]).unwrap();
        let bell = PureState::phi_plus().density();
        assert!((pair - bell.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_probability_branch_is_flagged() {
        let one = observable_projectors(&gates::z()).remove(1);
        let (p, post) = PureState::zeros(1).unwrap().partial_measure(&[0], &[one]).unwrap();
        assert_eq!(p, 0.0);
        assert!(post.is_none());
    }

    #[test]
    fn maximal_entanglement_examples() {
        let cut = Bipartition::new(2, &[0]).unwrap();
        assert!(PureState::phi_plus().is_maximally_entangled(&cut, DEFAULT_TOL).unwrap());
        assert!(!PureState::zeros(2).unwrap().is_maximally_entangled(&cut, DEFAULT_TOL).unwrap());
        let s = PureState::normalized(vec![c(1.0), c(1.0), c(1.0), c(-1.0)], vec![2, 2]).unwrap();
        assert!(s.is_maximally_entangled(&cut, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn chained_families_are_valid() {
        assert!(chained_measurements(1).is_err());
        for n in 2..=6 {
            let m = chained_measurements(n).unwrap();
            let b = born_table_pure(&PureState::singlet(), &m).unwrap();
            assert!(b.validate().is_valid(), "N = {n}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(PureState::new(vec![c(1.0), c(1.0)], vec![2]).is_err());
        let bad = Matrix::from_diagonal_element(2, 2, c(0.7));
        assert!(MeasurementFamily::new(vec![vec![vec![bad.clone(), bad]]]).is_err());
        let m = MeasurementFamily::from_observables(vec![vec![gates::z()]]).unwrap();
        assert!(born_table_pure(&PureState::zeros(2).unwrap(), &m).is_err());
        let not_psd = Matrix::from_diagonal(&DVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityOperator::new(not_psd, vec![2]).is_err());
    }

    #[test]
    fn gates_build_ghz() {
        let s = PureState::zeros(3).unwrap().h(0).unwrap().cnot(0, 1).unwrap().cnot(1, 2).unwrap();
        let ghz = PureState::ghz(3).unwrap();
        assert!((s.amplitudes().dotc(ghz.amplitudes()).norm() - 1.0).abs() < 1e-12);
    }
}
