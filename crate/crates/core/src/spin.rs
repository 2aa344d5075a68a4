//! Spin-j states and angular-momentum operators.
//!
//! A two-mode state of `n` photons maps onto a spin `j = n/2`; the Fock state
//! with `n_a` and `n_b` photons in the two arms is the `J_z` eigenstate with
//! `m = (n_a - n_b)/2`. Every vector and matrix here is expressed in the `J_z`
//! eigenbasis with components ordered by ascending `m`, i.e. array index `k`
//! holds `m = -j + k`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a constructed state has unit norm.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Relative tolerance within which two moduli count as tied when fixing the
/// phase of an eigenvector.
const PHASE_TIE_TOLERANCE: f64 = 1e-9;

/// Total angular momentum `j`, stored as the integer `2j` (the photon number).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinJ {
    two_j: u32,
}

impl SpinJ {
    /// Largest `2j` accepted by [`SpinJ::new`].
    pub const DEFAULT_MAX_TWO_J: u32 = 200;

    pub fn new(two_j: u32) -> Result<Self> {
        Self::with_limit(two_j, Self::DEFAULT_MAX_TWO_J)
    }

    /// Like [`SpinJ::new`] but with a caller-chosen ceiling on `2j`.
    pub fn with_limit(two_j: u32, max_two_j: u32) -> Result<Self> {
        if two_j > max_two_j {
            return Err(Error::InvalidSpin {
                two_j,
                max: max_two_j,
            });
        }
        Ok(Self { two_j })
    }

    /// Spin carried by `photons` photons distributed over the two modes.
    pub fn from_photons(photons: u32) -> Result<Self> {
        Self::new(photons)
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn photons(self) -> u32 {
        self.two_j
    }

    pub fn j(self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    pub fn is_half_integer(self) -> bool {
        self.two_j % 2 == 1
    }

    /// Eigenvalue `j(j+1)` of the Casimir operator.
    pub fn casimir(self) -> f64 {
        let j = self.j();
        j * (j + 1.0)
    }

    /// `m` value stored at array index `index`.
    pub fn m_at(self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    pub fn projection_at(self, index: usize) -> SpinProjection {
        SpinProjection::from_twice(2 * index as i32 - self.two_j as i32)
    }

    /// Array index of `m`, or `None` when `m` is not a projection of this spin.
    pub fn index_of(self, m: SpinProjection) -> Option<usize> {
        let shifted = m.twice() + self.two_j as i32;
        if shifted < 0 || shifted % 2 != 0 || shifted > 2 * self.two_j as i32 {
            return None;
        }
        Some((shifted / 2) as usize)
    }

    /// All `m` values in storage order.
    pub fn projections(self) -> impl Iterator<Item = SpinProjection> {
        (0..self.dim()).map(move |k| self.projection_at(k))
    }

    pub fn highest(self) -> SpinProjection {
        SpinProjection::from_twice(self.two_j as i32)
    }

    pub fn lowest(self) -> SpinProjection {
        SpinProjection::from_twice(-(self.two_j as i32))
    }
}

impl fmt::Display for SpinJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&SpinProjection::from_twice(self.two_j as i32), f)
    }
}

/// A half-integer angular-momentum projection `m`, stored as `2m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinProjection(i32);

impl SpinProjection {
    pub const ZERO: Self = Self(0);

    pub fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    /// Integer projection `m`.
    pub fn integer(m: i32) -> Self {
        Self(2 * m)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for SpinProjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for SpinProjection {
    type Err = Error;

    /// Accepts integers (`-2`, `+3`) and halves (`1/2`, `-3/2`, `0.5`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse spin projection {s:?}"));
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(Self(2 * num)),
                "2" => Ok(Self(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(m) = t.parse::<i32>() {
            return Ok(Self(2 * m));
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-12 {
            return Err(bad());
        }
        Ok(Self(twice.round() as i32))
    }
}

/// Normalized pure state of a spin-j system in the `J_z` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    j: SpinJ,
    amps: DVector<Complex64>,
}

impl SpinState {
    /// Wraps amplitudes that are already normalized to within [`NORM_TOLERANCE`].
    pub fn new(j: SpinJ, amps: DVector<Complex64>) -> Result<Self> {
        check_dim(j.dim(), amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { j, amps })
    }

    /// Normalizes `amps`; fails only for the zero vector.
    pub fn normalized(j: SpinJ, amps: DVector<Complex64>) -> Result<Self> {
        check_dim(j.dim(), amps.len())?;
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            j,
            amps: amps.unscale(norm),
        })
    }

    pub fn from_slice(j: SpinJ, amps: &[Complex64]) -> Result<Self> {
        Self::new(j, DVector::from_column_slice(amps))
    }

    pub fn spin(&self) -> SpinJ {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amps
    }

    /// Amplitude `psi_m` for projection `m`.
    pub fn amplitude(&self, m: SpinProjection) -> Option<Complex64> {
        self.j.index_of(m).map(|k| self.amps[k])
    }

    /// Moduli `r_m = |psi_m|`.
    pub fn moduli(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm()).collect()
    }

    /// Arguments `phi_m = arg psi_m`.
    pub fn phases(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.arg()).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &SpinState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Number of amplitudes with nonzero modulus.
    pub fn support_size(&self) -> usize {
        self.amps.iter().filter(|a| a.norm_sqr() > 0.0).count()
    }
}

/// Dense `(2j+1) x (2j+1)` complex matrix acting on a spin-j space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    j: SpinJ,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(j: SpinJ, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != j.dim() || entries.ncols() != j.dim() {
            return Err(Error::DimensionMismatch {
                expected: j.dim(),
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { j, entries })
    }

    pub fn identity(j: SpinJ) -> Self {
        Self {
            j,
            entries: DMatrix::identity(j.dim(), j.dim()),
        }
    }

    pub fn spin(&self) -> SpinJ {
        self.j
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Element `<j, m'| M |j, m>` by array index.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            j: self.j,
            entries: self.entries.adjoint(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.j.dim(), rhs.j.dim())?;
        Ok(Self {
            j: self.j,
            entries: &self.entries * &rhs.entries,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.j.dim(), rhs.j.dim())?;
        Ok(Self {
            j: self.j,
            entries: &self.entries + &rhs.entries,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            j: self.j,
            entries: &self.entries * factor,
        }
    }

    /// `[self, rhs] = self rhs - rhs self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.j.dim(), rhs.j.dim())?;
        Ok(Self {
            j: self.j,
            entries: &self.entries * &rhs.entries - &rhs.entries * &self.entries,
        })
    }

    /// Applies the operator to a state vector (the result is not renormalized).
    pub fn apply(&self, state: &SpinState) -> Result<DVector<Complex64>> {
        check_dim(self.j.dim(), state.dim())?;
        Ok(&self.entries * state.amplitudes())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `M - M^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Largest elementwise modulus of `M^dagger M - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.entries.adjoint() * &self.entries;
        let id = DMatrix::<Complex64>::identity(prod.nrows(), prod.ncols());
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// The angular-momentum operators of one spin.
#[derive(Clone, Debug)]
pub struct Generators {
    pub jx: OperatorMatrix,
    pub jy: OperatorMatrix,
    pub jz: OperatorMatrix,
    pub jsq: OperatorMatrix,
}

/// Builds `J_x`, `J_y`, `J_z` and `J^2` from the ladder operators, with
/// `<j, m+1| J_+ |j, m> = sqrt(j(j+1) - m(m+1))` and `[J_x, J_y] = i J_z`.
pub fn make_generators(j: SpinJ) -> Generators {
    let d = j.dim();
    let raise = raising_operator(j);
    let lower = raise.transpose();
    let half = Complex64::new(0.5, 0.0);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let jx = (&raise + &lower).map(|x| Complex64::new(x, 0.0) * half);
    let jy = (&raise - &lower).map(|x| Complex64::new(x, 0.0) * minus_half_i);
    let jz = DMatrix::from_diagonal(&DVector::from_fn(d, |k, _| Complex64::new(j.m_at(k), 0.0)));
    let jsq = DMatrix::identity(d, d) * Complex64::new(j.casimir(), 0.0);
    Generators {
        jx: OperatorMatrix { j, entries: jx },
        jy: OperatorMatrix { j, entries: jy },
        jz: OperatorMatrix { j, entries: jz },
        jsq: OperatorMatrix { j, entries: jsq },
    }
}

/// Real matrix of `J_+` in the ascending-m basis.
pub(crate) fn raising_operator(j: SpinJ) -> DMatrix<f64> {
    let d = j.dim();
    let mut raise = DMatrix::zeros(d, d);
    for k in 0..d.saturating_sub(1) {
        let m = j.m_at(k);
        raise[(k + 1, k)] = (j.casimir() - m * (m + 1.0)).max(0.0).sqrt();
    }
    raise
}

/// Real symmetric `J_x`.
pub(crate) fn jx_real(j: SpinJ) -> DMatrix<f64> {
    let raise = raising_operator(j);
    (&raise + raise.transpose()) * 0.5
}

/// Eigenvectors of a real symmetric matrix whose spectrum is `-j..=j`,
/// with columns sorted by ascending eigenvalue.
pub(crate) struct SortedEigen {
    pub vectors: DMatrix<f64>,
}

/// Eigenvectors of `J_x` (real), columns ordered `m = -j..=j`.
pub(crate) fn jx_eigen(j: SpinJ) -> SortedEigen {
    let d = j.dim();
    let eig = SymmetricEigen::new(jx_real(j));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    SortedEigen { vectors }
}

/// Columns are `|j, m>_y` in the `J_z` basis, ordered by ascending `m`.
///
/// `J_y = U J_x U^dagger` with `U = exp(-i pi/2 J_z)`, so the `J_y`
/// eigenvectors are the real `J_x` eigenvectors with component `k` multiplied
/// by `exp(-i pi m_k / 2)`. Each column is then rotated so that its
/// largest-modulus component (lowest index on ties) is real and positive.
pub fn y_eigenbasis(j: SpinJ) -> OperatorMatrix {
    let d = j.dim();
    let jx = jx_eigen(j);
    let mut v = DMatrix::from_fn(d, d, |r, c| {
        Complex64::from_polar(1.0, -FRAC_PI_2 * j.m_at(r)) * jx.vectors[(r, c)]
    });
    for mut col in v.column_iter_mut() {
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max * (1.0 - PHASE_TIE_TOLERANCE))
            .unwrap_or(0);
        let p = col[pivot];
        let phase = p.conj() / p.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
    OperatorMatrix { j, entries: v }
}

/// Fock probe `|j, m>_z`.
pub fn make_fock_z(j: SpinJ, m: SpinProjection) -> Result<SpinState> {
    let k = j.index_of(m).ok_or_else(|| Error::InvalidM {
        j: j.to_string(),
        m: m.to_string(),
    })?;
    let mut amps = DVector::zeros(j.dim());
    amps[k] = Complex64::new(1.0, 0.0);
    Ok(SpinState { j, amps })
}

/// NOON probe `(|j, +j>_y + e^{i zeta} |j, -j>_y) / sqrt 2` in the `J_z` basis.
///
/// The relative phase is defined so that, after the interferometer, the
/// photon-counting distribution is exactly
/// `binom(2j, j+m) (1 + (-1)^{j+m} cos(2j(theta + pi/2) - zeta)) / 4^j`
/// for every `j`. With the eigenvector phase convention of [`y_eigenbasis`]
/// that needs an extra `-pi/2` on the `|j,-j>_y` branch when `j` is half-odd.
pub fn make_noon(j: SpinJ, zeta: f64) -> Result<SpinState> {
    if j.two_j() < 1 {
        return Err(Error::InvalidArgument(
            "NOON probe needs at least one photon".into(),
        ));
    }
    let basis = y_eigenbasis(j);
    let offset = if j.is_half_integer() { -FRAC_PI_2 } else { 0.0 };
    let rel = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, zeta + offset);
    let top = basis.entries.column(j.dim() - 1);
    let bottom = basis.entries.column(0);
    let amps = top * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0) + bottom * rel;
    SpinState::normalized(j, amps)
}

/// Phase state `(2j+1)^{-1/2} sum_m e^{i m gamma} |j, m>_y`.
pub fn make_phase_state(j: SpinJ, gamma: f64) -> Result<SpinState> {
    let basis = y_eigenbasis(j);
    let weight = 1.0 / (j.dim() as f64).sqrt();
    let coeffs = DVector::from_fn(j.dim(), |k, _| {
        Complex64::from_polar(weight, j.m_at(k) * gamma)
    });
    SpinState::normalized(j, &basis.entries * coeffs)
}

/// `<psi| M |psi>` for Hermitian `M`.
pub fn expectation(state: &SpinState, op: &OperatorMatrix) -> Result<f64> {
    check_dim(op.j.dim(), state.dim())?;
    let scale = op.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = op.hermiticity_defect();
    if defect > 1e-12 * scale {
        return Err(Error::NonHermitian { deviation: defect });
    }
    let value = state.amps.dotc(&(&op.entries * &state.amps));
    if value.im.abs() > 1e-12 * scale {
        return Err(Error::NonHermitian {
            deviation: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// Which `J_z` eigenstate a Fock probe uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FockLevel {
    /// A fixed projection, valid only for spins that contain it.
    Fixed(SpinProjection),
    /// `m = +j`: all photons in one input arm.
    Highest,
    /// `m = -j`.
    Lowest,
}

impl FockLevel {
    pub fn resolve(self, j: SpinJ) -> SpinProjection {
        match self {
            Self::Fixed(m) => m,
            Self::Highest => j.highest(),
            Self::Lowest => j.lowest(),
        }
    }
}

impl fmt::Display for FockLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(m) => write!(f, "{m}"),
            Self::Highest => f.write_str("+j"),
            Self::Lowest => f.write_str("-j"),
        }
    }
}

impl FromStr for FockLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "j" | "+j" => Ok(Self::Highest),
            "-j" => Ok(Self::Lowest),
            other => other.parse().map(Self::Fixed),
        }
    }
}

/// The probe families compared by the sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProbeFamily {
    FockZ(FockLevel),
    Noon { zeta: f64 },
    PhaseState { gamma: f64 },
}

impl ProbeFamily {
    pub fn build(&self, j: SpinJ) -> Result<SpinState> {
        match *self {
            Self::FockZ(level) => make_fock_z(j, level.resolve(j)),
            Self::Noon { zeta } => make_noon(j, zeta),
            Self::PhaseState { gamma } => make_phase_state(j, gamma),
        }
    }

    /// Short identifier used in tables: `noon`, `fockz`, `phase`.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::FockZ(_) => "fockz",
            Self::Noon { .. } => "noon",
            Self::PhaseState { .. } => "phase",
        }
    }
}

impl fmt::Display for ProbeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FockZ(level) => write!(f, "fockz(m={level})"),
            Self::Noon { zeta } => write!(f, "noon(zeta={zeta})"),
            Self::PhaseState { gamma } => write!(f, "phase(gamma={gamma})"),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spin(two_j: u32) -> SpinJ {
        SpinJ::new(two_j).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn spin_indexing() {
        let j = spin(3);
        assert_eq!(j.dim(), 4);
        assert_eq!(j.m_at(0), -1.5);
        assert_eq!(j.index_of(SpinProjection::from_twice(3)), Some(3));
        assert_eq!(j.index_of(SpinProjection::ZERO), None);
        assert_eq!(j.index_of(SpinProjection::from_twice(5)), None);
        assert!(SpinJ::new(201).is_err());
        assert!(SpinJ::with_limit(400, 400).is_ok());
    }

    #[test]
    fn projection_parsing() {
        assert_eq!("1/2".parse::<SpinProjection>().unwrap().twice(), 1);
        assert_eq!("-3/2".parse::<SpinProjection>().unwrap().twice(), -3);
        assert_eq!("+2".parse::<SpinProjection>().unwrap().twice(), 4);
        assert_eq!("0.5".parse::<SpinProjection>().unwrap().twice(), 1);
        assert!("0.3".parse::<SpinProjection>().is_err());
        assert_eq!("+j".parse::<FockLevel>().unwrap(), FockLevel::Highest);
        assert_eq!(SpinProjection::from_twice(-3).to_string(), "-3/2");
    }

    #[test]
    fn generators_spin_half() {
        let g = make_generators(spin(1));
        assert_abs_diff_eq!(g.jz.get(0, 0).re, -0.5);
        assert_abs_diff_eq!(g.jz.get(1, 1).re, 0.5);
        assert_abs_diff_eq!(g.jz.get(0, 1).norm(), 0.0);
    }

    #[test]
    fn generators_spin_one() {
        let g = make_generators(spin(2));
        for k in 0..3 {
            assert_abs_diff_eq!(g.jsq.get(k, k).re, 2.0);
        }
        let s = 2f64.sqrt() / 2.0;
        for k in 0..2 {
            assert_abs_diff_eq!(g.jx.get(k, k + 1).re, s, epsilon = 1e-15);
            assert_abs_diff_eq!(g.jx.get(k + 1, k).re, s, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(g.jx.get(0, 2).norm(), 0.0);
    }

    #[test]
    fn commutation_relations() {
        let i = Complex64::new(0.0, 1.0);
        for two_j in 0..=50 {
            let g = make_generators(spin(two_j));
            let cases = [
                (&g.jx, &g.jy, &g.jz),
                (&g.jy, &g.jz, &g.jx),
                (&g.jz, &g.jx, &g.jy),
            ];
            for (a, b, c) in cases {
                let lhs = a.commutator(b).unwrap();
                let rhs = c.scale(i);
                assert!(lhs.max_abs_diff(&rhs) < 1e-12, "two_j={two_j}");
            }
            let sum =
                g.jx.matmul(&g.jx)
                    .unwrap()
                    .add(&g.jy.matmul(&g.jy).unwrap())
                    .unwrap()
                    .add(&g.jz.matmul(&g.jz).unwrap())
                    .unwrap();
            assert!(sum.max_abs_diff(&g.jsq) < 1e-12);
            assert!(
                g.jx.is_hermitian(1e-14) && g.jy.is_hermitian(1e-14) && g.jz.is_hermitian(1e-14)
            );
        }
    }

    #[test]
    fn fock_states() {
        let s = make_fock_z(spin(2), SpinProjection::ZERO).unwrap();
        assert_eq!(s.amplitudes().as_slice(), &[c(0.0), c(1.0), c(0.0)]);
        let s = make_fock_z(spin(3), SpinProjection::from_twice(3)).unwrap();
        assert_eq!(s.amplitudes().as_slice(), &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let err = make_fock_z(spin(2), SpinProjection::from_twice(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidM { .. }));
        let err = make_fock_z(spin(1), SpinProjection::integer(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidM { .. }));
    }

    #[test]
    fn y_basis_spin_half() {
        // J_y in ascending order is (1/2)[[0, i], [-i, 0]]; the eigenvector for
        // -1/2 is (1, i)/sqrt2 and for +1/2 is (1, -i)/sqrt2.
        let v = y_eigenbasis(spin(1));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v.get(0, 0).re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(v.get(1, 0).im, s, epsilon = 1e-15);
        assert_abs_diff_eq!(v.get(0, 1).re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(v.get(1, 1).im, -s, epsilon = 1e-15);
    }

    #[test]
    fn y_basis_eigen_equation_and_unitarity() {
        for two_j in [0, 1, 2, 3, 8, 25, 50, 101, 200] {
            let j = spin(two_j);
            let g = make_generators(j);
            let v = y_eigenbasis(j);
            assert!(
                v.is_unitary(1e-12),
                "two_j={two_j} defect={}",
                v.unitarity_defect()
            );
            for k in 0..j.dim() {
                let col = v.entries().column(k);
                let resid = (g.jy.entries() * col - col * c(j.m_at(k))).camax();
                assert!(resid < 1e-10, "two_j={two_j} k={k} resid={resid}");
                let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let pivot = col
                    .iter()
                    .position(|z| z.norm() >= max * (1.0 - 1e-9))
                    .unwrap();
                assert!(col[pivot].im.abs() < 1e-15 && col[pivot].re > 0.0);
            }
        }
    }

    #[test]
    fn noon_moments() {
        for two_j in 1..=30 {
            let j = spin(two_j);
            let g = make_generators(j);
            let jy2 = g.jy.matmul(&g.jy).unwrap();
            for zeta in [0.0, 0.4, 2.0] {
                let s = make_noon(j, zeta).unwrap();
                assert!((s.norm() - 1.0).abs() < 1e-12);
                assert!(expectation(&s, &g.jy).unwrap().abs() < 1e-10);
                let jj = j.j() * j.j();
                assert!((expectation(&s, &jy2).unwrap() - jj).abs() < 1e-10);
            }
        }
        assert!(make_noon(spin(0), 0.0).is_err());
    }

    #[test]
    fn phase_state_properties() {
        for two_j in [1, 2, 5, 10, 31] {
            let j = spin(two_j);
            let v = y_eigenbasis(j);
            for gamma in [0.0, 0.7, PI / 2.0] {
                let s = make_phase_state(j, gamma).unwrap();
                assert!((s.norm() - 1.0).abs() < 1e-12);
                let in_y = v.entries().adjoint() * s.amplitudes();
                for a in in_y.iter() {
                    assert!((a.norm_sqr() - 1.0 / j.dim() as f64).abs() < 1e-14);
                }
                let shifted = make_phase_state(j, gamma + 2.0 * PI).unwrap();
                let sign = if j.is_half_integer() { -1.0 } else { 1.0 };
                let diff = (shifted.amplitudes() - s.amplitudes() * c(sign)).camax();
                assert!(diff < 1e-12, "two_j={two_j} diff={diff}");
            }
        }
    }

    #[test]
    fn expectation_values() {
        for two_j in 0..=12 {
            let j = spin(two_j);
            let g = make_generators(j);
            let jy2 = g.jy.matmul(&g.jy).unwrap();
            for m in j.projections() {
                let s = make_fock_z(j, m).unwrap();
                assert_abs_diff_eq!(expectation(&s, &g.jz).unwrap(), m.value(), epsilon = 1e-15);
                if m == SpinProjection::ZERO {
                    assert_abs_diff_eq!(
                        expectation(&s, &jy2).unwrap(),
                        j.casimir() / 2.0,
                        epsilon = 1e-12
                    );
                }
                let expected = (j.casimir() - m.value() * m.value()) / 2.0;
                assert_abs_diff_eq!(expectation(&s, &jy2).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn expectation_errors() {
        let j = spin(2);
        let s = make_fock_z(j, SpinProjection::ZERO).unwrap();
        let g3 = make_generators(spin(3));
        assert!(matches!(
            expectation(&s, &g3.jz),
            Err(Error::DimensionMismatch { .. })
        ));
        let g = make_generators(j);
        let non_herm = g.jx.add(&g.jy.scale(Complex64::new(0.0, 1.0))).unwrap();
        assert!(matches!(
            expectation(&s, &non_herm),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn state_constructors_check_norm() {
        let j = spin(1);
        let bad = DVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            SpinState::new(j, bad.clone()),
            Err(Error::NotNormalized { .. })
        ));
        let ok = SpinState::normalized(j, bad).unwrap();
        assert!((ok.norm() - 1.0).abs() < 1e-15);
        assert!(SpinState::normalized(j, DVector::zeros(2)).is_err());
        assert!(matches!(
            SpinState::normalized(j, DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
