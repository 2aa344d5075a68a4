//! The interferometer unitary `exp(i theta J_y)`.
//!
//! [`RotationEngine`] diagonalizes `J_y` once per spin and then evolves any
//! state to any phase in `O(d^2)`. The three-stage beamsplitter / phase /
//! beamsplitter product is available separately for cross-checking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::spin::{
    check_dim, jx_eigen, make_generators, y_eigenbasis, OperatorMatrix, SpinJ, SpinState,
};

pub use crate::wigner::{wigner_d, wigner_d_column, wigner_d_element};

/// Cached spectral data for one spin.
#[derive(Clone, Debug)]
pub struct RotationEngine {
    j: SpinJ,
    /// Columns `|j, m>_y` in the `J_z` basis.
    y_vectors: DMatrix<Complex64>,
    y_vectors_adj: DMatrix<Complex64>,
    /// Real orthogonal eigenvectors of `J_x`.
    x_vectors: DMatrix<f64>,
    jy: DMatrix<Complex64>,
    /// Exact eigenvalues `m = -j..=j` shared by `J_x`, `J_y` and `J_z`.
    m_values: Vec<f64>,
}

impl RotationEngine {
    pub fn new(j: SpinJ) -> Self {
        let y_vectors = y_eigenbasis(j).into_entries();
        let y_vectors_adj = y_vectors.adjoint();
        let x_vectors = jx_eigen(j).vectors;
        let jy = make_generators(j).jy.into_entries();
        let m_values = (0..j.dim()).map(|k| j.m_at(k)).collect();
        Self {
            j,
            y_vectors,
            y_vectors_adj,
            x_vectors,
            jy,
            m_values,
        }
    }

    pub fn spin(&self) -> SpinJ {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    /// Columns `|j, m>_y`, as cached.
    pub fn y_vectors(&self) -> &DMatrix<Complex64> {
        &self.y_vectors
    }

    /// Largest `|V^dagger J_y V - diag(m)|` element.
    pub fn diagonalization_residual(&self) -> f64 {
        let diag = &self.y_vectors_adj * &self.jy * &self.y_vectors;
        let mut worst = 0.0f64;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let target = if r == c { self.m_values[r] } else { 0.0 };
                worst = worst.max((diag[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Coefficients of a state in the `J_y` eigenbasis.
    pub fn y_coefficients(&self, amps: &DVector<Complex64>) -> DVector<Complex64> {
        &self.y_vectors_adj * amps
    }

    /// `V diag(e^{i m theta}) c` for precomputed `J_y`-basis coefficients `c`.
    pub fn propagate_coefficients(
        &self,
        coeffs: &DVector<Complex64>,
        theta: f64,
    ) -> DVector<Complex64> {
        let phased = DVector::from_fn(self.dim(), |k, _| {
            coeffs[k] * Complex64::cis(self.m_values[k] * theta)
        });
        &self.y_vectors * phased
    }

    /// `exp(i theta J_y) |psi>`.
    pub fn evolve(&self, state: &SpinState, theta: f64) -> Result<SpinState> {
        check_dim(self.dim(), state.dim())?;
        let coeffs = self.y_coefficients(state.amplitudes());
        let out = self.propagate_coefficients(&coeffs, theta);
        SpinState::normalized(self.j, out)
    }

    /// The unitary `exp(i theta J_y)` assembled from the spectral cache.
    pub fn rotation_matrix(&self, theta: f64) -> OperatorMatrix {
        let d = self.dim();
        let phased = DMatrix::from_fn(d, d, |r, c| {
            self.y_vectors[(r, c)] * Complex64::cis(self.m_values[c] * theta)
        });
        OperatorMatrix::new(self.j, phased * &self.y_vectors_adj).expect("square by construction")
    }

    /// `exp(i alpha J_x)`.
    pub fn x_rotation(&self, alpha: f64) -> DMatrix<Complex64> {
        let d = self.dim();
        let w = &self.x_vectors;
        let phased = DMatrix::from_fn(d, d, |r, c| {
            Complex64::cis(self.m_values[c] * alpha) * w[(r, c)]
        });
        let wt = w.transpose().map(|x| Complex64::new(x, 0.0));
        phased * wt
    }

    /// Beamsplitter, phase shift, beamsplitter:
    /// `exp(i pi/2 J_x) exp(i theta J_z) exp(-i pi/2 J_x) |psi>`.
    ///
    /// With these generators `exp(i pi/2 J_x) J_z exp(-i pi/2 J_x) = +J_y`, so
    /// the product equals `exp(+i theta J_y)`.
    pub fn mz_three_stage(&self, state: &SpinState, theta: f64) -> Result<SpinState> {
        check_dim(self.dim(), state.dim())?;
        let first = self.x_rotation(-std::f64::consts::FRAC_PI_2) * state.amplitudes();
        let shifted = DVector::from_fn(self.dim(), |k, _| {
            first[k] * Complex64::cis(self.m_values[k] * theta)
        });
        let out = self.x_rotation(std::f64::consts::FRAC_PI_2) * shifted;
        SpinState::normalized(self.j, out)
    }

    /// `d psi / d theta = i J_y psi` (not normalized).
    pub fn state_derivative(&self, state: &SpinState) -> Result<DVector<Complex64>> {
        check_dim(self.dim(), state.dim())?;
        Ok(self.derivative_of(state.amplitudes()))
    }

    pub(crate) fn derivative_of(&self, amps: &DVector<Complex64>) -> DVector<Complex64> {
        (&self.jy * amps) * Complex64::new(0.0, 1.0)
    }
}

/// Reusable evolution of one probe: the `J_y` coefficients are computed once.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    engine: &'a RotationEngine,
    coeffs: DVector<Complex64>,
}

impl<'a> Trajectory<'a> {
    pub fn new(engine: &'a RotationEngine, probe: &SpinState) -> Result<Self> {
        check_dim(engine.dim(), probe.dim())?;
        Ok(Self {
            engine,
            coeffs: engine.y_coefficients(probe.amplitudes()),
        })
    }

    /// Amplitudes `psi_m(theta)`.
    pub fn amplitudes(&self, theta: f64) -> DVector<Complex64> {
        self.engine.propagate_coefficients(&self.coeffs, theta)
    }

    /// Amplitudes and their theta-derivative at `theta`.
    pub fn amplitudes_and_derivative(
        &self,
        theta: f64,
    ) -> (DVector<Complex64>, DVector<Complex64>) {
        let d = self.engine.dim();
        let i = Complex64::new(0.0, 1.0);
        let mut phased = DVector::zeros(d);
        let mut dphased = DVector::zeros(d);
        for k in 0..d {
            let m = self.engine.m_values[k];
            phased[k] = self.coeffs[k] * Complex64::cis(m * theta);
            dphased[k] = phased[k] * i * m;
        }
        (
            &self.engine.y_vectors * phased,
            &self.engine.y_vectors * dphased,
        )
    }
}
