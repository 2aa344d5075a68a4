//! Wigner small-d matrices from the Jacobi-polynomial closed form.
//!
//! Elements are `<j, m'| exp(i theta J_y) |j, m>`, i.e. the conventional
//! `d^j_{m'm}(beta)` (defined with `exp(-i beta J_y)`) at `beta = -theta`.
//! Unlike a spectral evaluation, this keeps full relative accuracy in tiny
//! elements such as `cos(theta/2)^{2j}` near `theta = pi`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numerics::ln_binomial;
use crate::spin::{OperatorMatrix, SpinJ, SpinProjection};

/// `P_k^{(a,b)}(x)` by the three-term recurrence.
fn jacobi(k: u32, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for n in 2..=k {
        let n = f64::from(n);
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Single element with precomputed half-angle sine and cosine of `beta`.
fn element(
    two_j: i32,
    twice_row: i32,
    twice_col: i32,
    sin_half: f64,
    cos_half: f64,
    cos_full: f64,
) -> f64 {
    let jpm = (two_j + twice_col) / 2;
    let jmm = (two_j - twice_col) / 2;
    let jpmp = (two_j + twice_row) / 2;
    let jmmp = (two_j - twice_row) / 2;
    let diff = (twice_row - twice_col) / 2;
    let k = jpm.min(jmm).min(jpmp).min(jmmp);
    let (a, lambda) = if k == jpm {
        (diff, diff)
    } else if k == jmm || k == jpmp {
        (-diff, 0)
    } else {
        (diff, diff)
    };
    let b = two_j - 2 * k - a;
    debug_assert!(k >= 0 && a >= 0 && b >= 0);

    let poly = jacobi(k as u32, f64::from(a), f64::from(b), cos_full);
    if poly == 0.0 || (a > 0 && sin_half == 0.0) || (b > 0 && cos_half == 0.0) {
        return 0.0;
    }
    let mut log_mag = 0.5
        * (ln_binomial((two_j - k) as u64, (k + a) as u64) - ln_binomial((k + b) as u64, b as u64))
        + poly.abs().ln();
    let mut negative = lambda.rem_euclid(2) == 1;
    if poly < 0.0 {
        negative = !negative;
    }
    if a > 0 {
        log_mag += f64::from(a) * sin_half.abs().ln();
        if sin_half < 0.0 && a % 2 == 1 {
            negative = !negative;
        }
    }
    if b > 0 {
        log_mag += f64::from(b) * cos_half.abs().ln();
        if cos_half < 0.0 && b % 2 == 1 {
            negative = !negative;
        }
    }
    let mag = log_mag.exp();
    if negative {
        -mag
    } else {
        mag
    }
}

struct HalfAngles {
    sin_half: f64,
    cos_half: f64,
    cos_full: f64,
}

impl HalfAngles {
    fn new(theta: f64) -> Self {
        let beta = -theta;
        let (sin_half, cos_half) = (beta / 2.0).sin_cos();
        // cos(beta) = 1 - 2 sin^2(beta/2) loses nothing near beta = 0.
        let cos_full = if cos_half.abs() > sin_half.abs() {
            1.0 - 2.0 * sin_half * sin_half
        } else {
            2.0 * cos_half * cos_half - 1.0
        };
        Self {
            sin_half,
            cos_half,
            cos_full,
        }
    }
}

/// `<j, m'| exp(i theta J_y) |j, m>`.
pub fn wigner_d_element(j: SpinJ, row: SpinProjection, col: SpinProjection, theta: f64) -> f64 {
    let h = HalfAngles::new(theta);
    element(
        j.two_j() as i32,
        row.twice(),
        col.twice(),
        h.sin_half,
        h.cos_half,
        h.cos_full,
    )
}

/// Column `m` of the rotation: the evolved amplitudes of the Fock probe `|j, m>_z`.
pub fn wigner_d_column(j: SpinJ, col: SpinProjection, theta: f64) -> Vec<f64> {
    let h = HalfAngles::new(theta);
    let two_j = j.two_j() as i32;
    j.projections()
        .map(|row| {
            element(
                two_j,
                row.twice(),
                col.twice(),
                h.sin_half,
                h.cos_half,
                h.cos_full,
            )
        })
        .collect()
}

/// Full rotation matrix `exp(i theta J_y)` in the ascending-m `J_z` basis.
pub fn wigner_d(j: SpinJ, theta: f64) -> OperatorMatrix {
    let h = HalfAngles::new(theta);
    let two_j = j.two_j() as i32;
    let d = j.dim();
    let entries = DMatrix::from_fn(d, d, |r, c| {
        let v = element(
            two_j,
            j.projection_at(r).twice(),
            j.projection_at(c).twice(),
            h.sin_half,
            h.cos_half,
            h.cos_full,
        );
        Complex64::new(v, 0.0)
    });
    OperatorMatrix::new(j, entries).expect("dimension matches by construction")
}
