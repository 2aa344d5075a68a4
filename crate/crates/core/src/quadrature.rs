//! One-dimensional quadrature rules on a closed interval.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root.
        nodes[n - 1 - i] = mid + half * x;
        nodes[i] = mid - half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite trapezoid rule with `n >= 2` equally spaced nodes including both ends.
pub fn trapezoid(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "trapezoid rule needs two nodes");
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
        .collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
        .collect();
    (nodes, weights)
}

/// Abscissae of the 15-point Kronrod extension of the 7-point Gauss rule, descending in `[0, 1]`.
#[allow(clippy::excessive_precision)]
const KRONROD_X: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights on the odd-indexed Kronrod abscissae (and the centre).
#[allow(clippy::excessive_precision)]
const GAUSS7_W: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// A 15-node Gauss-Kronrod panel on `[a, b]`: nodes ascending, Kronrod
/// weights, and the embedded 7-point Gauss weights (zero off the Gauss nodes).
#[derive(Clone, Debug)]
pub struct KronrodPanel {
    pub nodes: [f64; 15],
    pub kronrod: [f64; 15],
    pub gauss: [f64; 15],
}

impl KronrodPanel {
    pub fn new(a: f64, b: f64) -> Self {
        let mid = (a + b) / 2.0;
        let half = (b - a) / 2.0;
        let mut nodes = [0.0; 15];
        let mut kronrod = [0.0; 15];
        let mut gauss = [0.0; 15];
        for i in 0..8 {
            let lo = i;
            let hi = 14 - i;
            nodes[lo] = mid - half * KRONROD_X[i];
            nodes[hi] = mid + half * KRONROD_X[i];
            kronrod[lo] = half * KRONROD_W[i];
            kronrod[hi] = half * KRONROD_W[i];
            if i % 2 == 1 {
                gauss[lo] = half * GAUSS7_W[i / 2];
                gauss[hi] = half * GAUSS7_W[i / 2];
            }
        }
        Self {
            nodes,
            kronrod,
            gauss,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(nodes: &[f64], weights: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        nodes.iter().zip(weights).map(|(x, w)| w * f(*x)).sum()
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 33, 48, 101] {
            let (x, w) = gauss_legendre(n, -0.5, 2.0);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            let deg = 2 * n - 1;
            let exact =
                (2f64.powi(deg as i32 + 1) - (-0.5f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            let got = integrate(&x, &w, |t| t.powi(deg as i32));
            assert!((got - exact).abs() < 1e-12 * exact.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn gauss_legendre_known_nodes() {
        let (x, w) = gauss_legendre(2, -1.0, 1.0);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3, -1.0, 1.0);
        assert!(x[1].abs() < 1e-16);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_weights() {
        let (x, w) = trapezoid(5, 0.0, 1.0);
        assert_eq!(x, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((integrate(&x, &w, |t| t) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kronrod_panel_exactness() {
        let p = KronrodPanel::new(0.0, 3.0);
        assert!(p.nodes.windows(2).all(|q| q[0] < q[1]));
        // Kronrod is exact to degree 22 and Gauss-7 to degree 13.
        let k = integrate(&p.nodes, &p.kronrod, |t| t.powi(22));
        assert!((k / (3f64.powi(23) / 23.0) - 1.0).abs() < 1e-13);
        let g = integrate(&p.nodes, &p.gauss, |t| t.powi(13));
        assert!((g / (3f64.powi(14) / 14.0) - 1.0).abs() < 1e-13);
        let s = integrate(&p.nodes, &p.kronrod, f64::sin) - (1.0 - 3f64.cos());
        assert!(s.abs() < 1e-15);
    }
}
