//! Gauss-Legendre rules and adaptive integration.
//!
//! The adaptive integrator bisects the worst interval of a global work list,
//! scoring each interval with the embedded Gauss 7 / Kronrod 15 pair. Integrands
//! with an inverse-square-root endpoint (turning points of the action
//! integrals, the arcsine density) are handled by the substitution
//! `psi = endpoint -/+ u^2`, which removes that singularity exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Largest rule size accepted by [`gauss_legendre`].
pub const MAX_NODES: usize = 20_000;

/// Deepest bisection level allowed in [`integrate`].
pub const MAX_DEPTH: u32 = 60;

/// Nodes and weights of an `n`-point rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on `[-1, 1]`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Applies the rule to `f` on `[a, b]` by the affine map.
    pub fn apply_on<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.apply(|x| f(mid + half * x))
    }
}

/// Evaluates `(P_n(x), P_n'(x))` by the classical three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Builds the `n`-point Gauss-Legendre rule.
///
/// Nodes come from Newton iteration on `P_n` started at Tricomi's asymptotic
/// estimate; the positive half is computed and mirrored so that the rule is
/// exactly symmetric.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::invalid(format!(
            "gauss_legendre needs 1 <= n <= {MAX_NODES}, got {n}"
        )));
    }
    let nf = n as f64;
    let half = n / 2;
    let mut pos_nodes = Vec::with_capacity(half + 1);
    let mut pos_weights = Vec::with_capacity(half + 1);

    for i in 1..=half {
        // i-th largest root
        let theta = std::f64::consts::PI * (4.0 * i as f64 - 1.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        pos_nodes.push(x);
        pos_weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&x, &w) in pos_nodes.iter().zip(&pos_weights) {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (d * d));
    }
    for (&x, &w) in pos_nodes.iter().zip(&pos_weights).rev() {
        nodes.push(x);
        weights.push(w);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Which endpoints carry an inverse-square-root type singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endpoints {
    #[default]
    Regular,
    SqrtAtA,
    SqrtAtB,
    SqrtAtBoth,
}

// Kronrod 15-point abscissae (non-negative half) and weights; the even
// indices 1, 3, 5, 7 are the embedded Gauss 7-point abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Kronrod estimate, |K15 - G7|, and the K15 estimate of the integral of |f|.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (
        kronrod * half,
        ((kronrod - gauss) * half).abs(),
        abs_sum * half.abs(),
    )
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (value, error, abs_value) = gk15(f, a, b);
    if !value.is_finite() {
        return Err(Error::Accuracy {
            estimate: value,
            error_bound: f64::INFINITY,
        });
    }
    let roundoff = |abs: f64| 50.0 * f64::EPSILON * abs;
    let mut heap = BinaryHeap::new();
    let first = Panel {
        a,
        b,
        value,
        error: (error - roundoff(abs_value)).max(0.0),
        depth: 0,
    };
    let mut total_value = first.value;
    let mut total_error = first.error;
    heap.push(first);

    while total_error > tol {
        let worst = heap.pop().expect("work list never empties");
        if worst.depth >= MAX_DEPTH {
            return Err(Error::Accuracy {
                estimate: total_value,
                error_bound: total_error,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1, s1) = gk15(f, worst.a, mid);
        let (v2, e2, s2) = gk15(f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Accuracy {
                estimate: total_value,
                error_bound: f64::INFINITY,
            });
        }
        let left = Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: (e1 - roundoff(s1)).max(0.0),
            depth: worst.depth + 1,
        };
        let right = Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: (e2 - roundoff(s2)).max(0.0),
            depth: worst.depth + 1,
        };
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() > 1 << 20 {
            return Err(Error::Accuracy {
                estimate: total_value,
                error_bound: total_error,
            });
        }
    }
    // resum to shed the drift of the running total
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integrates `f` over `[a, b]` to absolute error `tol`.
///
/// With a square-root flag at an endpoint `e`, the integral is taken in the
/// variable `u` with `psi = e -/+ u^2`, so `f` may behave like `|psi - e|^(-1/2)`
/// there. With both flags the interval is split at its midpoint.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, endpoints: Endpoints) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!(
            "integrate needs finite a < b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    match endpoints {
        Endpoints::Regular => adaptive(&f, a, b, tol),
        Endpoints::SqrtAtA => {
            let g = |u: f64| 2.0 * u * f(a + u * u);
            adaptive(&g, 0.0, (b - a).sqrt(), tol)
        }
        Endpoints::SqrtAtB => {
            let g = |u: f64| 2.0 * u * f(b - u * u);
            adaptive(&g, 0.0, (b - a).sqrt(), tol)
        }
        Endpoints::SqrtAtBoth => {
            let mid = 0.5 * (a + b);
            let g = |u: f64| 2.0 * u * f(a + u * u);
            let left = adaptive(&g, 0.0, (mid - a).sqrt(), 0.5 * tol)?;
            let g = |u: f64| 2.0 * u * f(b - u * u);
            let right = adaptive(&g, 0.0, (b - mid).sqrt(), 0.5 * tol)?;
            Ok(left + right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);
    }

    #[test]
    fn two_point_rule_solves_moment_equations() {
        // w1 + w2 = 2, symmetric nodes, w * 2x^2 = 2/3  =>  x = 1/sqrt(3), w = 1
        let r = gauss_legendre(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + x).abs() < 1e-15);
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        assert!((r.nodes()[1] - 0.577_350_269_189_625_8).abs() < 1e-15);
        for &w in r.weights() {
            assert!((w - 1.0).abs() < 1e-15);
        }
        assert!((r.apply(|x| x * x) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(gauss_legendre(0), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            gauss_legendre(MAX_NODES + 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rules_are_sorted_symmetric_and_normalized() {
        for n in [1, 2, 3, 7, 16, 64, 255, 256, 1000, 4096] {
            let r = gauss_legendre(n).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n} sum={sum}");
            assert!(r.weights().iter().all(|&w| w > 0.0));
            for w in r.nodes().windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
            }
        }
    }

    #[test]
    fn even_moments_are_exact() {
        for n in [3, 10, 40] {
            let r = gauss_legendre(n).unwrap();
            for j in 0..n {
                let exact = 2.0 / (2 * j + 1) as f64;
                let got = r.apply(|x| x.powi(2 * j as i32));
                assert!(((got - exact) / exact).abs() < 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn largest_rule_is_normalized() {
        let r = gauss_legendre(MAX_NODES).unwrap();
        let sum: f64 = r.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-12, "sum={sum}");
    }

    #[test]
    fn kronrod_pair_is_exact_on_polynomials() {
        // K15 integrates degree 22 exactly, G7 degree 13.
        let (k, _, _) = gk15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert!((k - 2.0 / 23.0).abs() < 1e-15);
        let (k, e, _) = gk15(&|x: f64| x.powi(12) + x.powi(3), -1.0, 1.0);
        assert!((k - 2.0 / 13.0).abs() < 1e-15);
        assert!(e < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-12, Endpoints::Regular).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn arcsine_density_with_both_flags() {
        let f = |x: f64| 1.0 / ((1.0 - x) * (1.0 + x)).sqrt();
        let v = integrate(f, -1.0, 1.0, 1e-12, Endpoints::SqrtAtBoth).unwrap();
        assert!((v - PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn one_sided_flags() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 4.0, 1e-12, Endpoints::SqrtAtA).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = integrate(
            |x: f64| 1.0 / (1.0 - x).sqrt(),
            0.0,
            1.0,
            1e-12,
            Endpoints::SqrtAtB,
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_curve_loop_at_two_thirds() {
        // full loop of tau dphi on tau^2 + c^2/sin^2 = 1 is twice the one-sided action
        let c: f64 = 2.0 / 3.0;
        let lo = c.asin();
        let hi = PI - lo;
        let tau = |psi: f64| {
            let s = psi.sin();
            ((s - c) * (s + c)).max(0.0).sqrt() / s
        };
        let v = integrate(tau, lo, hi, 1e-13, Endpoints::SqrtAtBoth).unwrap();
        assert!(
            (2.0 * v - 2.094_395_102_393_195_3).abs() < 1e-11,
            "{}",
            2.0 * v
        );
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10, Endpoints::Regular).unwrap_err();
        match err {
            Error::Accuracy {
                estimate,
                error_bound,
            } => {
                assert!(estimate > 1.0);
                assert!(error_bound > 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_interval_and_bad_tolerance() {
        assert!(integrate(f64::sin, 1.0, 1.0, 1e-10, Endpoints::Regular).is_err());
        assert!(integrate(f64::sin, 0.0, 1.0, 0.0, Endpoints::Regular).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn f(x: f64) -> f64 {
            (3.0 * x).cos() + x * x
        }
        fn g(x: f64) -> f64 {
            (-x * x).exp()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn linearity(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, a in -3.0f64..0.0, len in 0.1f64..4.0) {
                let tol = 1e-11;
                let b = a + len;
                let lhs = integrate(|x| alpha * f(x) + beta * g(x), a, b, tol, Endpoints::Regular).unwrap();
                let rhs = alpha * integrate(f, a, b, tol, Endpoints::Regular).unwrap()
                    + beta * integrate(g, a, b, tol, Endpoints::Regular).unwrap();
                prop_assert!((lhs - rhs).abs() <= 2.0 * tol);
            }

            #[test]
            fn interval_additivity(a in -3.0f64..0.0, l1 in 0.05f64..2.0, l2 in 0.05f64..2.0) {
                let tol = 1e-11;
                let c = a + l1;
                let b = c + l2;
                let whole = integrate(f, a, b, tol, Endpoints::Regular).unwrap();
                let parts = integrate(f, a, c, tol, Endpoints::Regular).unwrap()
                    + integrate(f, c, b, tol, Endpoints::Regular).unwrap();
                prop_assert!((whole - parts).abs() <= 2.0 * tol);
            }
        }
    }
}
