//! Empirical measures of spherical harmonics restricted to a latitude circle.
//!
//! For a point `x` on the circle `sin phi = c0`, the measure puts mass
//! `w_m = (2 pi / (N + 1/2)) |Y^m_N(x)|^2 = P^{|m|}_N(cos phi)^2 / (N + 1/2)`
//! at `t_m = m / N`. By the addition theorem the masses sum to one, and as
//! `N -> inf` the measures converge weakly to the arcsine law on `[-c0, c0]`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::legendre::LegendreEngine;
use crate::quadrature::{gauss_legendre, integrate, Endpoints};
use crate::specfun::{bessel_j0, legendre_poly, J0_MAX_ARG};
use crate::{Error, Result};

/// Largest degree accepted by [`empirical_measure`].
pub const MAX_MEASURE_DEGREE: u64 = 10_000;

const LIMIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    n: u64,
    c0: f64,
    atoms: Vec<(f64, f64)>,
}

impl EmpiricalMeasure {
    pub fn degree(&self) -> u64 {
        self.n
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `(t_m, w_m)` for `m = -N..=N`, in increasing `t`.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass carried by atoms with `|t| > bound`.
    pub fn mass_outside(&self, bound: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0.abs() > bound)
            .map(|a| a.1)
            .sum()
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::domain(format!("c0 must lie in (0, 1), got {c0}")));
    }
    Ok(())
}

pub fn empirical_measure(n: u64, c0: f64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::invalid("empirical measure needs N >= 1"));
    }
    if n > MAX_MEASURE_DEGREE {
        return Err(Error::invalid(format!(
            "degree {n} exceeds {MAX_MEASURE_DEGREE}"
        )));
    }
    check_c0(c0)?;
    let phi = PI - c0.asin();
    let engine = LegendreEngine::exact();
    let scale = n as f64 + 0.5;
    let half = (0..=n)
        .into_par_iter()
        .map(|m| Ok(engine.eval_angle(n, m, phi)?.square().to_f64() / scale))
        .collect::<Result<Vec<f64>>>()?;
    let nf = n as f64;
    let atoms = (1..=n)
        .rev()
        .map(|m| (-(m as f64) / nf, half[m as usize]))
        .chain((0..=n).map(|m| (m as f64 / nf, half[m as usize])))
        .collect();
    Ok(EmpiricalMeasure { n, c0, atoms })
}

/// `sum_m f(t_m) w_m`.
pub fn integrate_against<F: Fn(f64) -> f64>(mu: &EmpiricalMeasure, f: F) -> f64 {
    mu.atoms.iter().map(|&(t, w)| f(t) * w).sum()
}

/// `(1/(c0 pi)) int_{-c0}^{c0} f(t) (1 - (t/c0)^2)^{-1/2} dt`.
pub fn arcsine_limit<F: Fn(f64) -> f64>(c0: f64, f: F) -> Result<f64> {
    check_c0(c0)?;
    let density = |t: f64| {
        let u = t / c0;
        f(t) / ((1.0 - u) * (1.0 + u)).sqrt()
    };
    Ok(integrate(density, -c0, c0, LIMIT_TOL, Endpoints::SqrtAtBoth)? / (c0 * PI))
}

/// `(1/(2 pi)) sum_m w_m e^{i s t_m}`.
pub fn char_fn_direct(mu: &EmpiricalMeasure, s: f64) -> Complex64 {
    let sum: Complex64 = mu
        .atoms
        .iter()
        .map(|&(t, w)| Complex64::from_polar(w, s * t))
        .sum();
    sum / (2.0 * PI)
}

/// The same characteristic function through the addition theorem:
/// `(1/(2 pi)) P_N(1 - c0^2 (1 - cos(s/N)))`.
pub fn char_fn_addition(n: u64, c0: f64, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("char_fn_addition needs N >= 1"));
    }
    check_c0(c0)?;
    let half = 0.5 * s / n as f64;
    let cos_d = 1.0 - 2.0 * c0 * c0 * half.sin().powi(2);
    Ok(legendre_poly(n as usize, cos_d)? / (2.0 * PI))
}

/// `|P_N(cos(z/N)) - J0(z)|`.
pub fn mehler_heine_gap(n: u64, z: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("mehler_heine_gap needs N >= 1"));
    }
    if !(z >= 0.0 && z / (n as f64) < PI) {
        return Err(Error::invalid(format!(
            "need 0 <= z/N < pi, got z={z}, N={n}"
        )));
    }
    Ok((legendre_poly(n as usize, (z / n as f64).cos())? - bessel_j0(z)?).abs())
}

/// Gap between the Cesaro-filtered transform
/// `int_{-S}^{S} (1 - |s|/S) e^{-ist} J0(s) ds` and its limit `2 / sqrt(1 - t^2)`.
pub fn j0_fourier_gap(t: f64, big_s: f64) -> Result<f64> {
    if !(t.abs() < 0.99) {
        return Err(Error::invalid(format!("need |t| < 0.99, got {t}")));
    }
    if !(100.0..=J0_MAX_ARG).contains(&big_s) {
        return Err(Error::invalid(format!(
            "truncation must lie in [100, {J0_MAX_ARG}], got {big_s}"
        )));
    }
    // the integrand is even in s; panels of about pi hold at most one oscillation
    let panels = (big_s / PI).ceil() as usize;
    let width = big_s / panels as f64;
    let rule = gauss_legendre(32)?;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * width;
        let v = rule.apply_on(
            |s| (1.0 - s / big_s) * (s * t).cos() * bessel_j0(s).unwrap_or(f64::NAN),
            a,
            a + width,
        );
        total += v;
    }
    Ok((2.0 * total - 2.0 / (1.0 - t * t).sqrt()).abs())
}

/// Test functions for weak-limit experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    One,
    T2,
    T4,
    Cos(f64),
}

impl TestFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TestFunction::One => 1.0,
            TestFunction::T2 => t * t,
            TestFunction::T4 => t.powi(4),
            TestFunction::Cos(s) => (s * t).cos(),
        }
    }

    /// The arcsine-law integral in closed form.
    pub fn closed_form_limit(&self, c0: f64) -> Result<f64> {
        Ok(match *self {
            TestFunction::One => 1.0,
            TestFunction::T2 => c0 * c0 / 2.0,
            TestFunction::T4 => 3.0 * c0.powi(4) / 8.0,
            TestFunction::Cos(s) => bessel_j0(c0 * s)?,
        })
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::One => write!(f, "one"),
            TestFunction::T2 => write!(f, "t2"),
            TestFunction::T4 => write!(f, "t4"),
            TestFunction::Cos(s) => write!(f, "cos:{s}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(TestFunction::One),
            "t2" => Ok(TestFunction::T2),
            "t4" => Ok(TestFunction::T4),
            _ => {
                let freq = s
                    .strip_prefix("cos:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::invalid(format!("unknown test function '{s}'")))?;
                Ok(TestFunction::Cos(freq))
            }
        }
    }
}

/// True when `values` decreases except for at most one step, treating
/// anything below `floor` as converged. Rounding noise at the level of the
/// floor therefore does not count as an increase.
pub fn is_decreasing_trend(values: &[f64], floor: f64) -> bool {
    let increases = values
        .windows(2)
        .filter(|w| w[1] > w[0] && w[1] > floor)
        .count();
    increases <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            empirical_measure(0, 0.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(empirical_measure(10_001, 0.5).is_err());
        assert!(empirical_measure(10, 1.0).is_err());
        assert!(empirical_measure(10, 0.0).is_err());
    }

    #[test]
    fn mass_and_symmetry() {
        let mu = empirical_measure(500, 0.8).unwrap();
        assert_eq!(mu.atoms().len(), 1001);
        assert!((mu.total_mass() - 1.0).abs() < 1e-10);
        let atoms = mu.atoms();
        for i in 0..atoms.len() {
            let j = atoms.len() - 1 - i;
            assert_eq!(atoms[i].1, atoms[j].1);
            assert_eq!(atoms[i].0, -atoms[j].0);
            assert!(atoms[i].1 >= 0.0);
        }
        assert!(integrate_against(&mu, |t| t).abs() < 1e-12);
        assert!((integrate_against(&mu, |_| 1.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn both_turning_points_give_the_same_measure() {
        let n = 80;
        let engine = LegendreEngine::exact();
        let c0: f64 = 0.6;
        let mu = empirical_measure(n, c0).unwrap();
        for m in 0..=n {
            let w = engine
                .eval_angle(n, m, c0.asin())
                .unwrap()
                .square()
                .to_f64()
                / (n as f64 + 0.5);
            let got = mu.atoms()[(n + m) as usize].1;
            assert!((w - got).abs() <= 1e-13 * got.max(1e-300), "m={m}");
        }
    }

    #[test]
    fn weights_match_spherical_harmonics() {
        let n = 40u64;
        let c0: f64 = 0.3;
        let mu = empirical_measure(n, c0).unwrap();
        let phi = PI - c0.asin();
        for m in -(n as i64)..=(n as i64) {
            let y2 = crate::legendre::sph_harm_sq(n, m, phi).unwrap();
            let w = 2.0 * PI / (n as f64 + 0.5) * y2;
            let got = mu.atoms()[(m + n as i64) as usize].1;
            assert!((got - w).abs() <= 1e-14 * w.max(1e-300));
        }
    }

    #[test]
    fn support_concentrates() {
        let mu = empirical_measure(2000, 0.8).unwrap();
        assert!(mu.mass_outside(0.9) <= 1e-6, "{}", mu.mass_outside(0.9));
    }

    #[test]
    fn arcsine_moments() {
        for c0 in [0.3, 0.5, 0.8] {
            for (k, f) in [
                (0, TestFunction::One),
                (1, TestFunction::T2),
                (2, TestFunction::T4),
            ] {
                let got = arcsine_limit(c0, |t| f.eval(t)).unwrap();
                // c0^{2k} binom(2k, k) / 4^k
                let binom = [1.0, 2.0, 6.0][k];
                let want = c0.powi(2 * k as i32) * binom / 4f64.powi(k as i32);
                assert!((got - want).abs() < 1e-10, "c0={c0} k={k}");
                assert!((f.closed_form_limit(c0).unwrap() - want).abs() < 1e-15);
            }
        }
        assert!((arcsine_limit(0.8, |t| t * t).unwrap() - 0.32).abs() < 1e-10);
    }

    #[test]
    fn arcsine_cosine_is_bessel() {
        for (c0, s) in [(0.5, 3.0), (0.8, 3.0), (0.8, 20.0)] {
            let got = arcsine_limit(c0, |t: f64| (s * t).cos()).unwrap();
            assert!((got - bessel_j0(c0 * s).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn char_fn_at_zero_and_symmetry() {
        let mu = empirical_measure(300, 0.7).unwrap();
        let z = char_fn_direct(&mu, 0.0);
        assert!((z.re - 0.159_154_943_091_895_35).abs() < 1e-12);
        assert!((char_fn_addition(300, 0.7, 0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        for s in [0.5, 3.0, 17.0, 80.0] {
            let a = char_fn_direct(&mu, s);
            let b = char_fn_direct(&mu, -s);
            assert!((a - b.conj()).norm() < 1e-15);
            assert!(a.im.abs() <= 1e-12);
            let cos_side = integrate_against(&mu, |t| (s * t).cos());
            assert!((2.0 * PI * a.re - cos_side).abs() < 1e-14);
        }
    }

    #[test]
    fn char_fn_routes_agree() {
        let mu = empirical_measure(500, 0.8).unwrap();
        for s in [1.0, 5.0, 20.0] {
            let direct = char_fn_direct(&mu, s).re;
            let addition = char_fn_addition(500, 0.8, s).unwrap();
            assert!((direct - addition).abs() < 1e-9, "s={s}");
        }
        for (n, s) in [(1u64, 2.0), (7, 0.3), (64, 11.0), (1000, 40.0)] {
            let mu = empirical_measure(n, 0.45).unwrap();
            let direct = char_fn_direct(&mu, s).re;
            let addition = char_fn_addition(n, 0.45, s).unwrap();
            assert!((direct - addition).abs() < 1e-9, "N={n} s={s}");
        }
    }

    #[test]
    fn char_fn_tends_to_bessel() {
        let gaps: Vec<f64> = [250u64, 500, 1000, 2000]
            .iter()
            .map(|&n| {
                let v = char_fn_addition(n, 0.8, 5.0).unwrap();
                (v - bessel_j0(4.0).unwrap() / (2.0 * PI)).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn mehler_heine() {
        assert_eq!(mehler_heine_gap(100, 0.0).unwrap(), 0.0);
        let small = mehler_heine_gap(2000, 5.0).unwrap();
        let large = mehler_heine_gap(200, 5.0).unwrap();
        assert!(small <= 0.01);
        assert!(small <= large);
        assert!(mehler_heine_gap(2, 7.0).is_err());
    }

    #[test]
    fn fourier_transform_of_j0() {
        assert!(j0_fourier_gap(0.0, 2000.0).unwrap() <= 0.05);
        // reference gaps from the equivalent Fejer-kernel convolution of
        // 2/sqrt(1-u^2), computed independently in the variable u = sin(theta);
        // endpoint terms oscillate in S, so 1000 -> 2000 is not monotone
        let oracle = [
            (0.0, 1000.0, 4.958_268_012_678e-5),
            (0.3, 500.0, 1.474_512_015_784e-4),
            (0.3, 1000.0, 8.213_348_540e-6),
            (0.3, 2000.0, 8.824_155_781e-6),
        ];
        for (t, big_s, want) in oracle {
            let got = j0_fourier_gap(t, big_s).unwrap();
            assert!((got - want).abs() < 1e-11, "t={t} S={big_s}: {got}");
        }
        let first = j0_fourier_gap(0.3, 500.0).unwrap();
        assert!(j0_fourier_gap(0.3, 2000.0).unwrap() < 0.1 * first);
        assert!(j0_fourier_gap(0.99, 500.0).is_err());
        assert!(j0_fourier_gap(-1.2, 500.0).is_err());
        assert!(j0_fourier_gap(0.1, 50.0).is_err());
    }

    #[test]
    fn test_function_parsing() {
        assert_eq!("one".parse::<TestFunction>().unwrap(), TestFunction::One);
        assert_eq!("t4".parse::<TestFunction>().unwrap(), TestFunction::T4);
        assert_eq!(
            "cos:3".parse::<TestFunction>().unwrap(),
            TestFunction::Cos(3.0)
        );
        assert!("cos:".parse::<TestFunction>().is_err());
        assert!("t3".parse::<TestFunction>().is_err());
        assert_eq!(TestFunction::Cos(3.0).to_string(), "cos:3");
    }

    #[test]
    fn trend_allows_one_bump_and_noise() {
        assert!(is_decreasing_trend(&[5.0, 4.0, 3.0], 0.0));
        assert!(is_decreasing_trend(&[5.0, 6.0, 3.0, 2.0], 0.0));
        assert!(!is_decreasing_trend(&[5.0, 6.0, 3.0, 4.0], 0.0));
        assert!(is_decreasing_trend(&[1e-15, 2e-15, 1e-15, 3e-15], 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn measure_invariants(n in 1u64..400, c0 in 0.05f64..0.95) {
            let mu = empirical_measure(n, c0).unwrap();
            prop_assert!((mu.total_mass() - 1.0).abs() < 1e-10);
            let atoms = mu.atoms();
            for i in 0..atoms.len() {
                prop_assert_eq!(atoms[i].1, atoms[atoms.len() - 1 - i].1);
            }
        }

        #[test]
        fn char_fn_oracle_equivalence(n in 1u64..300, c0 in 0.05f64..0.95, s in -30.0f64..30.0) {
            let mu = empirical_measure(n, c0).unwrap();
            let direct = char_fn_direct(&mu, s);
            let addition = char_fn_addition(n, c0, s).unwrap();
            prop_assert!((direct.re - addition).abs() < 1e-9);
            prop_assert!(direct.im.abs() < 1e-12);
        }
    }
}
