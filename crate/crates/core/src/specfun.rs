//! Scalar special functions: Airy `Ai`/`Ai'`, Bessel `J0`, classical Legendre
//! polynomials and `ln Gamma`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::{Error, Result};

/// Largest `|x|` accepted by [`airy`].
pub const AIRY_MAX_ARG: f64 = 1e4;
/// Boundary between the Maclaurin and asymptotic branches of [`airy`].
pub const AIRY_SWITCH: f64 = 8.0;
/// Largest `|s|` accepted by [`bessel_j0`].
pub const J0_MAX_ARG: f64 = 1e6;
/// Boundary between the defining integral and the Hankel expansion of [`bessel_j0`].
pub const J0_SWITCH: f64 = 50.0;
/// Largest degree accepted by [`legendre_poly`].
pub const LEGENDRE_MAX_DEGREE: usize = 1_000_000;

/// Values of `Ai` and `Ai'` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "log_gamma needs a finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `Ai(0)` and `Ai'(0)` from their Gamma-function closed forms.
fn airy_origin() -> (f64, f64) {
    static CONSTS: OnceLock<(f64, f64)> = OnceLock::new();
    *CONSTS.get_or_init(|| {
        let ln3 = 3f64.ln();
        let ai0 = (-(2.0 / 3.0) * ln3 - ln_gamma_positive(2.0 / 3.0)).exp();
        let aip0 = -(-(1.0 / 3.0) * ln3 - ln_gamma_positive(1.0 / 3.0)).exp();
        (ai0, aip0)
    })
}

/// Maclaurin series: returns `(Ai, Ai', Ai'')` from the two fundamental series
/// `f = 1 + x^3/3! + 1*4 x^6/6! + ...` and `g = x + 2 x^4/4! + ...`.
pub(crate) fn airy_maclaurin(x: f64) -> (f64, f64, f64) {
    let (c1, c2) = {
        let (a, b) = airy_origin();
        (a, -b)
    };
    let x3 = x * x * x;
    // f and its derivatives
    let mut f = 1.0;
    let mut fp = 0.0;
    let mut fpp = 0.0;
    let mut g = x;
    let mut gp = 1.0;
    let mut gpp = 0.0;
    // f_k = x^{3k} / prod_{j<=k} (3j-1)(3j); g_k = x^{3k+1} / prod_{j<=k} (3j)(3j+1)
    let mut fk = 1.0;
    let mut gk = x;
    for k in 1..200 {
        let kf = k as f64;
        fk *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        gk *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += fk;
        g += gk;
        if x != 0.0 {
            let nf = 3.0 * kf;
            let ng = 3.0 * kf + 1.0;
            fp += nf * fk / x;
            fpp += nf * (nf - 1.0) * fk / (x * x);
            gp += ng * gk / x;
            gpp += ng * (ng - 1.0) * gk / (x * x);
        }
        if fk.abs() <= 1e-18 * f.abs() && gk.abs() <= 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    if x == 0.0 {
        return (c1, -c2, 0.0);
    }
    (c1 * f - c2 * g, c1 * fp - c2 * gp, c1 * fpp - c2 * gpp)
}

/// Coefficients `u_k`, `v_k` of the large-argument Airy expansions.
fn airy_asymptotic_coefficients() -> &'static ([f64; 16], [f64; 16]) {
    static COEFFS: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut u = [0.0; 16];
        let mut v = [0.0; 16];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..16 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
        }
        (u, v)
    })
}

/// Poincare expansions for `|x|` large, at most 15 correction terms.
pub(crate) fn airy_asymptotic(x: f64) -> AiryPair {
    let (u, v) = airy_asymptotic_coefficients();
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let quarter = z.sqrt().sqrt();
    let sqrt_pi = PI.sqrt();
    if x > 0.0 {
        // Ai(z) ~ e^{-zeta} / (2 sqrt(pi) z^{1/4}) sum (-1)^k u_k zeta^{-k}
        let (mut su, mut sv) = (1.0, 1.0);
        let mut pow = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..16 {
            pow *= -1.0 / zeta;
            let tu = u[k] * pow;
            if tu.abs() >= last {
                break;
            }
            last = tu.abs();
            su += tu;
            sv += v[k] * pow;
            if last < 1e-17 {
                break;
            }
        }
        let e = (-zeta).exp();
        AiryPair {
            ai: e / (2.0 * sqrt_pi * quarter) * su,
            ai_prime: -quarter * e / (2.0 * sqrt_pi) * sv,
        }
    } else {
        // Ai(-z) ~ (cos(w) P + sin(w) Q) / (sqrt(pi) z^{1/4}),  w = zeta - pi/4
        let (mut p, mut q, mut r, mut s) = (0.0, 0.0, 0.0, 0.0);
        let mut pow = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..16 {
            let tu = u[k] * pow;
            if k > 0 && tu.abs() >= last {
                break;
            }
            last = tu.abs();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sign * tu;
                r += sign * v[k] * pow;
            } else {
                q += sign * tu;
                s += sign * v[k] * pow;
            }
            pow /= zeta;
            if last < 1e-17 {
                break;
            }
        }
        let w = zeta - FRAC_PI_4;
        let (sw, cw) = w.sin_cos();
        AiryPair {
            ai: (cw * p + sw * q) / (sqrt_pi * quarter),
            ai_prime: quarter * (sw * r - cw * s) / sqrt_pi,
        }
    }
}

/// `Ai(x)` and `Ai'(x)` for `|x| <= 1e4`.
///
/// Maclaurin series inside `|x| <= 8`, asymptotic expansions outside. On
/// `2 < x <= 8` the Maclaurin sum cancels badly (`Ai` is recessive there), so
/// the value is continued from the asymptotic anchor at `x = 8` by Taylor steps
/// of the Airy equation taken towards the origin, the stable direction.
pub fn airy(x: f64) -> Result<AiryPair> {
    if !(x.abs() <= AIRY_MAX_ARG) {
        return Err(Error::invalid(format!(
            "airy needs |x| <= {AIRY_MAX_ARG}, got {x}"
        )));
    }
    if x.abs() > AIRY_SWITCH {
        return Ok(airy_asymptotic(x));
    }
    if x > POSITIVE_CONTINUATION_START {
        return Ok(airy_continued_from_anchor(x));
    }
    let (ai, ai_prime, _) = airy_maclaurin(x);
    Ok(AiryPair { ai, ai_prime })
}

const POSITIVE_CONTINUATION_START: f64 = 2.0;

/// One Taylor step of `y'' = x y` from `(x0, y, y')` to `x0 + dx`.
fn airy_taylor_step(x0: f64, y: f64, yp: f64, dx: f64) -> (f64, f64) {
    // a_{n+2} (n+2)(n+1) = x0 a_n + a_{n-1}
    let mut a = [0.0f64; 64];
    a[0] = y;
    a[1] = yp;
    a[2] = x0 * y / 2.0;
    for n in 1..62 {
        a[n + 2] = (x0 * a[n] + a[n - 1]) / ((n + 2) as f64 * (n + 1) as f64);
    }
    let mut val = 0.0;
    let mut der = 0.0;
    for n in (0..64).rev() {
        val = val * dx + a[n];
    }
    for n in (1..64).rev() {
        der = der * dx + n as f64 * a[n];
    }
    (val, der)
}

fn airy_continued_from_anchor(x: f64) -> AiryPair {
    let anchor = airy_asymptotic(AIRY_SWITCH);
    let mut x0 = AIRY_SWITCH;
    let (mut y, mut yp) = (anchor.ai, anchor.ai_prime);
    let steps = ((AIRY_SWITCH - x) / 0.5).ceil().max(1.0) as usize;
    let dx = (x - AIRY_SWITCH) / steps as f64;
    for _ in 0..steps {
        let (ny, nyp) = airy_taylor_step(x0, y, yp, dx);
        y = ny;
        yp = nyp;
        x0 += dx;
    }
    AiryPair {
        ai: y,
        ai_prime: yp,
    }
}

fn j0_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(256).expect("256 is a valid rule size"))
}

fn j0_hankel(x: f64) -> f64 {
    // J0(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w), w = x - pi/4,
    // with a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k) up to sign.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..30 {
        let kf = k as f64;
        term *= (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (kf * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // a_k(0) carries (-1)^k; P takes (-1)^{k/2} a_{2k}, Q-term enters as -sin * sum (-1)^k a_{2k+1}
        match k % 4 {
            1 => q -= term,
            2 => p -= term,
            3 => q += term,
            _ => p += term,
        }
        if term < 1e-17 {
            break;
        }
    }
    let w = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}

/// Bessel function `J0(s) = (1/2pi) int_{-pi}^{pi} exp(-i s sin t) dt`.
///
/// The defining integral, reduced to `(1/pi) int_0^pi cos(s sin t) dt`, is
/// evaluated with a 256-point Gauss-Legendre rule for `|s| <= 50`; the Hankel
/// expansion is used beyond.
pub fn bessel_j0(s: f64) -> Result<f64> {
    if !(s.abs() <= J0_MAX_ARG) {
        return Err(Error::invalid(format!(
            "bessel_j0 needs |s| <= {J0_MAX_ARG}, got {s}"
        )));
    }
    let s = s.abs();
    if s == 0.0 {
        return Ok(1.0);
    }
    if s <= J0_SWITCH {
        Ok(j0_rule().apply_on(|t| (s * t.sin()).cos(), 0.0, PI) / PI)
    } else {
        Ok(j0_hankel(s))
    }
}

/// Classical Legendre polynomial `P_N(t)` with `P_N(1) = 1`.
pub fn legendre_poly(n: usize, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "legendre_poly needs |t| <= 1, got {t}"
        )));
    }
    if n > LEGENDRE_MAX_DEGREE {
        return Err(Error::invalid(format!(
            "legendre_poly degree {n} exceeds {LEGENDRE_MAX_DEGREE}"
        )));
    }
    if n == 0 || t == 1.0 {
        return Ok(1.0);
    }
    if t == -1.0 {
        return Ok(if n.is_multiple_of(2) { 1.0 } else { -1.0 });
    }
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}
