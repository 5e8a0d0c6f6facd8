//! Normalized associated Legendre functions at large degree and order.
//!
//! `P^m_N` here is the `L^2([-1,1])`-normalized function without the
//! Condon-Shortley phase, so it is positive near `x = 1`:
//!
//! ```text
//! P^m_N(x) = sqrt((N + 1/2) (N-m)!/(N+m)!) (1-x^2)^{m/2} d^{N+m}/dx^{N+m} (x^2-1)^N / (2^N N!)
//! ```
//!
//! Values are produced by the ascending-degree three-term recurrence at fixed
//! order, started from the sectoral seed `P^m_m`. The seed behaves like
//! `sin^m`, which underflows `f64` for large orders, so every value travels as a
//! [`ScaledValue`] with a decimal exponent.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::{Error, Result};

/// Largest degree accepted by the Legendre evaluators.
pub const MAX_DEGREE: u64 = 1_000_000;

const RENORM_HIGH: f64 = 1e140;
const RENORM_LOW: f64 = 1e-140;
/// 10^22 is the largest power of ten that is exact in binary64, so each
/// renormalization step is a single correctly rounded division or product.
const RENORM_STEP: f64 = 1e22;
const RENORM_STEP_EXP: i64 = 22;

/// A real number `mantissa * 10^exp10` with `|mantissa|` kept in
/// `[1e-140, 1e140]` (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    mantissa: f64,
    exp10: i64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: 0.0,
        exp10: 0,
    };

    /// Builds `mantissa * 10^exp10`, renormalizing the mantissa into range.
    pub fn new(mantissa: f64, exp10: i64) -> Self {
        let mut v = ScaledValue { mantissa, exp10 };
        v.renormalize();
        v
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exp10(&self) -> i64 {
        self.exp10
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    pub fn abs(&self) -> Self {
        ScaledValue {
            mantissa: self.mantissa.abs(),
            exp10: self.exp10,
        }
    }

    /// `log10 |value|`; `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        self.mantissa.abs().log10() + self.exp10 as f64
    }

    /// Collapses to `f64`; may overflow to infinity or underflow to zero.
    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        if self.exp10 > 400 {
            return self.mantissa.signum() * f64::INFINITY;
        }
        if self.exp10 < -700 {
            return 0.0 * self.mantissa.signum();
        }
        // split the exponent so neither factor overflows on its own
        let e = self.exp10 as i32;
        let half = e / 2;
        self.mantissa * 10f64.powi(half) * 10f64.powi(e - half)
    }

    /// True when [`to_f64`](Self::to_f64) is finite and, unless the value is
    /// zero, not flushed to zero or into the subnormal range.
    pub fn is_representable(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let v = self.to_f64();
        v.is_finite() && v.abs() >= f64::MIN_POSITIVE
    }

    pub fn mul_f64(&self, factor: f64) -> Self {
        Self::new(self.mantissa * factor, self.exp10)
    }

    pub fn square(&self) -> Self {
        Self::new(self.mantissa * self.mantissa, 2 * self.exp10)
    }

    /// Value expressed against the decimal exponent `exp10`, i.e. the `x`
    /// with `self = x * 10^exp10`.
    pub fn relative_to(&self, exp10: i64) -> f64 {
        ScaledValue {
            mantissa: self.mantissa,
            exp10: self.exp10 - exp10,
        }
        .to_f64()
    }

    fn renormalize(&mut self) {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            if self.mantissa == 0.0 {
                self.exp10 = 0;
            }
            return;
        }
        // the running quotient is kept as an unevaluated sum hi + lo so that
        // several 10^22 steps still round only once at the end
        let (mut hi, mut lo) = (self.mantissa, 0.0f64);
        while hi.abs() > RENORM_HIGH {
            let q = hi / RENORM_STEP;
            let r = (-q).mul_add(RENORM_STEP, hi);
            (hi, lo) = two_sum(q, (r + lo) / RENORM_STEP);
            self.exp10 += RENORM_STEP_EXP;
        }
        while hi.abs() < RENORM_LOW {
            let p = hi * RENORM_STEP;
            let e = hi.mul_add(RENORM_STEP, -p);
            (hi, lo) = two_sum(p, lo.mul_add(RENORM_STEP, e));
            self.exp10 -= RENORM_STEP_EXP;
        }
        self.mantissa = hi;
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl std::fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // shift the exponent of the correctly rounded mantissa text
        let text = format!("{:.16e}", self.mantissa);
        match text.split_once('e').map(|(d, e)| (d, e.parse::<i64>())) {
            Some((digits, Ok(e))) if self.mantissa.is_finite() => {
                write!(f, "{digits}e{}", e + self.exp10)
            }
            _ => f.write_str(&text),
        }
    }
}

/// A rational ladder `(m_k, N_k) = ((2k+1) m0, (2k+1) N0 + k)` along which
/// `m_k / (N_k + 1/2) = 2 m0 / (2 N0 + 1)` is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    m0: u64,
    n0: u64,
}

impl Ladder {
    pub fn new(m0: u64, n0: u64) -> Result<Self> {
        if m0 > n0 {
            return Err(Error::invalid(format!(
                "ladder needs m0 <= N0, got m0={m0}, N0={n0}"
            )));
        }
        if n0 > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "ladder base degree {n0} exceeds {MAX_DEGREE}"
            )));
        }
        Ok(Ladder { m0, n0 })
    }

    pub fn m0(&self) -> u64 {
        self.m0
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// The exact ratio `c` as `(2 m0, 2 N0 + 1)`.
    pub fn ratio(&self) -> (u64, u64) {
        (2 * self.m0, 2 * self.n0 + 1)
    }

    pub fn c(&self) -> f64 {
        let (num, den) = self.ratio();
        num as f64 / den as f64
    }

    pub fn member(&self, k: u64) -> Result<LadderMember> {
        ladder_member(*self, k)
    }
}

/// One element of a ladder: order `m`, degree `n`, and `h = 1/(n + 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderMember {
    pub m: u64,
    pub n: u64,
    pub h: f64,
}

impl LadderMember {
    /// Member for an arbitrary admissible pair, outside any ladder.
    pub fn new(m: u64, n: u64) -> Result<Self> {
        check_order_degree(n, m)?;
        Ok(LadderMember {
            m,
            n,
            h: 2.0 / (2 * n + 1) as f64,
        })
    }

    /// True when `N - m` is odd.
    pub fn is_odd(&self) -> bool {
        (self.n - self.m) % 2 == 1
    }
}

pub fn ladder_member(ladder: Ladder, k: u64) -> Result<LadderMember> {
    let stretch = k
        .checked_mul(2)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| Error::invalid(format!("ladder index {k} overflows")))?;
    let n = stretch
        .checked_mul(ladder.n0)
        .and_then(|v| v.checked_add(k))
        .filter(|&n| n <= MAX_DEGREE)
        .ok_or_else(|| {
            Error::invalid(format!("ladder member k={k} has degree above {MAX_DEGREE}"))
        })?;
    let m = stretch * ladder.m0;
    Ok(LadderMember {
        m,
        n,
        h: 2.0 / (2 * n + 1) as f64,
    })
}

fn check_order_degree(n: u64, m: u64) -> Result<()> {
    if m > n {
        return Err(Error::domain(format!(
            "order exceeds degree (m={m}, N={n})"
        )));
    }
    if n > MAX_DEGREE {
        return Err(Error::invalid(format!("degree {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

/// The recurrence engine. The default engine is the exact one; a perturbed
/// engine exists so that self-tests can demonstrate that the orthonormality
/// check catches a corrupted recurrence coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreEngine {
    coefficient_error: f64,
}

impl Default for LegendreEngine {
    fn default() -> Self {
        Self::exact()
    }
}

impl LegendreEngine {
    pub const fn exact() -> Self {
        LegendreEngine {
            coefficient_error: 0.0,
        }
    }

    /// Engine whose `a_N` coefficients are scaled by `1 + rel`.
    #[doc(hidden)]
    pub const fn with_corrupted_coefficient(rel: f64) -> Self {
        LegendreEngine {
            coefficient_error: rel,
        }
    }

    /// `P^m_N(x)` for `x` in `[-1, 1]`.
    pub fn eval(&self, n: u64, m: u64, x: f64) -> Result<ScaledValue> {
        check_order_degree(n, m)?;
        if !(x.abs() <= 1.0) {
            return Err(Error::domain(format!("|x| must be <= 1, got {x}")));
        }
        let (a, ea) = two_sum(1.0, -x);
        let (b, eb) = two_sum(1.0, x);
        let s = Dd { hi: a, lo: ea }.mul(Dd { hi: b, lo: eb }).sqrt();
        Ok(self.recurrence(n, m, x, s))
    }

    /// `P^m_N(cos phi)` using `sin phi` directly, which keeps the seed accurate
    /// near the poles.
    pub fn eval_angle(&self, n: u64, m: u64, phi: f64) -> Result<ScaledValue> {
        check_order_degree(n, m)?;
        if !(0.0..=PI).contains(&phi) {
            return Err(Error::domain(format!("phi must lie in [0, pi], got {phi}")));
        }
        let (s, x) = phi.sin_cos();
        Ok(self.recurrence(n, m, x, Dd::from(s.abs())))
    }

    fn recurrence(&self, n: u64, m: u64, x: f64, s: Dd) -> ScaledValue {
        if m > 0 && s.hi == 0.0 {
            return ScaledValue::ZERO;
        }
        // Everything that depends on x runs in double-double; the coefficients
        // stay in f64, where their rounding is the same for every x.
        // sectoral seed: P^m_m = C_m s^m with C_m = 2^{-1/2} prod_i sqrt((2i+1)/(2i))
        let mut coef = std::f64::consts::FRAC_1_SQRT_2;
        for i in 1..=m {
            let fi = i as f64;
            coef *= ((2.0 * fi + 1.0) / (2.0 * fi)).sqrt();
        }
        let (mut prev, mut exp10) = dd_powi_scaled(s, m);
        prev = prev.mul_f64(coef);
        if n == m {
            return ScaledValue::new(prev.hi + prev.lo, exp10);
        }
        let mf = m as f64;
        let xd = Dd::from(x);
        let mut cur = xd.mul(prev).mul_f64((2.0 * mf + 3.0).sqrt());
        let scale = 1.0 + self.coefficient_error;
        for deg in (m + 2)..=n {
            let d = deg as f64;
            let nm = d - mf;
            let np = d + mf;
            let a = ((2.0 * d - 1.0) * (2.0 * d + 1.0) / (nm * np)).sqrt() * scale;
            let b =
                ((2.0 * d + 1.0) * (nm - 1.0) * (np - 1.0) / ((2.0 * d - 3.0) * nm * np)).sqrt();
            let next = Dd::two_prod(a, x).mul(cur).sub(prev.mul_f64(b));
            prev = cur;
            cur = next;
            if cur.hi.abs() > RENORM_HIGH {
                cur = cur.mul_f64(1.0 / RENORM_STEP);
                prev = prev.mul_f64(1.0 / RENORM_STEP);
                exp10 += RENORM_STEP_EXP;
            } else if cur.hi.abs() < RENORM_LOW
                && prev.hi.abs() < RENORM_LOW
                && (cur.hi != 0.0 || prev.hi != 0.0)
            {
                cur = cur.mul_f64(RENORM_STEP);
                prev = prev.mul_f64(RENORM_STEP);
                exp10 -= RENORM_STEP_EXP;
            }
        }
        ScaledValue::new(cur.hi + cur.lo, exp10)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Dd {
    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn mul(self, o: Dd) -> Self {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::renorm(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Dd::two_prod(self.hi, b);
        Dd::renorm(p.hi, p.lo + self.lo * b)
    }

    fn sub(self, o: Dd) -> Self {
        let (s, e) = two_sum(self.hi, -o.hi);
        Dd::renorm(s, e + (self.lo - o.lo))
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let r = self.hi.sqrt();
        let sq = Dd::two_prod(r, r);
        let resid = (self.hi - sq.hi - sq.lo) + self.lo;
        Dd::renorm(r, resid / (2.0 * r))
    }
}

/// `s^m` as a double-double mantissa and a decimal exponent.
fn dd_powi_scaled(s: Dd, m: u64) -> (Dd, i64) {
    let mut acc = Dd::from(1.0);
    let mut acc_exp = 0i64;
    let mut base = s;
    let mut base_exp = 0i64;
    let mut k = m;
    let keep = |v: &mut Dd, e: &mut i64| {
        while v.hi.abs() < RENORM_LOW && v.hi != 0.0 {
            *v = v.mul_f64(RENORM_STEP);
            *e -= RENORM_STEP_EXP;
        }
        while v.hi.abs() > RENORM_HIGH {
            *v = v.mul_f64(1.0 / RENORM_STEP);
            *e += RENORM_STEP_EXP;
        }
    };
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(base);
            acc_exp += base_exp;
            keep(&mut acc, &mut acc_exp);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(base);
            base_exp *= 2;
            keep(&mut base, &mut base_exp);
        }
    }
    (acc, acc_exp)
}

/// The normalized associated Legendre function `P^m_N(x)`.
pub fn legendre_assoc_norm(n: u64, m: u64, x: f64) -> Result<ScaledValue> {
    LegendreEngine::exact().eval(n, m, x)
}

/// Evaluates `P^m_N` at many points; points are processed independently.
pub fn legendre_assoc_norm_batch(n: u64, m: u64, xs: &[f64]) -> Vec<Result<ScaledValue>> {
    xs.par_iter()
        .map(|&x| legendre_assoc_norm(n, m, x))
        .collect()
}

/// The conjugated mode `u_h(phi) = sqrt(sin phi) P^m_N(cos phi)` on `(0, pi)`.
pub fn mode_u(member: &LadderMember, phi: f64) -> Result<ScaledValue> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::domain(format!(
            "mode_u needs phi in (0, pi), got {phi}"
        )));
    }
    let p = LegendreEngine::exact().eval_angle(member.n, member.m, phi)?;
    Ok(p.mul_f64(phi.sin().sqrt()))
}

/// `|Y^m_N(phi, theta)|^2 = P^{|m|}_N(cos phi)^2 / (2 pi)`, independent of `theta`.
pub fn sph_harm_sq(n: u64, m: i64, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::domain(format!(
            "sph_harm_sq needs phi in (0, pi), got {phi}"
        )));
    }
    let p = LegendreEngine::exact().eval_angle(n, m.unsigned_abs(), phi)?;
    Ok(p.square().to_f64() / (2.0 * PI))
}

/// Result of [`ode_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual {
    /// `|L P| / ((N + 1/2)^2 |P|)` with Richardson-extrapolated differences.
    pub residual: f64,
    /// Estimated size of the rounding contribution on the same scale.
    pub rounding_floor: f64,
    /// Set when rounding is not negligible against the residual.
    pub rounding_dominated: bool,
}

/// Residual of `(1-x^2) P'' - 2x P' + ((N+1/2)^2 - m^2/(1-x^2) - 1/4) P = 0`
/// for the evaluated `P^m_N`, with derivatives from central differences and one
/// Richardson extrapolation.
pub fn ode_residual(n: u64, m: u64, x: f64, step: f64) -> Result<OdeResidual> {
    check_order_degree(n, m)?;
    if !(x.abs() <= 0.9) {
        return Err(Error::invalid(format!(
            "ode_residual needs |x| <= 0.9, got {x}"
        )));
    }
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::invalid(format!(
            "ode_residual needs 0 < step <= 1e-3, got {step}"
        )));
    }
    let engine = LegendreEngine::exact();
    let centre = engine.eval(n, m, x)?;
    let anchor = centre.exp10();
    let at = |t: f64| -> Result<f64> { Ok(engine.eval(n, m, t)?.relative_to(anchor)) };
    let p0 = centre.relative_to(anchor);
    let (pp1, pm1) = (at(x + step)?, at(x - step)?);
    let half = 0.5 * step;
    let (pp2, pm2) = (at(x + half)?, at(x - half)?);

    let d1 = |plus: f64, minus: f64, h: f64| (plus - minus) / (2.0 * h);
    let d2 = |plus: f64, minus: f64, h: f64| (plus - 2.0 * p0 + minus) / (h * h);
    let first = (4.0 * d1(pp2, pm2, half) - d1(pp1, pm1, step)) / 3.0;
    let second = (4.0 * d2(pp2, pm2, half) - d2(pp1, pm1, step)) / 3.0;

    let nh = n as f64 + 0.5;
    let mf = m as f64;
    let one_minus = (1.0 - x) * (1.0 + x);
    let lp = one_minus * second - 2.0 * x * first + (nh * nh - mf * mf / one_minus - 0.25) * p0;

    let big = [p0, pp1, pm1, pp2, pm2]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let norm = nh * nh * if p0 != 0.0 { p0.abs() } else { big };
    if norm == 0.0 {
        return Ok(OdeResidual {
            residual: 0.0,
            rounding_floor: 0.0,
            rounding_dominated: true,
        });
    }
    // each value carries about one rounding of its own plus the rounding of
    // x +- step pushed through P'; the extrapolated second difference
    // amplifies that by (16/3 * 4 + 1/3 * 4) / h^2
    let noise = f64::EPSILON * (1.0 + nh * (x.abs() + step) / one_minus.sqrt());
    let floor_abs = noise * big * (one_minus * 22.7 / (step * step) + 2.0 * x.abs() * 1.5 / step);
    let residual = lp.abs() / norm;
    let rounding_floor = floor_abs / norm;
    Ok(OdeResidual {
        residual,
        rounding_floor,
        rounding_dominated: rounding_floor >= 0.1 * residual,
    })
}
