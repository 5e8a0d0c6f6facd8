//! Semiclassical approximations of the conjugated mode `u_h` along a ladder.
//!
//! With `h = 1/(N + 1/2)` and `c = h m`, the mode solves
//! `-h^2 u'' + (V(phi) - 1) u = O(h^2) u` with `V(phi) = c^2 / sin^2 phi`. The
//! allowed region is `[phi_-, phi_+]` where `sin phi >= c`; the turning point
//! `phi_+` is the caustic where the amplitude peaks.
//!
//! This module provides the geometry (turning points, the action `A`, the
//! Airy argument `rho`), the leading WKB and Airy approximations, and a scan
//! that compares them against the exact mode from [`crate::legendre`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::legendre::{mode_u, Ladder, LadderMember};
use crate::quadrature::{integrate, Endpoints};
use crate::specfun::{airy, AIRY_MAX_ARG};
use crate::{Error, Result};

/// Minimum distance from either turning point for [`wkb_leading`].
pub const WKB_DELTA: f64 = 0.05;
/// Width of the window below `phi_+` where [`airy_leading`] applies.
pub const AIRY_WINDOW: f64 = 0.3;
/// Below this distance to `phi_+` the ratio `4 rho / (sin^2 phi - c^2)` is
/// replaced by its limit.
pub const CAUSTIC_LIMIT_GAP: f64 = 1e-4;

const ACTION_TOL: f64 = 1e-13;

/// Turning points and potential for a fixed ratio `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderGeometry {
    c: f64,
    phi_minus: f64,
    phi_plus: f64,
}

impl LadderGeometry {
    pub fn new(c: f64) -> Result<Self> {
        let (phi_minus, phi_plus) = turning_points(c)?;
        Ok(LadderGeometry {
            c,
            phi_minus,
            phi_plus,
        })
    }

    pub fn from_ladder(ladder: &Ladder) -> Result<Self> {
        Self::new(ladder.c())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn phi_minus(&self) -> f64 {
        self.phi_minus
    }

    pub fn phi_plus(&self) -> f64 {
        self.phi_plus
    }

    /// `V(phi) = c^2 / sin^2 phi`.
    pub fn potential(&self, phi: f64) -> f64 {
        let s = phi.sin();
        self.c * self.c / (s * s)
    }

    pub fn is_allowed(&self, phi: f64) -> bool {
        phi >= self.phi_minus && phi <= self.phi_plus
    }

    /// `sin phi - c`, computed against the nearer turning point so that it
    /// keeps full relative accuracy as `phi` approaches either one.
    fn sin_minus_c(&self, phi: f64) -> f64 {
        let tp = if phi >= FRAC_PI_2 {
            self.phi_plus
        } else {
            self.phi_minus
        };
        2.0 * (0.5 * (phi + tp)).cos() * (0.5 * (phi - tp)).sin()
    }

    /// `sin^2 phi - c^2`, accurate near the turning points.
    pub fn gap(&self, phi: f64) -> f64 {
        self.sin_minus_c(phi) * (phi.sin() + self.c)
    }

    /// Derivative `-V'(phi_+) = 2 sqrt(1 - c^2) / c`, the slope of `1 - V` at
    /// the caustic.
    pub fn caustic_force(&self) -> f64 {
        2.0 * (1.0 - self.c * self.c).sqrt() / self.c
    }
}

pub fn turning_points(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("c must lie in (0, 1), got {c}")));
    }
    let a = c.asin();
    Ok((a, PI - a))
}

/// The action `A(phi) = int_phi^{phi_+} sqrt(1 - c^2 / sin^2 psi) dpsi`.
pub fn action(geom: &LadderGeometry, phi: f64) -> Result<f64> {
    if !geom.is_allowed(phi) {
        return Err(Error::domain(format!(
            "phi = {phi} outside the allowed interval [{}, {}]",
            geom.phi_minus, geom.phi_plus
        )));
    }
    if phi == geom.phi_plus {
        return Ok(0.0);
    }
    let f = |psi: f64| {
        let d = geom.sin_minus_c(psi).max(0.0);
        let s = psi.sin();
        (d * (s + geom.c)).sqrt() / s
    };
    let ends = if phi < FRAC_PI_2 {
        Endpoints::SqrtAtBoth
    } else {
        Endpoints::SqrtAtB
    };
    integrate(f, phi, geom.phi_plus, ACTION_TOL, ends)
}

/// Which coefficient relates `rho^{3/2}` to the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoConvention {
    /// `rho = ((3/2) A)^{2/3}`, so that `(2/3) rho^{3/2} = A`.
    #[default]
    ThreeHalves,
    /// `rho = ((8/3) A)^{2/3}`, the alternative reading with the reciprocal
    /// coefficient. Kept for comparison; it does not match the WKB phase.
    FourThirds,
}

impl RhoConvention {
    fn action_factor(self) -> f64 {
        match self {
            RhoConvention::ThreeHalves => 1.5,
            RhoConvention::FourThirds => 8.0 / 3.0,
        }
    }
}

/// `rho(phi) = ((3/2) A(phi))^{2/3}`.
pub fn airy_arg_rho(geom: &LadderGeometry, phi: f64) -> Result<f64> {
    airy_arg_rho_with(geom, phi, RhoConvention::ThreeHalves)
}

pub fn airy_arg_rho_with(geom: &LadderGeometry, phi: f64, conv: RhoConvention) -> Result<f64> {
    if !(phi > geom.phi_minus && phi <= geom.phi_plus) {
        return Err(Error::domain(format!(
            "rho needs phi in ({}, {}], got {phi}",
            geom.phi_minus, geom.phi_plus
        )));
    }
    Ok((conv.action_factor() * action(geom, phi)?).powf(2.0 / 3.0))
}

/// Limit of `rho / (phi_+ - phi)` at the caustic.
pub fn caustic_slope(geom: &LadderGeometry) -> f64 {
    geom.caustic_force().cbrt()
}

/// Limit of `4 rho / (sin^2 phi - c^2)` at the caustic,
/// `(2/c)^{4/3} (1 - c^2)^{-1/3}`.
pub fn caustic_ratio_limit(geom: &LadderGeometry) -> f64 {
    let c = geom.c;
    (2.0 / c).powf(4.0 / 3.0) * (1.0 - c * c).powf(-1.0 / 3.0)
}

/// The allowed-region amplitude `sqrt(2 sin phi / pi) (sin^2 phi - c^2)^{-1/4}`.
pub fn wkb_envelope(geom: &LadderGeometry, phi: f64) -> f64 {
    (2.0 * phi.sin() / PI).sqrt() * geom.gap(phi).powf(-0.25)
}

/// Phase convention for [`wkb_leading_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WkbPhase {
    /// Both parities measured with the arc integral oriented from the caustic:
    /// `+cos(A/h - pi/4)` for `N - m` odd and `-sin(A/h + pi/4)` for `N - m`
    /// even.
    #[default]
    Oriented,
    /// `+cos(A/h + pi/4)` for odd and `-sin(A/h + pi/4)` for even, with `A`
    /// entering both with the same sign. The odd case is then a quarter period
    /// off the true mode.
    Literal,
}

/// Leading WKB term in the allowed region, at least [`WKB_DELTA`] from both
/// turning points.
pub fn wkb_leading(member: &LadderMember, geom: &LadderGeometry, phi: f64) -> Result<f64> {
    wkb_leading_with(member, geom, phi, WkbPhase::Oriented)
}

pub fn wkb_leading_with(
    member: &LadderMember,
    geom: &LadderGeometry,
    phi: f64,
    phase: WkbPhase,
) -> Result<f64> {
    if !(phi - geom.phi_minus >= WKB_DELTA && geom.phi_plus - phi >= WKB_DELTA) {
        return Err(Error::Proximity {
            phi,
            delta: WKB_DELTA,
        });
    }
    let theta = action(geom, phi)? / member.h;
    let amp = wkb_envelope(geom, phi);
    Ok(match (member.is_odd(), phase) {
        (true, WkbPhase::Oriented) => amp * (theta - FRAC_PI_4).cos(),
        (true, WkbPhase::Literal) => amp * (theta + FRAC_PI_4).cos(),
        (false, _) => -amp * (theta + FRAC_PI_4).sin(),
    })
}

/// Leading Airy term near the caustic:
/// `sqrt(sin phi) h^{-1/6} (4 rho / (sin^2 phi - c^2))^{1/4} Ai(-h^{-2/3} rho)`.
///
/// Applies for `phi` in `[phi_+ - AIRY_WINDOW, phi_+]` (and not below `phi_-`).
/// When the Airy argument exceeds the range of [`airy`], the oscillatory
/// asymptotic form is returned instead, which is the WKB term written in the
/// same sign convention.
pub fn airy_leading(member: &LadderMember, geom: &LadderGeometry, phi: f64) -> Result<f64> {
    airy_leading_with(member, geom, phi, RhoConvention::ThreeHalves)
}

pub fn airy_leading_with(
    member: &LadderMember,
    geom: &LadderGeometry,
    phi: f64,
    conv: RhoConvention,
) -> Result<f64> {
    if !(phi >= geom.phi_plus - AIRY_WINDOW && phi <= geom.phi_plus && phi > geom.phi_minus) {
        return Err(Error::domain(format!(
            "airy_leading needs phi in [{}, {}], got {phi}",
            (geom.phi_plus - AIRY_WINDOW).max(geom.phi_minus),
            geom.phi_plus
        )));
    }
    let h = member.h;
    let rho = airy_arg_rho_with(geom, phi, conv)?;
    let t = rho * h.powf(-2.0 / 3.0);
    if t > AIRY_MAX_ARG {
        let theta = action(geom, phi)? / h;
        let amp = wkb_envelope(geom, phi);
        return Ok(amp * (theta - FRAC_PI_4).cos());
    }
    let ratio = if geom.phi_plus - phi < CAUSTIC_LIMIT_GAP {
        let scale = (conv.action_factor() / 1.5).powf(2.0 / 3.0);
        scale * caustic_ratio_limit(geom)
    } else {
        4.0 * rho / geom.gap(phi)
    };
    let ai = airy(-t)?.ai;
    Ok(phi.sin().sqrt() * h.powf(-1.0 / 6.0) * ratio.powf(0.25) * ai)
}

/// Relative gap `|airy_leading - s wkb_leading| / envelope` between the two
/// approximations, where `s = +1` for `N - m` odd and `-1` for even aligns the
/// sign conventions of the two formulas.
pub fn matching_gap(
    member: &LadderMember,
    geom: &LadderGeometry,
    phi: f64,
    conv: RhoConvention,
) -> Result<f64> {
    let airy_val = airy_leading_with(member, geom, phi, conv)?;
    let wkb = wkb_leading(member, geom, phi)?;
    let s = if member.is_odd() { 1.0 } else { -1.0 };
    Ok((airy_val - s * wkb).abs() / wkb_envelope(geom, phi))
}

/// Solves `h^{-2/3} rho(phi) = t` for `phi` in `(phi_-, phi_+]` by bisection.
pub fn phi_at_airy_arg(member: &LadderMember, geom: &LadderGeometry, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "Airy argument must be nonnegative, got {t}"
        )));
    }
    let target = t * member.h.powf(2.0 / 3.0);
    let rho_max = airy_arg_rho(geom, geom.phi_minus + 1e-12)?;
    if target > rho_max {
        return Err(Error::invalid(format!(
            "Airy argument {t} is beyond the allowed region for h = {}",
            member.h
        )));
    }
    // rho is decreasing in phi
    let (mut lo, mut hi) = (geom.phi_minus + 1e-12, geom.phi_plus);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if airy_arg_rho(geom, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Location and size of the largest `|u_h|` within `4 h^{2/3}` of the caustic.
pub fn caustic_peak(member: &LadderMember, geom: &LadderGeometry) -> Result<(f64, f64)> {
    const SAMPLES: usize = 400;
    let scale = member.h.powf(2.0 / 3.0);
    let phi_at = |j: usize| geom.phi_plus - 4.0 * scale * j as f64 / SAMPLES as f64;
    let abs_u = |phi: f64| -> Result<f64> { Ok(mode_u(member, phi)?.to_f64().abs()) };
    let values = (1..=SAMPLES)
        .map(|j| abs_u(phi_at(j)))
        .collect::<Result<Vec<_>>>()?;
    let (idx, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    // golden-section refinement on the bracketing samples
    let j = idx + 1;
    let mut a = phi_at((j + 1).min(SAMPLES));
    let mut b = phi_at(j.saturating_sub(1).max(1));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (abs_u(x1)?, abs_u(x2)?);
    for _ in 0..60 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = abs_u(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = abs_u(x2)?;
        }
    }
    let (phi, peak) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(if peak >= values[idx] {
        (phi, peak)
    } else {
        (phi_at(j), values[idx])
    })
}

/// The angles at which a scan evaluates each ladder member.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiGrid {
    /// The same explicit angles for every member.
    Fixed(Vec<f64>),
    /// `phi_+ - j h^{2/3}` for `j = 1..=n`, which depends on the member.
    Caustic(usize),
}

impl PhiGrid {
    pub fn angles(&self, geom: &LadderGeometry, member: &LadderMember) -> Vec<f64> {
        match self {
            PhiGrid::Fixed(v) => v.clone(),
            PhiGrid::Caustic(n) => {
                let scale = member.h.powf(2.0 / 3.0);
                (1..=*n).map(|j| geom.phi_plus - j as f64 * scale).collect()
            }
        }
    }
}

/// One comparison between the exact mode and both approximations.
///
/// `wkb`/`airy` (and their errors) are `NaN` where the formula does not apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub k: u64,
    pub n: u64,
    pub m: u64,
    pub h: f64,
    pub phi: f64,
    pub exact: f64,
    pub wkb: f64,
    pub airy: f64,
    pub err_wkb: f64,
    pub err_airy: f64,
}

/// Sign `s` chosen for one member and one approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChoice {
    pub k: u64,
    pub wkb: Option<f64>,
    pub airy: Option<f64>,
}

/// Result of [`caustic_scan`].
///
/// `fitted_order_wkb` regresses the largest absolute WKB error per member
/// against `h`; `fitted_order_airy` regresses the largest Airy error divided
/// by the largest `|exact|` over the same points. Either is `None` when fewer
/// than three members have a positive error.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ScanRow>,
    pub signs: Vec<SignChoice>,
    /// False if some point with `|exact|` at least half the largest value
    /// disagrees in sign with the chosen `s`.
    pub sign_consistent: bool,
    pub fitted_order_wkb: Option<f64>,
    pub fitted_order_airy: Option<f64>,
}

/// Compares `u_h` with [`wkb_leading`] and [`airy_leading`] for each `k` on
/// the given grid.
///
/// For every member and each approximation a global sign `s` is fixed at the
/// grid point of largest `|exact|` where the approximation applies; errors
/// are `|approx - s exact|`.
pub fn caustic_scan(ladder: &Ladder, k_list: &[u64], grid: &PhiGrid) -> Result<ErrorTable> {
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("k values must be strictly ascending"));
    }
    let geom = LadderGeometry::from_ladder(ladder)?;
    let members = k_list
        .iter()
        .map(|&k| Ok((k, ladder.member(k)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for &(k, member) in &members {
        let mut angles = grid.angles(&geom, &member);
        angles.sort_by(f64::total_cmp);
        for phi in angles {
            if !(phi > geom.phi_minus && phi <= geom.phi_plus && phi < PI) {
                return Err(Error::domain(format!(
                    "phi = {phi} is outside the allowed region ({}, {}] for k = {k}",
                    geom.phi_minus, geom.phi_plus
                )));
            }
            jobs.push((k, member, phi));
        }
    }

    let evaluated = jobs
        .par_iter()
        .map(|&(k, member, phi)| -> Result<ScanRow> {
            let exact = mode_u(&member, phi)?.to_f64();
            let wkb = match wkb_leading(&member, &geom, phi) {
                Ok(v) => v,
                Err(Error::Proximity { .. }) => f64::NAN,
                Err(e) => return Err(e),
            };
            let airy_val = if phi >= geom.phi_plus - AIRY_WINDOW {
                airy_leading(&member, &geom, phi)?
            } else {
                f64::NAN
            };
            Ok(ScanRow {
                k,
                n: member.n,
                m: member.m,
                h: member.h,
                phi,
                exact,
                wkb,
                airy: airy_val,
                err_wkb: f64::NAN,
                err_airy: f64::NAN,
            })
        })
        .collect::<Vec<_>>();
    let mut rows = evaluated.into_iter().collect::<Result<Vec<_>>>()?;

    let mut signs = Vec::with_capacity(members.len());
    let mut sign_consistent = true;
    let mut sup_wkb = Vec::new();
    let mut sup_airy = Vec::new();
    for &(k, member) in &members {
        let block: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].k == k).collect();
        let mut choice = SignChoice {
            k,
            wkb: None,
            airy: None,
        };
        for (which, slot) in [(0, &mut choice.wkb), (1, &mut choice.airy)] {
            let approx = |r: &ScanRow| if which == 0 { r.wkb } else { r.airy };
            let usable: Vec<usize> = block
                .iter()
                .copied()
                .filter(|&i| approx(&rows[i]).is_finite())
                .collect();
            let Some(&anchor) = usable
                .iter()
                .max_by(|&&a, &&b| rows[a].exact.abs().total_cmp(&rows[b].exact.abs()))
            else {
                continue;
            };
            let s = if approx(&rows[anchor]) * rows[anchor].exact < 0.0 {
                -1.0
            } else {
                1.0
            };
            *slot = Some(s);
            let peak = rows[anchor].exact.abs();
            let mut sup_err = 0.0f64;
            for &i in &usable {
                let r = &mut rows[i];
                let a = approx(r);
                if r.exact.abs() >= 0.5 * peak && a * r.exact * s < 0.0 {
                    sign_consistent = false;
                }
                let err = (a - s * r.exact).abs();
                sup_err = sup_err.max(err);
                if which == 0 {
                    r.err_wkb = err;
                } else {
                    r.err_airy = err;
                }
            }
            if which == 0 {
                sup_wkb.push((member.h, sup_err));
            } else if peak > 0.0 {
                sup_airy.push((member.h, sup_err / peak));
            }
        }
        signs.push(choice);
    }

    let fit = |pairs: &[(f64, f64)]| {
        if pairs.len() >= 3 && pairs.iter().all(|p| p.1 > 0.0) {
            fit_order(pairs).ok()
        } else {
            None
        }
    };
    Ok(ErrorTable {
        fitted_order_wkb: fit(&sup_wkb),
        fitted_order_airy: fit(&sup_airy),
        rows,
        signs,
        sign_consistent,
    })
}

/// Least-squares slope of `log err` against `log h`.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::InvalidData(format!(
            "need at least 3 points, got {}",
            pairs.len()
        )));
    }
    if let Some(p) = pairs.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::InvalidData(format!(
            "errors must be positive and finite, got {}",
            p.1
        )));
    }
    if let Some(p) = pairs.iter().find(|p| !(p.0 > 0.0) || !p.0.is_finite()) {
        return Err(Error::InvalidData(format!(
            "step sizes must be positive, got {}",
            p.0
        )));
    }
    if pairs.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::InvalidData(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
