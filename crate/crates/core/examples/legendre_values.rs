//! Normalized associated Legendre functions at large degree, where the
//! sectoral factor `sin^m` leaves the range of `f64`.

use caustics::legendre::{legendre_assoc_norm, mode_u, ode_residual, Ladder, LegendreEngine};
use caustics::quadrature::gauss_legendre;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let v = legendre_assoc_norm(1, 1, 0.0)?;
    println!("P^1_1(0) = {:.16e}", v.to_f64());

    // far below f64::MIN_POSITIVE, carried with a decimal exponent
    let tiny = LegendreEngine::exact().eval_angle(6000, 5000, 0.05)?;
    println!(
        "P^5000_6000(cos 0.05) = {tiny}  (log10 = {:.6})",
        tiny.log10_abs()
    );

    let rule = gauss_legendre(201)?;
    let norm = rule.apply(|x| {
        legendre_assoc_norm(200, 100, x)
            .map(|p| p.to_f64().powi(2))
            .unwrap_or(f64::NAN)
    });
    println!("int (P^100_200)^2 dx = {norm:.15}");

    let r = ode_residual(200, 80, 0.3, 1e-3)?;
    println!(
        "ODE residual at N=200, m=80: {:.3e} (rounding floor {:.1e})",
        r.residual, r.rounding_floor
    );

    let ladder = Ladder::new(1, 1)?;
    for k in [0, 1, 31, 255] {
        let member = ladder.member(k)?;
        let u = mode_u(&member, std::f64::consts::FRAC_PI_2)?;
        println!(
            "k={k:>3}  (m, N) = ({}, {})  h = {:.6e}  u_h(pi/2) = {:+.6e}",
            member.m,
            member.n,
            member.h,
            u.to_f64()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
