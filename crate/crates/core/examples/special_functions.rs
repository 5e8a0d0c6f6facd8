//! Airy, Bessel J0 and Gauss-Legendre building blocks.

use caustics::measures::{j0_fourier_gap, mehler_heine_gap};
use caustics::quadrature::{gauss_legendre, integrate, Endpoints};
use caustics::specfun::{airy, bessel_j0};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for x in [-10.0, -2.0, 0.0, 2.0, 10.0] {
        let a = airy(x)?;
        println!("Ai({x:>5}) = {:+.15e}   Ai' = {:+.15e}", a.ai, a.ai_prime);
    }
    for s in [1.0, 5.0, 20.0, 1000.0] {
        println!("J0({s}) = {:+.15e}", bessel_j0(s)?);
    }

    let rule = gauss_legendre(10)?;
    println!(
        "10-point rule integrates x^18 exactly: {:.15}",
        rule.apply(|x| x.powi(18))
    );
    let arcsine = integrate(
        |x| 1.0 / (1.0 - x * x).sqrt(),
        -1.0,
        1.0,
        1e-12,
        Endpoints::SqrtAtBoth,
    )?;
    println!("int dx / sqrt(1 - x^2) = {arcsine:.15}");

    println!(
        "Mehler-Heine gap at z=5: N=200 {:.3e}, N=2000 {:.3e}",
        mehler_heine_gap(200, 5.0)?,
        mehler_heine_gap(2000, 5.0)?
    );
    println!(
        "filtered Fourier transform of J0 at t=0, S=2000: gap {:.3e}",
        j0_fourier_gap(0.0, 2000.0)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
