//! Weak convergence of the latitude-circle measures to the arcsine law, and
//! the two routes to their characteristic function.

use caustics::measures::{
    arcsine_limit, char_fn_addition, char_fn_direct, empirical_measure, integrate_against,
    TestFunction,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c0 = 0.8;
    let fs = [TestFunction::T2, TestFunction::T4, TestFunction::Cos(3.0)];
    for f in fs {
        let limit = arcsine_limit(c0, |t| f.eval(t))?;
        print!("{f:>6}  limit {limit:.10}  gaps:");
        for n in [250, 1000, 4000] {
            let mu = empirical_measure(n, c0)?;
            print!(
                " {:.3e}",
                (integrate_against(&mu, |t| f.eval(t)) - limit).abs()
            );
        }
        println!();
    }

    let mu = empirical_measure(500, c0)?;
    println!("total mass at N=500: {:.15}", mu.total_mass());
    println!("mass beyond |t| > 0.9: {:.3e}", mu.mass_outside(0.9));
    for s in [1.0, 5.0, 20.0] {
        let direct = char_fn_direct(&mu, s);
        let addition = char_fn_addition(500, c0, s)?;
        println!(
            "s={s:>4}: direct {:+.15e}  addition {:+.15e}",
            direct.re, addition
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
