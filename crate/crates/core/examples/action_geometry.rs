//! Turning points, the action integral and the Airy argument for `c = 2/3`.

use std::f64::consts::PI;

use caustics::semiclassics::{
    action, airy_arg_rho, caustic_ratio_limit, caustic_slope, LadderGeometry,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g = LadderGeometry::new(2.0 / 3.0)?;
    println!(
        "phi_- = {:.16}, phi_+ = {:.16}",
        g.phi_minus(),
        g.phi_plus()
    );

    let loop_action = 2.0 * action(&g, g.phi_minus())?;
    println!(
        "closed loop: {loop_action:.15}  vs 2 pi (1 - c) = {:.15}",
        2.0 * PI * (1.0 - g.c())
    );

    println!("{:>10} {:>14} {:>14}", "phi", "A(phi)", "rho(phi)");
    for i in 0..=8 {
        let phi = g.phi_plus() - 0.2 * i as f64;
        if phi <= g.phi_minus() {
            break;
        }
        println!(
            "{phi:>10.6} {:>14.10} {:>14.10}",
            action(&g, phi)?,
            airy_arg_rho(&g, phi)?
        );
    }
    println!("rho slope at the caustic: {:.10}", caustic_slope(&g));
    println!(
        "4 rho / (sin^2 - c^2) at the caustic: {:.10}",
        caustic_ratio_limit(&g)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
