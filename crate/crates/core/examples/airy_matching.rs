//! Where the Airy and WKB regimes overlap, the two leading terms agree only
//! when `rho = ((3/2) A)^{2/3}`. The alternative coefficient is off by an
//! O(1) amount at every ladder member.

use caustics::cli::matching_experiment;
use caustics::legendre::Ladder;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = Ladder::new(1, 1)?;
    let ks = [63, 127, 255, 511];
    let v = matching_experiment(&ladder, &ks, 10.0)?;
    println!(
        "{:>5} {:>12} {:>14} {:>14}",
        "k", "h", "gap (3/2)", "gap (4/3 var.)"
    );
    for (i, k) in ks.iter().enumerate() {
        println!(
            "{k:>5} {:>12.6e} {:>14.6e} {:>14.6e}",
            v.hs[i], v.gaps_three_halves[i], v.gaps_four_thirds[i]
        );
    }
    // at a fixed Airy argument the gap is the error of the Airy asymptotic
    // expansion there, so it does not shrink with h
    println!(
        "fitted orders: {:.3e} and {:.3e}",
        v.order_three_halves, v.order_four_thirds
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
