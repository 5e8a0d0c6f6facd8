//! Exact mode versus the WKB term (away from the caustic) and the Airy term
//! (in an `h^{2/3}` neighbourhood of it) along the ladder `(m0, N0) = (1, 1)`.

use caustics::legendre::Ladder;
use caustics::semiclassics::{caustic_scan, PhiGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = Ladder::new(1, 1)?;
    let ks = [31, 63, 127, 255];

    let wkb = caustic_scan(&ladder, &ks, &PhiGrid::Fixed(vec![1.9]))?;
    for r in &wkb.rows {
        println!(
            "k={:>3} N={:>4} exact={:+.6e} wkb={:+.6e} err={:.3e}",
            r.k, r.n, r.exact, r.wkb, r.err_wkb
        );
    }
    println!(
        "fitted WKB order: {:.3}",
        wkb.fitted_order_wkb.unwrap_or(f64::NAN)
    );

    let airy = caustic_scan(&ladder, &ks, &PhiGrid::Caustic(4))?;
    for r in airy.rows.iter().filter(|r| r.k == 255) {
        println!(
            "k=255 phi={:.6} exact={:+.6e} airy={:+.6e} err={:.3e}",
            r.phi, r.exact, r.airy, r.err_airy
        );
    }
    println!(
        "fitted Airy order: {:.3}",
        airy.fitted_order_airy.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
