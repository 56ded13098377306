//! Outage probability versus average SNR for one and five RF antennas,
//! with the high-SNR asymptote and diversity order.
//!
//! `cargo run --release --example outage_curve`

use rfthz::analytics::{diversity_order, outage, outage_asymptotic};
use rfthz::channels::{db_to_linear, AlphaMuParams, LinkBudget, PointingErrorParams};
use rfthz::montecarlo::Scenario;

fn scenario(n: usize, snr_db: f64) -> Result<Scenario, Box<dyn std::error::Error>> {
    let rf = AlphaMuParams::new(1.0, 1.0, 1.0)?;
    let thz = AlphaMuParams::new(2.0, 2.6, 1.0)?;
    // 15 cm jitter with a 60 cm equivalent beamwidth
    let pointing = PointingErrorParams::from_jitter(0.15, 0.6, 1.0)?;
    let g = db_to_linear(snr_db);
    let budget = LinkBudget::from_avg_snr(g, g, 1.0)?;
    Ok(Scenario::new(vec![rf; n], thz, pointing, budget)?.with_semi_blind_c()?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gamma_th = 1.0;
    for n in [1, 5] {
        println!(
            "N = {n}, diversity order {}",
            diversity_order(&scenario(n, 0.0)?)?
        );
        println!("{:>6} {:>14} {:>14}", "dB", "outage", "asymptote");
        for db in (0..=60).step_by(10) {
            let s = scenario(n, db as f64)?;
            let p = outage(gamma_th, &s)?;
            let a = outage_asymptotic(gamma_th, &s)?;
            println!("{db:>6} {:>14.6e} {:>14.6e}", p.value, a.value);
        }
    }
    let ratio =
        outage(gamma_th, &scenario(1, 40.0)?)?.value / outage(gamma_th, &scenario(5, 40.0)?)?.value;
    println!("outage(N=1) / outage(N=5) at 40 dB: {ratio:.0}");
    Ok(())
}
