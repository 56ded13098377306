//! Monte Carlo estimates, with importance sampling in the deep tail,
//! against the closed forms.
//!
//! `cargo run --release --example monte_carlo`

use rfthz::analytics::{average_ber, ergodic_capacity, outage, ModulationParams};
use rfthz::channels::{db_to_linear, AlphaMuParams, LinkBudget, PointingErrorParams};
use rfthz::montecarlo::{estimate_metrics, Scenario, TailBoost};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rf = AlphaMuParams::new(1.0, 1.0, 1.0)?;
    let thz = AlphaMuParams::new(2.0, 2.6, 1.0)?;
    let pointing = PointingErrorParams::new(4.0, 1.0)?;
    let bpsk = ModulationParams::bpsk();
    for db in [10.0, 40.0] {
        let g = db_to_linear(db);
        let budget = LinkBudget::from_avg_snr(g, g, 1.0)?;
        let s = Scenario::new(vec![rf; 5], thz, pointing, budget)?.with_semi_blind_c()?;
        let mc = estimate_metrics(&s, 1.0, &bpsk, 1_000_000, 11, TailBoost::Auto)?;
        println!("{db} dB (outage tail boost {:.3})", mc.outage_boost);
        let rows = [
            ("outage", outage(1.0, &s)?.value, mc.outage),
            ("ber", average_ber(&bpsk, &s)?.value, mc.ber),
            ("capacity", ergodic_capacity(&s)?.value, mc.capacity),
        ];
        for (name, a, e) in rows {
            println!(
                "  {name:<9} analytic {a:<12.6e} simulated {:<12.6e} ± {:.1e} ({:+.2} se)",
                e.value,
                e.stderr,
                (e.value - a) / e.stderr
            );
        }
    }
    Ok(())
}
