//! Average bit error rate of coherent BPSK and DBPSK versus average SNR.
//!
//! `cargo run --release --example ber_curve`

use rfthz::analytics::{average_ber, ModulationParams};
use rfthz::channels::{db_to_linear, AlphaMuParams, LinkBudget, PointingErrorParams};
use rfthz::montecarlo::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rf = AlphaMuParams::new(2.0, 1.2, 1.0)?;
    let thz = AlphaMuParams::new(2.0, 2.6, 1.0)?;
    let pointing = PointingErrorParams::from_jitter(0.08, 0.6, 1.0)?;
    let schemes = [ModulationParams::bpsk(), ModulationParams::dbpsk()];
    println!(
        "{:>6} {:>4} {:>14} {:>14}",
        "dB", "N", schemes[0].name, schemes[1].name
    );
    for n in [1, 3] {
        for db in (0..=40).step_by(10) {
            let g = db_to_linear(db as f64);
            let budget = LinkBudget::from_avg_snr(g, g, 1.0)?;
            let s = Scenario::new(vec![rf; n], thz, pointing, budget)?.with_semi_blind_c()?;
            let b: Vec<f64> = schemes
                .iter()
                .map(|m| average_ber(m, &s).map(|v| v.value))
                .collect::<Result<_, _>>()?;
            println!("{db:>6} {n:>4} {:>14.6e} {:>14.6e}", b[0], b[1]);
        }
    }
    Ok(())
}
