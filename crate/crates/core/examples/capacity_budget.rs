//! Ergodic capacity from a physical link budget: RF distance 50 to 100 m at
//! 10 and 20 dBm transmit power, THz hop fixed at 50 m.
//!
//! `cargo run --release --example capacity_budget`

use rfthz::analytics::ergodic_capacity;
use rfthz::channels::{
    db_to_linear, dbm_to_watts, linear_to_db, noise_variance, path_gain_rf, path_gain_thz,
    AlphaMuParams, LinkBudget, PointingErrorParams,
};
use rfthz::montecarlo::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rf = AlphaMuParams::new(1.5, 1.5, 1.0)?;
    let thz = AlphaMuParams::new(2.0, 2.6, 1.0)?;
    let pointing = PointingErrorParams::from_jitter(0.05, 0.6, 1.0)?;
    let noise_rf = noise_variance(20e6, 5.0)?;
    let noise_thz = noise_variance(10e9, 5.0)?;
    let h_thz = path_gain_thz(50.0, 0.275e12, db_to_linear(55.0), 2.8e-4)?;
    println!(
        "{:>6} {:>8} {:>10} {:>10}",
        "d_r", "dBm", "snr_rf_dB", "capacity"
    );
    for dbm in [10.0, 20.0] {
        let p = dbm_to_watts(dbm);
        for d in (50..=100).step_by(10) {
            let g_rf = p * db_to_linear(path_gain_rf(d as f64, 6e9, 26.0)?) / noise_rf;
            let g_thz = p * h_thz * h_thz / noise_thz;
            let budget = LinkBudget::from_avg_snr(g_rf, g_thz, 1.0)?;
            let s = Scenario::new(vec![rf], thz, pointing, budget)?.with_semi_blind_c()?;
            let c = ergodic_capacity(&s)?;
            println!(
                "{d:>6} {dbm:>8} {:>10.2} {:>10.4}",
                linear_to_db(g_rf),
                c.value
            );
        }
    }
    Ok(())
}
