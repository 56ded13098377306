//! A full curve sweep from a built-in preset, printed as CSV.
//!
//! `cargo run --release --example sweep_preset`

use rfthz::cli::{parse_config, preset, run_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mut cfg, _) = parse_config(preset("fig2a").expect("built-in preset"), true)?;
    cfg.mc_trials = 50_000;
    let out = run_sweep(&cfg);
    for artifact in &out.artifacts {
        let csv = artifact.to_csv()?;
        // the table without the metadata header
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .for_each(|l| println!("{l}"));
    }
    Ok(())
}
