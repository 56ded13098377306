//! Fox H-functions by contour quadrature, checked against closed forms.
//!
//! `cargo run --release --example fox_h`

use rfthz::specfun::{fox_h_univariate, ContourSpec, FoxHBivariateSpec, GammaTriple};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // (2πi)⁻¹ ∫ Γ(s) x^{-s} ds = e^{-x}
    let exp = FoxHBivariateSpec::univariate(vec![GammaTriple::x(0.0, 1.0)], vec![])?;
    // (2πi)⁻¹ ∫ Γ(s) Γ(1 - s) x^{-s} ds = 1 / (1 + x)
    let rational = FoxHBivariateSpec::univariate(
        vec![GammaTriple::x(0.0, 1.0), GammaTriple::x(1.0, -1.0)],
        vec![],
    )?;
    println!(
        "{:>8} {:>14} {:>14} {:>14} {:>14}",
        "x", "H exp", "e^-x", "H rational", "1/(1+x)"
    );
    for x in [0.1, 1.0, 5.0, 20.0] {
        let mut row = Vec::new();
        for spec in [&exp, &rational] {
            let c = ContourSpec::auto_abscissa_univariate(spec);
            let contour = ContourSpec::tuned(spec, x, 1.0, c, 0.0)?;
            row.push(fox_h_univariate(spec, x, &contour)?.value);
        }
        println!(
            "{x:>8} {:>14.10} {:>14.10} {:>14.10} {:>14.10}",
            row[0],
            (-x).exp(),
            row[1],
            1.0 / (1.0 + x)
        );
    }
    Ok(())
}
