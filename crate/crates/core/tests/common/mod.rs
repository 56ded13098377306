#![allow(dead_code)]

use quadrature::double_exponential;

/// ∫₀^∞ f(x) dx via x = e^u over u ∈ [ln lo, ln hi], split into unit pieces.
pub fn integrate_positive(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let pieces = ((b - a) / 1.0).ceil() as usize;
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let u0 = a + k as f64 * w;
            double_exponential::integrate(|u: f64| f(u.exp()) * u.exp(), u0, u0 + w, 1e-12).integral
        })
        .sum()
}

/// ∫ₐᵇ f(x) dx.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    double_exponential::integrate(f, a, b, 1e-12).integral
}

/// Kolmogorov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 99% Kolmogorov–Smirnov critical value for sample size `n`.
pub fn ks_band_99(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// ∫ f over `[a, b]` by composite `n`-point Gauss–Legendre on `pieces` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize, n: usize) -> f64 {
    let (nodes, weights) = gl_rule(n);
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * w;
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, wt)| wt * f(mid + 0.5 * w * x))
                .sum::<f64>()
                * 0.5
                * w
        })
        .sum()
}

fn gl_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Equal-SNR scenario with `n` identical RF branches, the THz hop at
/// `α = 2, μ = 2.6` and the semi-blind relay constant.
pub fn scenario(
    n: usize,
    rf_alpha: f64,
    rf_mu: f64,
    phi: f64,
    snr_db: f64,
) -> rfthz::montecarlo::Scenario {
    use rfthz::channels::{db_to_linear, AlphaMuParams, LinkBudget, PointingErrorParams};
    let rf = AlphaMuParams::new(rf_alpha, rf_mu, 1.0).unwrap();
    let thz = AlphaMuParams::new(2.0, 2.6, 1.0).unwrap();
    let pe = PointingErrorParams::new(phi, 1.0).unwrap();
    let g = db_to_linear(snr_db);
    let budget = LinkBudget::from_avg_snr(g, g, 1.0).unwrap();
    rfthz::montecarlo::Scenario::new(vec![rf; n], thz, pe, budget)
        .unwrap()
        .with_semi_blind_c()
        .unwrap()
}
