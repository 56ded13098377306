//! Sweep orchestration and CSV artifacts.
//!
//! Grid points are independent jobs run on a worker pool; each returns its
//! rows and the single writer assembles one file per metric.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use super::config::{Metric, SweepConfig};
use crate::analytics::{average_ber, end_to_end_pdf, ergodic_capacity, outage, LinkModel};
use crate::channels::linear_to_db;
use crate::montecarlo::{estimate_metrics, simulate, Estimate, MetricEstimates, Scenario};

/// One row of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    /// Metric name, suffixed with `|<curve label>` inside a family.
    pub metric: String,
    pub analytic: f64,
    pub analytic_err: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    /// `ok`, or the error tags of the failed evaluations.
    pub status: String,
}

impl CurveRow {
    pub fn failed(&self) -> bool {
        self.status != "ok"
    }
}

/// All rows of one metric with the metadata needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveArtifact {
    pub metric: Metric,
    pub header: Vec<String>,
    pub rows: Vec<CurveRow>,
}

/// Result of a sweep: one artifact per requested metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub artifacts: Vec<CurveArtifact>,
}

impl SweepOutput {
    pub fn failed_points(&self) -> usize {
        self.artifacts
            .iter()
            .flat_map(|a| &a.rows)
            .filter(|r| r.failed())
            .count()
    }
}

/// Half-width of the log-window used for simulated density estimates.
const PDF_WINDOW: f64 = 0.05;

struct PointResult {
    header: String,
    rows: Vec<(Metric, CurveRow)>,
}

fn job_seed(seed: u64, job: usize) -> u64 {
    seed ^ (job as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn fmt_estimate(e: Estimate) -> (f64, f64) {
    (e.value, e.stderr)
}

/// Fraction of samples in `[z e^{-δ}, z e^{δ}]` per unit length.
fn simulated_density(scn: &Scenario, z: f64, n: usize, seed: u64) -> Result<Estimate, String> {
    let batch = simulate(scn, n, seed).map_err(|e| e.to_string())?;
    let (lo, hi) = (z * (-PDF_WINDOW).exp(), z * PDF_WINDOW.exp());
    let hits = batch
        .end_to_end
        .iter()
        .filter(|&&g| g >= lo && g < hi)
        .count() as f64;
    let width = (hi - lo) * n as f64;
    Ok(Estimate {
        value: hits / width,
        stderr: hits.max(1.0).sqrt() / width,
    })
}

fn run_point(cfg: &SweepConfig, curve: usize, gi: usize) -> PointResult {
    let x = cfg.grid[gi];
    let label = &cfg.curves[curve].label;
    let started = Instant::now();
    let seed = job_seed(cfg.seed, curve * cfg.grid.len() + gi);
    let metric_label = |m: Metric| {
        if label.is_empty() {
            m.name().to_string()
        } else {
            format!("{}|{label}", m.name())
        }
    };
    let scn = match cfg.scenario_at(curve, x) {
        Ok(s) => s,
        Err(e) => {
            let rows = cfg
                .metrics
                .iter()
                .map(|&m| {
                    let row = CurveRow {
                        x,
                        metric: metric_label(m),
                        analytic: f64::NAN,
                        analytic_err: f64::NAN,
                        mc: f64::NAN,
                        mc_stderr: f64::NAN,
                        status: format!("scenario_error: {e}"),
                    };
                    (m, row)
                })
                .collect();
            return PointResult {
                header: format!("point {label} x={x}: scenario error: {e}"),
                rows,
            };
        }
    };
    let header = match LinkModel::from_scenario(&scn) {
        Ok(m) => format!(
            "point {label} x={x}: avg_snr_rf_db={:.6} avg_snr_thz_db={:.6} relay_c={:.6e} matched_alpha={:.9} matched_mu={:.9} matched_omega={:.9} moment_residual={:.3e} diversity_order={:.6}",
            linear_to_db(scn.avg_snr_rf()),
            linear_to_db(scn.avg_snr_thz()),
            scn.relay_c(),
            m.egc.matched.alpha(),
            m.egc.matched.mu(),
            m.egc.matched.omega(),
            m.egc.moment_residual,
            m.diversity_order(),
        ),
        Err(e) => format!("point {label} x={x}: model error: {e}"),
    };

    let wants_mc = cfg.mc_trials > 0;
    let needs_metrics = cfg.metrics.iter().any(|m| *m != Metric::Pdf);
    let mc: Option<Result<MetricEstimates, String>> = (wants_mc && needs_metrics).then(|| {
        estimate_metrics(
            &scn,
            cfg.gamma_th,
            &cfg.modulation,
            cfg.mc_trials,
            seed,
            cfg.tail_boost,
        )
        .map_err(|e| e.to_string())
    });

    let rows = cfg
        .metrics
        .iter()
        .map(|&m| {
            let analytic = match m {
                Metric::Outage => outage(cfg.gamma_th, &scn),
                Metric::Ber => average_ber(&cfg.modulation, &scn),
                Metric::Capacity => ergodic_capacity(&scn),
                Metric::Pdf => end_to_end_pdf(cfg.gamma_th, &scn),
            };
            let simulated: Option<Result<Estimate, String>> = match m {
                Metric::Pdf if wants_mc => {
                    Some(simulated_density(&scn, cfg.gamma_th, cfg.mc_trials, seed))
                }
                Metric::Pdf => None,
                _ => mc.as_ref().map(|r| {
                    r.as_ref().map_err(Clone::clone).map(|e| match m {
                        Metric::Outage => e.outage,
                        Metric::Ber => e.ber,
                        _ => e.capacity,
                    })
                }),
            };
            let mut status = Vec::new();
            let (a, ae) = match analytic {
                Ok(v) => (v.value, v.abs_error),
                Err(e) => {
                    status.push(format!("analytic_error: {e}"));
                    (f64::NAN, f64::NAN)
                }
            };
            let (s, se) = match simulated {
                Some(Ok(e)) => fmt_estimate(e),
                Some(Err(e)) => {
                    status.push(format!("mc_error: {e}"));
                    (f64::NAN, f64::NAN)
                }
                None => (f64::NAN, f64::NAN),
            };
            let row = CurveRow {
                x,
                metric: metric_label(m),
                analytic: a,
                analytic_err: ae,
                mc: s,
                mc_stderr: se,
                status: if status.is_empty() {
                    "ok".into()
                } else {
                    status.join("; ")
                },
            };
            (m, row)
        })
        .collect();
    info!(
        "{} x={x}: {:.2?}",
        if label.is_empty() { "point" } else { label },
        started.elapsed()
    );
    PointResult { header, rows }
}

/// Evaluates every curve at every grid point. Failures are recorded in the
/// rows and never abort the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> SweepOutput {
    let jobs: Vec<(usize, usize)> = (0..cfg.curves.len())
        .flat_map(|c| (0..cfg.grid.len()).map(move |g| (c, g)))
        .collect();
    let work = || -> Vec<PointResult> {
        jobs.par_iter()
            .map(|&(c, g)| run_point(cfg, c, g))
            .collect()
    };
    let results = if cfg.workers > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
        {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        }
    } else {
        work()
    };

    let mut common = vec![
        format!("rfthz {}", env!("CARGO_PKG_VERSION")),
        format!("seed {}", cfg.seed),
        format!("mc_trials {}", cfg.mc_trials),
        "resolved config:".to_string(),
    ];
    common.extend(cfg.to_toml().lines().map(|l| format!("  {l}")));
    common.extend(results.iter().map(|r| r.header.clone()));

    let artifacts = cfg
        .metrics
        .iter()
        .map(|&metric| {
            let mut header = vec![format!("metric {}", metric.name())];
            header.extend(common.iter().cloned());
            let rows = results
                .iter()
                .flat_map(|r| {
                    r.rows
                        .iter()
                        .filter(|(m, _)| *m == metric)
                        .map(|(_, row)| row.clone())
                })
                .collect();
            CurveArtifact {
                metric,
                header,
                rows,
            }
        })
        .collect();
    SweepOutput { artifacts }
}

impl CurveArtifact {
    /// The CSV text: `#` metadata lines, then the table.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut out = Vec::new();
        for line in &self.header {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "x",
            "metric",
            "analytic",
            "analytic_err",
            "mc",
            "mc_stderr",
            "status",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.x.to_string(),
                r.metric.clone(),
                r.analytic.to_string(),
                r.analytic_err.to_string(),
                r.mc.to_string(),
                r.mc_stderr.to_string(),
                r.status.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }

    /// Writes `<dir>/<metric>.csv` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.metric.name()));
        let text = self.to_csv().map_err(std::io::Error::other)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }
}
