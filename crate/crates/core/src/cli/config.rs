//! Sweep configuration: TOML schema, documented defaults and validation.
//!
//! Powers are given in dBm and SNRs in dB; everything is converted to linear
//! scale once, when the scenario for a grid point is built.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::ModulationParams;
use crate::channels::{
    db_to_linear, dbm_to_watts, noise_variance, path_gain_rf, path_gain_thz, AlphaMuParams,
    LinkBudget, PointingErrorParams,
};
use crate::montecarlo::{Scenario, TailBoost};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid {field}: requires {constraint}, got {value}")]
    Invalid {
        field: String,
        constraint: String,
        value: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

fn invalid(field: &str, constraint: &str, value: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        constraint: constraint.into(),
        value: value.to_string(),
    }
}

fn one() -> f64 {
    1.0
}

/// α-μ fading parameters of one link or branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    pub alpha: f64,
    pub mu: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

impl FadingConfig {
    fn resolve(&self, field: &str) -> Result<AlphaMuParams, ConfigError> {
        AlphaMuParams::new(self.alpha, self.mu, self.omega)
            .map_err(|e| invalid(field, "alpha, mu, omega > 0", e))
    }
}

/// Pointing error, either as `phi` directly or from jitter `sigma_s` and
/// equivalent beamwidth `w_eq` (both in metres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_eq: Option<f64>,
    #[serde(default = "one")]
    pub s0: f64,
}

impl PointingConfig {
    fn resolve(&self, field: &str) -> Result<PointingErrorParams, ConfigError> {
        let err = |e: crate::channels::ChannelError| invalid(field, "a valid pointing model", e);
        match (self.phi, self.sigma_s, self.w_eq) {
            (Some(phi), None, None) => PointingErrorParams::new(phi, self.s0).map_err(err),
            (Some(phi), Some(s), Some(w)) => PointingErrorParams::new(phi, self.s0)
                .and_then(|p| p.with_provenance(s, w))
                .map_err(err),
            (None, Some(s), Some(w)) => {
                PointingErrorParams::from_jitter(s, w, self.s0).map_err(err)
            }
            _ => Err(invalid(
                field,
                "either phi, or both sigma_s and w_eq",
                format!("{self:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "default_n")]
    pub n_antennas: usize,
    /// Fading of every RF branch, unless `rf_branches` lists them individually.
    pub rf: FadingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_branches: Option<Vec<FadingConfig>>,
    pub thz: FadingConfig,
    pub pointing: PointingConfig,
    /// Fixed-gain relay constant; the semi-blind `1 + E[γ_r]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_c: Option<f64>,
}

fn default_n() -> usize {
    1
}

/// Link budget. Ignored for SNR sweeps and when `avg_snr_db` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub rf_freq_hz: f64,
    pub rf_distance_m: f64,
    pub rf_antenna_gain_dbi: f64,
    pub rf_bandwidth_hz: f64,
    pub rf_noise_figure_db: f64,
    pub thz_freq_hz: f64,
    pub thz_distance_m: f64,
    pub thz_antenna_gain_dbi: f64,
    pub thz_absorption_per_m: f64,
    pub thz_bandwidth_hz: f64,
    pub thz_noise_figure_db: f64,
    /// Fixes both average SNRs and bypasses the budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_snr_db: Option<f64>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            rf_freq_hz: 6e9,
            rf_distance_m: 100.0,
            rf_antenna_gain_dbi: 26.0,
            rf_bandwidth_hz: 20e6,
            rf_noise_figure_db: 5.0,
            thz_freq_hz: 0.275e12,
            thz_distance_m: 50.0,
            thz_antenna_gain_dbi: 55.0,
            thz_absorption_per_m: 2.8e-4,
            thz_bandwidth_hz: 10e9,
            thz_noise_figure_db: 5.0,
            avg_snr_db: None,
        }
    }
}

impl LinkConfig {
    /// `(γ̄_rf, γ̄_thz)` with the relay transmitting at the source power.
    fn avg_snrs(&self) -> Result<(f64, f64), ConfigError> {
        let e = |field: &'static str| {
            move |err: crate::channels::ChannelError| invalid(field, "a valid link budget", err)
        };
        let p = dbm_to_watts(self.tx_power_dbm);
        let g_rf = db_to_linear(
            path_gain_rf(
                self.rf_distance_m,
                self.rf_freq_hz,
                self.rf_antenna_gain_dbi,
            )
            .map_err(e("link.rf_distance_m"))?,
        );
        let h_t = path_gain_thz(
            self.thz_distance_m,
            self.thz_freq_hz,
            db_to_linear(self.thz_antenna_gain_dbi),
            self.thz_absorption_per_m,
        )
        .map_err(e("link.thz_distance_m"))?;
        let n_rf = noise_variance(self.rf_bandwidth_hz, self.rf_noise_figure_db)
            .map_err(e("link.rf_bandwidth_hz"))?;
        let n_t = noise_variance(self.thz_bandwidth_hz, self.thz_noise_figure_db)
            .map_err(e("link.thz_bandwidth_hz"))?;
        Ok((p * g_rf / n_rf, p * h_t * h_t / n_t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    AvgSnrDb,
    TxPowerDbm,
    RfDistanceM,
    NAntennas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Ber,
    Capacity,
    Pdf,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ber => "ber",
            Metric::Capacity => "capacity",
            Metric::Pdf => "pdf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// One curve of a family: overrides applied to the base scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilyMember {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_antennas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<FadingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thz: Option<FadingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointing: Option<PointingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub axis: SweepAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeConfig>,
    pub metrics: Vec<Metric>,
    /// Outage threshold and density evaluation point, in dB.
    #[serde(default)]
    pub gamma_th_db: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<FamilyMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModulationConfig {
    /// `bpsk`, `dbpsk` or `custom` (with `p` and `q`).
    pub scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self {
            scheme: "bpsk".into(),
            p: None,
            q: None,
        }
    }
}

impl ModulationConfig {
    fn resolve(&self) -> Result<ModulationParams, ConfigError> {
        let m = match (self.scheme.as_str(), self.p, self.q) {
            ("bpsk", None, None) => ModulationParams::bpsk(),
            ("dbpsk", None, None) => ModulationParams::dbpsk(),
            ("custom", Some(p), Some(q)) => ModulationParams::new(p, q, "custom")
                .map_err(|e| invalid("modulation", "p > 0 and q > 0", e))?,
            _ => {
                return Err(invalid(
                    "modulation",
                    "scheme bpsk or dbpsk, or scheme custom with p and q",
                    format!("{self:?}"),
                ))
            }
        };
        Ok(m)
    }
}

/// `"auto"`, `"off"` or a fixed shape factor in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailBoostConfig {
    Named(String),
    Factor(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub enabled: bool,
    pub trials: usize,
    pub seed: u64,
    pub tail_boost: TailBoostConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            trials: 1_000_000,
            seed: 1,
            tail_boost: TailBoostConfig::Named("auto".into()),
        }
    }
}

/// The file as written, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Worker threads; 0 uses the available parallelism.
    #[serde(default)]
    pub workers: usize,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub link: LinkConfig,
    pub sweep: SweepSection,
    #[serde(default)]
    pub modulation: ModulationConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

/// One fully resolved curve of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub label: String,
    pub rf_branches: Option<Vec<AlphaMuParams>>,
    pub n_antennas: usize,
    pub rf: AlphaMuParams,
    pub thz: AlphaMuParams,
    pub pointing: PointingErrorParams,
    pub link: LinkConfig,
    pub relay_c: Option<f64>,
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub file: ConfigFile,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub gamma_th: f64,
    pub modulation: ModulationParams,
    /// Zero when simulation is disabled.
    pub mc_trials: usize,
    pub seed: u64,
    pub tail_boost: TailBoost,
    pub curves: Vec<CurveSpec>,
    pub workers: usize,
}

/// Minimum Monte Carlo trials when simulation is enabled.
pub const MIN_TRIALS: usize = 10_000;

/// Parses and validates a config file. Unknown keys are returned as
/// warnings, or rejected when `strict`.
pub fn load_config(path: &Path, strict: bool) -> Result<(SweepConfig, Vec<String>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text, strict)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// As [`load_config`], from a string.
pub fn parse_config(text: &str, strict: bool) -> Result<(SweepConfig, Vec<String>), ConfigError> {
    let parse_err = |e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    };
    let de = toml::Deserializer::parse(text).map_err(parse_err)?;
    let mut unknown = Vec::new();
    let file: ConfigFile =
        serde_ignored::deserialize(de, |p| unknown.push(p.to_string())).map_err(parse_err)?;
    if strict {
        if let Some(k) = unknown.first() {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
    }
    let warnings = unknown
        .into_iter()
        .map(|k| format!("ignoring unknown key `{k}`"))
        .collect();
    Ok((file.validate()?, warnings))
}

fn check_n(field: &str, n: usize) -> Result<(), ConfigError> {
    if n == 0 {
        return Err(invalid(field, "n_antennas ≥ 1", n));
    }
    Ok(())
}

impl ConfigFile {
    fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        let grid = match (&self.sweep.grid, &self.sweep.range) {
            (Some(g), None) => g.clone(),
            (None, Some(r)) => {
                if !(r.step > 0.0 && r.stop >= r.start && r.start.is_finite() && r.stop.is_finite())
                {
                    return Err(invalid(
                        "sweep.range",
                        "step > 0 and stop ≥ start",
                        format!("{r:?}"),
                    ));
                }
                let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
                (0..n).map(|k| r.start + k as f64 * r.step).collect()
            }
            _ => {
                return Err(invalid(
                    "sweep",
                    "exactly one of grid or range",
                    "both or neither",
                ))
            }
        };
        if grid.is_empty() {
            return Err(invalid("sweep.grid", "a nonempty grid", "[]"));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "sweep.grid",
                "strictly increasing finite values",
                format!("{grid:?}"),
            ));
        }
        if self.sweep.axis == SweepAxis::NAntennas
            && grid.iter().any(|&x| x < 1.0 || x.fract() != 0.0)
        {
            return Err(invalid(
                "sweep.grid",
                "n_antennas ≥ 1, integer",
                format!("{grid:?}"),
            ));
        }
        Ok(grid)
    }

    fn curves(&self) -> Result<Vec<CurveSpec>, ConfigError> {
        let base = FamilyMember::default();
        let members: Vec<&FamilyMember> = if self.sweep.family.is_empty() {
            vec![&base]
        } else {
            self.sweep.family.iter().collect()
        };
        let sc = &self.scenario;
        members
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let field = |name: &str| {
                    if self.sweep.family.is_empty() {
                        format!("scenario.{name}")
                    } else {
                        format!("sweep.family[{i}].{name}")
                    }
                };
                let n_antennas = m.n_antennas.unwrap_or(sc.n_antennas);
                check_n(&field("n_antennas"), n_antennas)?;
                let rf = m.rf.unwrap_or(sc.rf).resolve(&field("rf"))?;
                let rf_branches = match (&sc.rf_branches, m.n_antennas.is_some() || m.rf.is_some())
                {
                    (Some(list), false) => {
                        if list.is_empty() {
                            return Err(invalid("scenario.rf_branches", "n_antennas ≥ 1", 0));
                        }
                        if self.sweep.axis == SweepAxis::NAntennas {
                            return Err(invalid(
                                "scenario.rf_branches",
                                "identical branches when sweeping n_antennas",
                                "an explicit branch list",
                            ));
                        }
                        Some(
                            list.iter()
                                .map(|b| b.resolve("scenario.rf_branches"))
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                    }
                    _ => None,
                };
                let relay_c = m.relay_c.or(sc.relay_c);
                if let Some(c) = relay_c {
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(invalid(&field("relay_c"), "relay_c > 0", c));
                    }
                }
                let mut link = self.link.clone();
                if let Some(p) = m.tx_power_dbm {
                    link.tx_power_dbm = p;
                }
                let label = m.label.clone().unwrap_or_else(|| {
                    if self.sweep.family.is_empty() {
                        String::new()
                    } else {
                        format!("curve{i}")
                    }
                });
                Ok(CurveSpec {
                    label,
                    rf_branches,
                    n_antennas,
                    rf,
                    thz: m.thz.unwrap_or(sc.thz).resolve(&field("thz"))?,
                    pointing: m
                        .pointing
                        .unwrap_or(sc.pointing)
                        .resolve(&field("pointing"))?,
                    link,
                    relay_c,
                })
            })
            .collect()
    }

    /// Checks every invariant and resolves units and defaults.
    pub fn validate(self) -> Result<SweepConfig, ConfigError> {
        check_n("scenario.n_antennas", self.scenario.n_antennas)?;
        let grid = self.grid()?;
        let metrics = self.sweep.metrics.clone();
        if metrics.is_empty() {
            return Err(invalid(
                "sweep.metrics",
                "at least one of outage, ber, capacity, pdf",
                "[]",
            ));
        }
        if metrics
            .iter()
            .enumerate()
            .any(|(i, m)| metrics[..i].contains(m))
        {
            return Err(invalid(
                "sweep.metrics",
                "no repeated metric",
                format!("{metrics:?}"),
            ));
        }
        if !self.sweep.gamma_th_db.is_finite() {
            return Err(invalid(
                "sweep.gamma_th_db",
                "a finite threshold",
                self.sweep.gamma_th_db,
            ));
        }
        let modulation = self.modulation.resolve()?;
        let sim = &self.simulation;
        if sim.enabled && sim.trials < MIN_TRIALS {
            return Err(invalid(
                "simulation.trials",
                "trials ≥ 10000 or simulation disabled",
                sim.trials,
            ));
        }
        let tail_boost = match &sim.tail_boost {
            TailBoostConfig::Named(s) if s == "auto" => TailBoost::Auto,
            TailBoostConfig::Named(s) if s == "off" => TailBoost::Off,
            TailBoostConfig::Factor(b) if *b > 0.0 && *b <= 1.0 => TailBoost::Fixed(*b),
            other => {
                return Err(invalid(
                    "simulation.tail_boost",
                    "\"auto\", \"off\" or a factor in (0, 1]",
                    format!("{other:?}"),
                ))
            }
        };
        let curves = self.curves()?;
        let cfg = SweepConfig {
            axis: self.sweep.axis,
            grid,
            metrics,
            gamma_th: db_to_linear(self.sweep.gamma_th_db),
            modulation,
            mc_trials: if sim.enabled { sim.trials } else { 0 },
            seed: sim.seed,
            tail_boost,
            curves,
            workers: self.workers,
            file: self,
        };
        // every point must resolve to a valid scenario
        for c in 0..cfg.curves.len() {
            for &x in &cfg.grid {
                cfg.scenario_at(c, x)?;
            }
        }
        Ok(cfg)
    }
}

impl SweepConfig {
    /// The scenario of curve `curve` at grid value `x`.
    pub fn scenario_at(&self, curve: usize, x: f64) -> Result<Scenario, ConfigError> {
        let c = &self.curves[curve];
        let mut link = c.link.clone();
        let mut n = c.n_antennas;
        match self.axis {
            SweepAxis::AvgSnrDb => link.avg_snr_db = Some(x),
            SweepAxis::TxPowerDbm => link.tx_power_dbm = x,
            SweepAxis::RfDistanceM => link.rf_distance_m = x,
            SweepAxis::NAntennas => n = x as usize,
        }
        let (g_rf, g_thz) = match link.avg_snr_db {
            Some(db) => (db_to_linear(db), db_to_linear(db)),
            None => link.avg_snrs()?,
        };
        let budget = LinkBudget::from_avg_snr(g_rf, g_thz, 1.0)
            .map_err(|e| invalid("link", "positive average SNRs", e))?;
        let branches = c.rf_branches.clone().unwrap_or_else(|| vec![c.rf; n]);
        let scn = Scenario::new(branches, c.thz, c.pointing, budget)
            .map_err(|e| invalid("scenario", "n_antennas ≥ 1", e))?;
        let scn = match c.relay_c {
            Some(k) => scn.with_relay_c(k),
            None => scn.with_semi_blind_c(),
        };
        scn.map_err(|e| invalid("scenario.relay_c", "relay_c > 0", e))
    }

    /// The resolved configuration as TOML, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(&self.file).expect("config serialises")
    }
}
