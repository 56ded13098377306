//! Batch front end: config ingestion, curve sweeps and CSV artifacts.

mod config;
mod presets;
mod sweep;

pub use config::{
    load_config, parse_config, ConfigError, ConfigFile, CurveSpec, FadingConfig, FamilyMember,
    LinkConfig, Metric, ModulationConfig, PointingConfig, RangeConfig, ScenarioConfig,
    SimulationConfig, SweepAxis, SweepConfig, SweepSection, TailBoostConfig, MIN_TRIALS,
};
pub use presets::{preset, PRESET_NAMES};
pub use sweep::{run_sweep, CurveArtifact, CurveRow, SweepOutput};
