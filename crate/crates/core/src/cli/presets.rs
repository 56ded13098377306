//! Replication configs for the published curve families.
//!
//! The relay constant and noise figures are not part of the published setup;
//! both are written out explicitly so the assumptions are visible.

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 3] = ["fig2a", "fig2b", "fig2c"];

const FIG2A: &str = r#"# Outage versus average SNR for N in {1, 5} and jitter 15 cm / 10 cm.
workers = 0

[scenario]
n_antennas = 1
rf = { alpha = 1.0, mu = 1.0 }
thz = { alpha = 2.0, mu = 2.6 }
pointing = { sigma_s = 0.15, w_eq = 0.6, s0 = 1.0 }
# relay_c absent: semi-blind C = 1 + average RF SNR

[link]
rf_noise_figure_db = 5.0
thz_noise_figure_db = 5.0

[sweep]
axis = "avg_snr_db"
range = { start = 0.0, stop = 60.0, step = 5.0 }
metrics = ["outage"]
gamma_th_db = 0.0

[[sweep.family]]
label = "N=1,sigma_s=15cm"
n_antennas = 1

[[sweep.family]]
label = "N=1,sigma_s=10cm"
n_antennas = 1
pointing = { sigma_s = 0.10, w_eq = 0.6, s0 = 1.0 }

[[sweep.family]]
label = "N=5,sigma_s=15cm"
n_antennas = 5

[[sweep.family]]
label = "N=5,sigma_s=10cm"
n_antennas = 5
pointing = { sigma_s = 0.10, w_eq = 0.6, s0 = 1.0 }

[simulation]
enabled = true
trials = 1000000
seed = 1
tail_boost = "auto"
"#;

const FIG2B: &str = r#"# BER versus average SNR for several N and RF alpha, mu = 1.2, jitter 8 cm.
workers = 0

[scenario]
n_antennas = 1
rf = { alpha = 1.0, mu = 1.2 }
thz = { alpha = 2.0, mu = 2.6 }
pointing = { sigma_s = 0.08, w_eq = 0.6, s0 = 1.0 }

[link]
rf_noise_figure_db = 5.0
thz_noise_figure_db = 5.0

[sweep]
axis = "avg_snr_db"
range = { start = 0.0, stop = 60.0, step = 5.0 }
metrics = ["ber"]

[[sweep.family]]
label = "N=1,alpha=1"
n_antennas = 1

[[sweep.family]]
label = "N=3,alpha=1"
n_antennas = 3

[[sweep.family]]
label = "N=1,alpha=2"
rf = { alpha = 2.0, mu = 1.2 }

[[sweep.family]]
label = "N=3,alpha=2"
n_antennas = 3
rf = { alpha = 2.0, mu = 1.2 }

[modulation]
scheme = "bpsk"

[simulation]
enabled = true
trials = 1000000
seed = 1
tail_boost = "auto"
"#;

const FIG2C: &str = r#"# Ergodic capacity versus RF distance at 10 dBm and 20 dBm transmit power.
workers = 0

[scenario]
n_antennas = 1
rf = { alpha = 1.5, mu = 1.5 }
thz = { alpha = 2.0, mu = 2.6 }
pointing = { sigma_s = 0.05, w_eq = 0.6, s0 = 1.0 }

[link]
tx_power_dbm = 20.0
rf_freq_hz = 6e9
rf_antenna_gain_dbi = 26.0
rf_bandwidth_hz = 20e6
rf_noise_figure_db = 5.0
thz_freq_hz = 0.275e12
thz_distance_m = 50.0
thz_antenna_gain_dbi = 55.0
thz_absorption_per_m = 2.8e-4
thz_bandwidth_hz = 10e9
thz_noise_figure_db = 5.0

[sweep]
axis = "rf_distance_m"
range = { start = 50.0, stop = 100.0, step = 10.0 }
metrics = ["capacity"]

[[sweep.family]]
label = "10dBm"
tx_power_dbm = 10.0

[[sweep.family]]
label = "20dBm"
tx_power_dbm = 20.0

[simulation]
enabled = true
trials = 1000000
seed = 1
tail_boost = "auto"
"#;

/// The TOML text of a named preset.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "fig2a" => Some(FIG2A),
        "fig2b" => Some(FIG2B),
        "fig2c" => Some(FIG2C),
        _ => None,
    }
}
