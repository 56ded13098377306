use std::process::Command;

use rfthz::cli::{parse_config, preset, run_sweep, Metric};

const SMALL: &str = r#"
[scenario]
n_antennas = 2
rf = { alpha = 2.0, mu = 1.0 }
thz = { alpha = 2.0, mu = 2.6 }
pointing = { phi = 4.0 }

[sweep]
axis = "avg_snr_db"
grid = [10.0, 20.0]
metrics = ["outage", "ber", "capacity", "pdf"]

[simulation]
trials = 20000
seed = 7
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfthz"))
}

#[test]
fn sweep_is_deterministic() {
    let (cfg, _) = parse_config(SMALL, true).unwrap();
    let a = run_sweep(&cfg);
    let b = run_sweep(&cfg);
    assert_eq!(a.failed_points(), 0);
    for (x, y) in a.artifacts.iter().zip(&b.artifacts) {
        assert_eq!(x.to_csv().unwrap(), y.to_csv().unwrap());
    }
}

#[test]
fn rows_carry_both_paths() {
    let (cfg, _) = parse_config(SMALL, true).unwrap();
    let out = run_sweep(&cfg);
    assert_eq!(out.artifacts.len(), 4);
    for art in &out.artifacts {
        assert_eq!(art.rows.len(), 2);
        for r in &art.rows {
            assert!(r.analytic.is_finite() && r.mc.is_finite(), "{r:?}");
            // the density is a binned estimate; the rest are unbiased
            let tol = if art.metric == Metric::Pdf {
                0.05 * r.analytic
            } else {
                0.0
            };
            assert!((r.analytic - r.mc).abs() < 4.0 * r.mc_stderr + tol, "{r:?}");
        }
    }
}

#[test]
fn single_point_grid() {
    let text = SMALL.replace("grid = [10.0, 20.0]", "grid = [15.0]");
    let (mut cfg, _) = parse_config(&text, true).unwrap();
    cfg.mc_trials = 0;
    let out = run_sweep(&cfg);
    assert!(out
        .artifacts
        .iter()
        .all(|a| a.rows.len() == 1 && a.rows[0].mc.is_nan()));
}

#[test]
fn run_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let mut texts = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let st = bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        texts.push(std::fs::read_to_string(out.join("outage.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert!(texts[0]
        .lines()
        .any(|l| l == "x,metric,analytic,analytic_err,mc,mc_stderr,status"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("n_antennas = 2", "n_antennas = 0")).unwrap();
    assert_eq!(
        bin().arg("validate").arg(&bad).status().unwrap().code(),
        Some(1)
    );

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, format!("colour = 1\n{SMALL}")).unwrap();
    assert_eq!(
        bin().arg("validate").arg(&unknown).status().unwrap().code(),
        Some(0)
    );
    let strict = bin()
        .args(["validate", "--strict"])
        .arg(&unknown)
        .status()
        .unwrap();
    assert_eq!(strict.code(), Some(1));

    let out = bin().args(["presets", "fig2c"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        preset("fig2c").unwrap()
    );
}

#[test]
fn failed_points_give_partial_exit() {
    // far beyond the support the evaluator cannot resolve the density
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let text = SMALL.replace(
        "metrics = [\"outage\", \"ber\", \"capacity\", \"pdf\"]",
        "metrics = [\"pdf\"]\ngamma_th_db = 400.0",
    );
    std::fs::write(&cfg, text).unwrap();
    let st = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--no-mc")
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("pdf.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(
        rows.iter().all(|l| l.contains("analytic_error")),
        "{rows:?}"
    );
}
