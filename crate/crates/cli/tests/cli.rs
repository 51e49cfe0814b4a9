// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn inloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inloop")).args(args).output().expect("binary runs")
}

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    meta: BTreeMap<String, serde_json::Value>,
}

impl Table {
    fn parse(out: &Output) -> Table {
        assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let meta = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .map(|l| {
                let (k, v) = l.split_once(" = ").unwrap();
                (k.to_owned(), serde_json::from_str(v).unwrap())
            })
            .collect();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
        let rows = rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
        Table { header, rows, meta }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i =
            self.header.iter().position(|h| h == name || h.starts_with(&format!("{name} ["))).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

const LOOP: &str = r#"
schema = 1
[detector]
eta = 0.8
theta_fb = 0.4
[filter]
delay = "2 ms"
phase_offset = 0.3
[grid]
start = "-2 kHz"
stop = "2 kHz"
points = 101
"#;

const CAVITY: &str = r#"
schema = 1
[cavity]
kappa1 = 0.6
kappa2 = 0.3
kappa_loss = 0.1
detuning = 2.0
[detector]
eta = 0.9
theta_fb = 0.2
[filter]
delay = 0.5
phase_offset = 0.1
[grid]
start = -6.0
stop = 6.0
points = 121
"#;

#[test]
fn zero_gain_is_shot_noise_everywhere() {
    let f = config_file(&format!("{LOOP}[gains]\nvalues = [0.0]\n[spectrum]\nquadratures = [0.0, 1.1]\n"));
    let t = Table::parse(&inloop(&["spectrum", "--config", f.path().to_str().unwrap()]));
    assert_eq!(t.header.len(), 4);
    for row in &t.rows {
        for &v in &row[1..] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }
}

#[test]
fn csv_and_json_carry_the_same_table() {
    let f = config_file(&format!("{CAVITY}[gains]\nvalues = [-0.2, 0.1]\n"));
    let path = f.path().to_str().unwrap();
    let csv = Table::parse(&inloop(&["cavity", "--config", path]));
    let out = inloop(&["cavity", "--config", path, "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<String> = json["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let (n, u) = (c["name"].as_str().unwrap(), c["unit"].as_str().unwrap());
            if u.is_empty() {
                n.to_owned()
            } else {
                format!("{n} [{u}]")
            }
        })
        .collect();
    assert_eq!(names, csv.header);
    for (a, b) in csv.rows.iter().zip(json["rows"].as_array().unwrap()) {
        let b: Vec<f64> = b.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(a, &b);
    }
    assert_eq!(csv.meta["config_sha256"], json["metadata"]["config_sha256"]);
    assert_eq!(csv.rows.len(), 121);
}

#[test]
fn output_is_deterministic_and_hashes_the_resolved_config() {
    let f = config_file(&format!("{CAVITY}[gains]\nwindow_fractions = [-0.5, 0.5]\n"));
    let path = f.path().to_str().unwrap();
    let a = inloop(&["cavity", "--config", path]);
    let b = inloop(&["cavity", "--config", path]);
    assert_eq!(a.stdout, b.stdout);
    let printed = inloop(&["cavity", "--config", path, "--print-config"]);
    assert!(printed.status.success());
    let hash = format!("{:x}", Sha256::digest(&printed.stdout));
    assert_eq!(Table::parse(&a).meta["config_sha256"], serde_json::Value::String(hash));

    // The printed scenario reproduces the run.
    let again = config_file(std::str::from_utf8(&printed.stdout).unwrap());
    assert_eq!(inloop(&["cavity", "--config", again.path().to_str().unwrap()]).stdout, a.stdout);
}

#[test]
fn out_flag_writes_the_file() {
    let f = config_file(&format!("{LOOP}[gains]\nvalues = [0.1]\n"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = inloop(&["spectrum", "--config", f.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert!(std::fs::read_to_string(out).unwrap().contains("S_i g=0.1"));
}

#[test]
fn exit_codes_separate_failure_classes() {
    let code = |args: &[&str]| inloop(args).status.code().unwrap();
    let unknown = config_file(&format!("{LOOP}[filter]\ngian = 1.0\n"));
    let unstable = config_file(&format!("{CAVITY}[gains]\nvalues = [50.0]\n"));
    let bad_value = config_file(&format!("{LOOP}[detector]\neta = 1.5\n"));
    assert_eq!(code(&["spectrum", "--config", unknown.path().to_str().unwrap()]), 4);
    assert_eq!(code(&["spectrum", "--config", bad_value.path().to_str().unwrap()]), 4);
    assert_eq!(code(&["cavity", "--config", unstable.path().to_str().unwrap()]), 3);
    assert_eq!(code(&["cavity", "--preset", "fig2"]), 4);
    assert_eq!(code(&["cavity", "--preset", "fig99"]), 4);
    assert_eq!(code(&["cavity", "--config", "/nonexistent/scenario.toml"]), 1);
    assert_eq!(code(&["cavity", "--format", "xml", "--preset", "fig4"]), 2);
    assert_eq!(code(&["cavity"]), 4);
}

#[test]
fn instability_reports_the_window() {
    let f = config_file(&format!("{CAVITY}[gains]\nvalues = [50.0]\n"));
    let o = inloop(&["cavity", "--config", f.path().to_str().unwrap()]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("window_lower = ") && err.contains("window_upper = "), "{err}");
}

#[test]
fn config_overrides_preset_keys() {
    let f = config_file("[detector]\neta = 0.5\n[gains]\nvalues = [0.0, 0.2]\n");
    let t = Table::parse(&inloop(&["spectrum", "--preset", "fig2", "--config", f.path().to_str().unwrap()]));
    assert_eq!(t.header, ["omega [rad/s]", "S_i g=0", "S_i g=0.2"]);
    assert_eq!(t.meta["preset"], "fig2");
}

#[test]
fn loop_preset_spans_the_stable_gains() {
    let t = Table::parse(&inloop(&["spectrum", "--preset", "fig2"]));
    let gains: Vec<f64> = t.meta["gains"].as_array().unwrap().iter().map(|g| g.as_f64().unwrap()).collect();
    assert_eq!(gains.len(), 9);
    assert!(gains.iter().all(|g| g.abs() < 0.5));
    assert!(gains[0] < -0.49 && gains[8] > 0.49);
    assert_eq!(t.header.len(), 10);
    // The zero-gain curve is flat; the others dip no lower than a quarter.
    assert!(t.col("S_i g=0").iter().all(|&v| v == 1.0));
    for h in &t.header[1..] {
        assert!(t.col(h).iter().all(|&v| v >= 0.25 - 1e-12));
    }
}

#[test]
fn zero_gain_susceptibility_is_the_bare_cavity() {
    let f = config_file(&format!("{CAVITY}[gains]\nvalues = [0.0]\n"));
    let t = Table::parse(&inloop(&["cavity", "--config", f.path().to_str().unwrap()]));
    assert_eq!(t.col("Re chi_eff g=0"), t.col("Re chi_c"));
    assert_eq!(t.col("Im chi_eff g=0"), t.col("Im chi_c"));
    assert_eq!(t.meta["outofloop_check"], "passed");
}

#[test]
fn cavity_presets_check_the_unused_port() {
    for p in ["fig4a", "fig6b", "fig7"] {
        let t = Table::parse(&inloop(&["cavity", "--preset", p]));
        assert_eq!(t.meta["outofloop_check"], "passed", "{p}");
        let (lo, hi) = (t.meta["window_lower"].as_f64().unwrap(), t.meta["window_upper"].as_f64().unwrap());
        assert!(lo < 0.0 && hi > 0.0);
    }
    let t = Table::parse(&inloop(&["cavity", "--preset", "fig7"]));
    for m in t.meta["correlations"].as_array().unwrap() {
        let n = m["n_st"].as_f64().unwrap();
        let mm = m["m_st_re"].as_f64().unwrap().hypot(m["m_st_im"].as_f64().unwrap());
        assert!(n >= mm);
    }
}

const PULSE: &str = r#"
schema = 1
[cavity]
kappa1 = 0.004
kappa2 = 0.004
detuning = 1.0
[mechanics]
omega_m = 1.0
gamma = 1e-6
coupling = 0.02
[detector]
eta = 1.0
theta_fb = 1.587796
[filter]
gain = 0.5
delay = 0.025
[pulse]
horizon = 500.0
"#;

#[test]
fn uncoupled_pulse_leaves_beta_at_zero() {
    let f = config_file(&PULSE.replace("coupling = 0.02", "coupling = 0.0"));
    let t = Table::parse(&inloop(&["pulse", "--config", f.path().to_str().unwrap()]));
    for m in ["closed_form", "effective", "full_dde"] {
        assert!(t.col(&format!("|beta| {m}")).iter().all(|&b| b == 0.0), "{m}");
    }
}

#[test]
fn closed_form_envelope_decays_at_half_the_effective_linewidth() {
    let f = config_file(&format!("{PULSE}modes = [\"closed_form\", \"full_dde\"]\n"));
    let t = Table::parse(&inloop(&["pulse", "--config", f.path().to_str().unwrap()]));
    let kappa_eff = t.meta["kappa_eff"].as_f64().unwrap();
    let (ts, b) = (t.col("t"), t.col("|beta| closed_form"));
    // Least-squares slope of ln|beta| through the local maxima.
    let peaks: Vec<(f64, f64)> = (1..b.len() - 1).filter(|&i| b[i] > b[i - 1] && b[i] >= b[i + 1]).map(|i| (ts[i], b[i].ln())).collect();
    assert!(peaks.len() >= 3, "{} peaks", peaks.len());
    let n = peaks.len() as f64;
    let (mx, my) = (peaks.iter().map(|p| p.0).sum::<f64>() / n, peaks.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = peaks.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / peaks.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((-slope - kappa_eff / 2.0).abs() < 0.05 * kappa_eff / 2.0, "rate {} vs {}", -slope, kappa_eff / 2.0);
    assert_eq!(t.col("|beta| full_dde").len(), ts.len());
}

#[test]
fn cooling_map_spot_value() {
    let t = Table::parse(&inloop(&["cooling", "--preset", "fig9a"]));
    let wm = 2.0 * std::f64::consts::PI * 1e7;
    let (k, d, n) = (t.col("kappa"), t.col("detuning"), t.col("n_m"));
    let i = (0..k.len())
        .find(|&i| (k[i] / wm - 1.0).abs() < 1e-9 && (d[i] / wm - 1.0).abs() < 1e-9)
        .expect("grid holds kappa = detuning = omega_m");
    assert!((n[i] - 0.078).abs() < 1e-3, "{}", n[i]);
    // Feedback beats plain sideband cooling wherever the suppression is realisable.
    let (base, ok) = (t.col("n_sideband_cooling"), t.col("realisable"));
    for j in 0..n.len() {
        if ok[j] == 1.0 && base[j].is_finite() {
            assert!(n[j] <= base[j] * (1.0 + 1e-9), "row {j}: {} vs {}", n[j], base[j]);
        }
    }
}

#[test]
fn sideband_baseline_column_matches_open_loop_rates() {
    let t = Table::parse(&inloop(&["cooling", "--preset", "fig9c"]));
    let (n, base) = (t.col("n_m"), t.col("n_sideband_cooling"));
    for (a, b) in n.iter().zip(&base) {
        if a.is_finite() {
            assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
        }
    }
}

#[test]
fn suppressed_rates_do_not_depend_on_the_delay() {
    let sf = |p: &str| -> Vec<(f64, f64)> {
        let t = Table::parse(&inloop(&["cooling", "--preset", p]));
        t.meta["suppression"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| (s["S_F_plus_omega_m"].as_f64().unwrap(), s["S_F_minus_omega_m"].as_f64().unwrap()))
            .collect()
    };
    for (a, b) in sf("fig8a").iter().zip(sf("fig8b")) {
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6, "{a:?} vs {b:?}");
    }
}

#[test]
fn squeezing_curves_are_ordered() {
    let t = Table::parse(&inloop(&["squeeze", "--preset", "fig10"]));
    let (fixed, opt, open, single) = (t.col("S_fixed"), t.col("S_optimised"), t.col("S_no_feedback"), t.col("S_single_sided"));
    let w = t.col("omega");
    let w0 = t.meta["omega_ref"].as_f64().unwrap();
    let mut squeezed = 0;
    for i in 0..w.len() {
        assert!(opt[i] <= fixed[i] * (1.0 + 1e-9), "omega {}: optimised above fixed", w[i]);
        assert!(opt[i] <= open[i] * (1.0 + 1e-9), "omega {}: optimised above no-feedback", w[i]);
        // The single-sided bound applies where the open-loop light is squeezed.
        if open[i] < 1.0 - 1e-6 {
            squeezed += 1;
            assert!(opt[i] >= single[i] - 1e-9, "omega {}: {} below single-sided {}", w[i], opt[i], single[i]);
        }
        if w[i] == w0 {
            assert!((fixed[i] - opt[i]).abs() < 1e-9);
        }
    }
    assert!(squeezed > w.len() / 2);
}
