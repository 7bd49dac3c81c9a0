use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qjc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qjc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn column(csv_text: &str, source: &str) -> Vec<f64> {
    rows(csv_text)
        .iter()
        .filter(|r| &r[5] == source)
        .map(|r| r[3].parse().unwrap())
        .collect()
}

/// Shortest round-trip formatting rule of the writer.
fn canonical(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn assert_canonical_csv(text: &str) {
    for r in rows(text) {
        for field in r.iter() {
            if let Ok(x) = field.parse::<f64>() {
                assert_eq!(canonical(x), field, "non-canonical number {field}");
            }
        }
    }
}

fn assert_json_round_trip(bytes: &[u8]) {
    let v: Value = serde_json::from_slice(bytes).unwrap();
    let mut again = serde_json::to_vec_pretty(&v).unwrap();
    again.push(b'\n');
    assert_eq!(again, bytes);
}

#[test]
fn extended_spectrum_at_zero_coupling() {
    let o = qjc(&[
        "spectrum", "--model", "extended", "--k", "2", "--phi", "+1", "--eps", "1", "--rho", "0",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut closed = column(&text, "closed-form");
    closed.sort_by(f64::total_cmp);
    assert_eq!(&closed[..6], &[-0.5, 0.5, 0.5, 1.5, 1.5, 2.5]);
    assert!(text.starts_with("label,n,branch,re,im,source,residual\n"));
    assert_canonical_csv(&text);
}

#[test]
fn ht_spectrum_matches_algebraic_list() {
    let o = qjc(&[
        "spectrum", "--model", "ht", "--N", "1", "--rho", "0", "--theta", "1", "--eps", "1",
    ]);
    assert!(o.status.success());
    let got = column(&stdout(&o), "qes");
    let s2 = 2f64.sqrt();
    let want = [
        -0.5,
        -1.0 / 6.0,
        (9.0 - 2.0 * s2) / 6.0,
        7.0 / 6.0,
        (9.0 + 2.0 * s2) / 6.0,
        2.5,
    ];
    assert_eq!(got.len(), 6);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
    let rec = column(&stdout(&o), "recurrence");
    assert!(!rec.is_empty());
}

#[test]
fn theta_on_jcm_is_a_validation_error() {
    let o = qjc(&["spectrum", "--model", "jcm", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--theta"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_model_and_bad_phi_exit_2() {
    assert_eq!(qjc(&["check", "--model", "nope"]).status.code(), Some(2));
    assert_eq!(
        qjc(&["check", "--model", "extended", "--phi", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qjc(&["sweep", "--model", "h12"]).status.code(), Some(2));
    assert_eq!(qjc(&["spectrum"]).status.code(), Some(2));
}

#[test]
fn check_reports() {
    let mandal = json(&qjc(&[
        "check", "--model", "mandal", "--rho", "0.5", "--D", "24",
    ]));
    assert_eq!(mandal["schema_version"], 1);
    assert_eq!(mandal["pseudo"]["sigma3"]["ok"], true);
    assert_eq!(mandal["hermitian"]["ok"], false);
    // resonant doublets (ε = ħω) turn complex for any ρ ≠ 0
    assert_eq!(mandal["spectrum_class"], "mixed");

    let jcm = json(&qjc(&[
        "check", "--model", "jcm", "--rho", "0.5", "--D", "24",
    ]));
    assert_eq!(jcm["hermitian"]["ok"], true);

    let ext = qjc(&[
        "check", "--model", "extended", "--k", "2", "--phi", "-1", "--rho", "0.3", "--D", "24",
    ]);
    let v = json(&ext);
    assert_eq!(v["pseudo"]["parity"]["ok"], false);
    assert_eq!(v["pseudo"]["sigma3"]["ok"], true);
    for key in ["hermitian", "pt", "pseudo", "spectrum_class", "tolerances"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_json_round_trip(&ext.stdout);
}

#[test]
fn negative_phi_spellings() {
    let a = json(&qjc(&[
        "check", "--model", "extended", "--phi", "-1", "--rho", "0.2", "--D", "16",
    ]));
    let b = json(&qjc(&[
        "check", "--model", "extended", "--phi=-1", "--rho", "0.2", "--D", "16",
    ]));
    assert_eq!(a, b);
    assert_eq!(a["params"]["phi"], -1);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# defaults\nmodel = extended\nk = 2\neps = 0.5\nrho = 0.3\nD = 20\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&qjc(&["check", "--config", cfg, "--rho", "0.7"]));
    assert_eq!(v["params"]["eps"], 0.5);
    assert_eq!(v["params"]["rho"], 0.7);
    assert_eq!(v["params"]["k"], 2);
    assert_eq!(v["params"]["D"], 20);
    assert_eq!(v["params"]["g"], 8);
    assert_eq!(v["params"]["hbar_omega"], 1.0);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "model = jcm\ntheta = 1\n").unwrap();
    let o = qjc(&["check", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--theta"));
}

#[test]
fn output_flag_keeps_stdout_clean() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = qjc(&[
        "spectrum",
        "--model",
        "extended",
        "--k",
        "1",
        "--rho",
        "0.4",
        "--D",
        "24",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let bytes = std::fs::read(&path).unwrap();
    assert_json_round_trip(&bytes);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["source"] == "numeric"));
}

fn events(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("# event,"))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn labels(path: &Path) -> std::collections::BTreeSet<String> {
    rows(&std::fs::read_to_string(path).unwrap())
        .iter()
        .map(|r| r[1].to_string())
        .collect()
}

#[test]
fn figure_one_and_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(
        qjc(&["figures", "--which", "1", "--out-dir", d, "--steps", "101"])
            .status
            .success()
    );
    assert!(
        qjc(&["figures", "--which", "2", "--out-dir", d, "--steps", "101"])
            .status
            .success()
    );
    let fig1 = dir.path().join("fig1.csv");
    let fig2 = dir.path().join("fig2.csv");
    assert_eq!(labels(&fig1).len(), 6);
    assert_eq!(labels(&fig2), labels(&fig1));
    let text = std::fs::read_to_string(&fig1).unwrap();
    assert!(text.starts_with("param_value,level_label,re,im\n"));
    assert_canonical_csv(&text);
    assert!(!text.contains("INCOMPLETE"));

    let co: Vec<f64> = events(&fig2)
        .iter()
        .filter(|e| e[0] == "coalescence")
        .map(|e| e[1].parse().unwrap())
        .collect();
    assert_eq!(co.len(), 2);
    assert!(co.iter().any(|r| (r - 0.3535534).abs() < 1e-6));
    assert!(co.iter().any(|r| (r - 0.2041241).abs() < 1e-6));
    assert!(events(&fig1).iter().all(|e| e[0] == "crossing"));
    let svg = std::fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn figure_three_has_constant_level() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(
        qjc(&["figures", "--which", "3", "--out-dir", d, "--steps", "121"])
            .status
            .success()
    );
    for rho in ["0", "1", "2"] {
        let path = dir.path().join(format!("fig3_rho{rho}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        let recs = rows(&text);
        let constant = labels(&path).into_iter().any(|label| {
            recs.iter()
                .filter(|r| r[1] == *label)
                .all(|r| (r[2].parse::<f64>().unwrap() + 0.5).abs() < 1e-12)
        });
        assert!(constant, "no E = -1/2 line at rho = {rho}");
        assert!(dir.path().join(format!("fig3_rho{rho}.svg")).exists());
    }
    let crossing = events(&dir.path().join("fig3_rho1.csv"))
        .into_iter()
        .filter(|e| e[0] == "crossing")
        .map(|e| (e[1].parse::<f64>().unwrap(), e[2].parse::<f64>().unwrap()))
        .find(|&(t, e)| (1.4..=1.6).contains(&t) && (e + 0.5).abs() < 1e-6);
    assert!(crossing.is_some());
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("s.csv");
    let svg_path = dir.path().join("s.svg");
    let o = qjc(&[
        "sweep",
        "--model",
        "mandal",
        "--from",
        "0",
        "--to",
        "1",
        "--steps",
        "21",
        "--doublets",
        "3",
        "--output",
        csv_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(labels(&csv_path).len(), 7);
    assert_eq!(
        rows(&std::fs::read_to_string(&csv_path).unwrap()).len(),
        21 * 7
    );
    assert!(svg_path.exists());
    let theta_on_extended = qjc(&["sweep", "--model", "extended", "--param", "theta"]);
    assert_eq!(theta_on_extended.status.code(), Some(2));
}

#[test]
fn qes_recur_and_polyrep() {
    let q = json(&qjc(&[
        "qes", "--N", "2", "--rho", "0.7", "--theta", "1.1", "--D", "24",
    ]));
    assert_eq!(q["leak"], 0.0);
    assert_eq!(q["eigenpairs"].as_array().unwrap().len(), 8);
    let r = json(&qjc(&[
        "recur", "--N", "2", "--rho", "0.7", "--theta", "1.1",
    ]));
    assert!(!r["roots"].as_array().unwrap().is_empty());
    assert_eq!(r["critical"]["degree"], 7);
    let p = json(&qjc(&[
        "polyrep-check",
        "--model",
        "mandal",
        "--rho",
        "0.3",
        "--eps",
        "0.5",
        "--n",
        "5",
        "--D",
        "32",
    ]));
    assert_eq!(p["ok"], true);
    let p = json(&qjc(&[
        "polyrep-check",
        "--model",
        "ht",
        "--N",
        "3",
        "--rho",
        "0.5",
        "--theta",
        "0.9",
        "--D",
        "32",
    ]));
    assert_eq!(p["ok"], true);
    assert_eq!(qjc(&["qes", "--model", "jcm"]).status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let bad = Command::new(env!("CARGO_BIN_EXE_qjc"))
        .args(["check", "--model", "jcm", "--D", "12"])
        .env("QJC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_qjc"))
        .args(["check", "--model", "jcm", "--D", "12"])
        .env("QJC_THREADS", "2")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
