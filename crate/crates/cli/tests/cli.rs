use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phack_core::sweeps::format_sig6;
use phack_core::{fpr_regime, rr_regime, table_regime, TestDesign};
use serde_json::Value;

fn phack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phack"))
        .args(args)
        .env_remove("PHACK_OUT_DIR")
        .output()
        .expect("spawn phack")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json record")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

const PHI: f64 = 10.0 / 11.0;

#[test]
fn rates_examples() {
    let r = json(&phack(&[
        "rates", "--alpha", "0.005", "--power", "0.8", "--prior-odds", "1:10", "--h", "0.15",
        "--psi", "1",
    ]));
    assert!((f(&r["fpr"]) - 0.7134).abs() < 5e-5);
    let d = TestDesign::from_power(0.005, 0.8, PHI).unwrap();
    assert_eq!(f(&r["fpr"]), fpr_regime(&d, 0.15, 1.0).unwrap());
    assert_eq!(f(&r["rr"]), rr_regime(&d, 0.15, 1.0).unwrap());
    let t = table_regime(&d, 0.15, 1.0).unwrap();
    assert_eq!(f(&r["table"]["unsound_reject"]), t.unsound_reject);
    assert_eq!(f(&r["table"]["mass_sound_false"]), t.mass_sound_false);
    assert_eq!(r["table"].as_object().unwrap().len(), 9);
    assert_eq!(r["inputs"]["prior_odds"], "1:10");

    let r = json(&phack(&["rates", "--alpha", "0.05", "--power", "0.8", "--prior-odds", "1:10", "--h", "0"]));
    assert!((f(&r["fpr"]) - 0.3846).abs() < 5e-5);

    let r = json(&phack(&["rates", "--alpha", "0.05", "--power", "0.8", "--phi", "0"]));
    assert_eq!(f(&r["fpr"]), 0.0);
    assert_eq!(f(&r["rr"]), 1.0);
}

/// Re-invokes `rates` with the echoed inputs and expects an identical record.
fn round_trip(args: &[&str]) {
    let first = json(&phack(args));
    let i = &first["inputs"];
    let num = |k: &str| format!("{:?}", f(&i[k]));
    let mut again: Vec<String> = ["rates", "--alpha"].iter().map(|s| s.to_string()).collect();
    again.push(num("alpha"));
    for k in ["beta", "phi", "h", "baseline_alpha"] {
        again.push(format!("--{}", k.replace('_', "-")));
        again.push(num(k));
    }
    let spec = &i["psi_spec"];
    match spec["mode"].as_str().unwrap() {
        "direct" => again.extend(["--psi".into(), format!("{:?}", f(&spec["psi"]))]),
        "lower_bound" => again.extend(["--pi".into(), format!("{:?}", f(&spec["pi"]))]),
        "interpolated" => again.extend([
            "--pi".into(),
            format!("{:?}", f(&spec["pi"])),
            "--naive-cdf".into(),
            format!("{:?}", f(&spec["naive_cdf"])),
        ]),
        m => panic!("unknown mode {m}"),
    }
    let refs: Vec<&str> = again.iter().map(String::as_str).collect();
    let second = json(&phack(&refs));
    for k in ["psi", "fpr", "rr", "table"] {
        assert_eq!(first[k], second[k], "{k} after round trip of {args:?}");
    }
    let mut a = first["inputs"].clone();
    a.as_object_mut().unwrap().remove("prior_odds");
    assert_eq!(a, second["inputs"]);
}

#[test]
fn json_records_round_trip() {
    round_trip(&["rates", "--alpha", "0.005", "--power", "0.8", "--prior-odds", "1:10", "--h", "0.15"]);
    round_trip(&["rates", "--alpha", "0.005", "--beta", "0.37", "--phi", "0.8", "--h", "0.3", "--pi", "0.25"]);
    round_trip(&[
        "rates", "--alpha", "0.01", "--power", "0.6", "--prior-odds", "2:7", "--h", "0.1", "--pi", "0.4",
        "--naive-cdf", "0.3",
    ]);
    round_trip(&["rates", "--alpha", "0.05", "--power", "0.9", "--h", "0.2", "--psi", "0.5"]);
}

#[test]
fn rates_csv_uses_six_significant_digits() {
    let out = phack(&["rates", "--alpha", "0.005", "--h", "0.05", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), 18);
    let d = TestDesign::from_power(0.005, 0.8, PHI).unwrap();
    let at = |k: &str| row[header.iter().position(|h| *h == k).unwrap()];
    assert_eq!(at("fpr"), format_sig6(fpr_regime(&d, 0.05, 1.0).unwrap()));
    assert_eq!(at("fpr"), "0.440147");
}

#[test]
fn flag_validation_exits_2() {
    for args in [
        &["rates", "--beta", "0.2", "--power", "0.8"][..],
        &["rates", "--phi", "0.5", "--prior-odds", "1:1"],
        &["rates", "--psi", "1", "--pi", "0.5"],
        &["rates", "--naive-cdf", "0.5"],
        &["rates", "--prior-odds", "1/10"],
        &["rates", "--prior-odds", "-1:10"],
        &["rates", "--alpha", "1.5"],
        &["rates", "--h", "-0.1"],
        &["rates", "--alpha", "0.1", "--baseline-alpha", "0.05"],
        &["rates", "--unknown"],
        &["fit"],
        &["fit", "--builtin", "psych-rep", "--stratum-model", "normal-shift"],
        &["sweep", "--figure", "9"],
        &["sweep", "--figure", "0"],
        &["sweep", "--figure", "3"],
        &["sweep", "--figure", "1", "--h", "0.1"],
        &["sweep", "--figure", "2", "--naive-cdf", "0.1"],
    ] {
        assert_eq!(code(&phack(args)), 2, "{args:?}");
    }
}

#[test]
fn degenerate_design_exits_3() {
    let out = phack(&["rates", "--alpha", "0.05", "--power", "0", "--phi", "0"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn fit_builtin() {
    let r = json(&phack(&["fit", "--builtin", "psych-rep"]));
    let h = f(&r["point"]);
    assert!((0.070..=0.080).contains(&h));
    assert!(f(&r["residual"]).abs() <= 1e-9);
    assert_eq!(f(&r["data"]["rate"]), 36.0 / 97.0);
    assert!(r.get("stratified").is_none());

    let r = json(&phack(&["fit", "--builtin", "psych-rep", "--stratified"]));
    let s = &r["stratified"];
    assert!((f(&s["range_low"]) - 0.05).abs() <= 0.03);
    assert!((f(&s["range_high"]) - 0.15).abs() <= 0.03);
    assert_eq!(s["strata"].as_array().unwrap().len(), 2);
    assert_eq!(s["model"], "pooled-equation");

    let r = json(&phack(&[
        "fit", "--builtin", "psych-rep", "--stratified", "--stratum-model", "normal-shift",
    ]));
    assert_eq!(r["stratified"]["model"], "normal-shift");
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn fit_input_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "data.toml",
        "total = 97\nreplicated = 36\n\n[[strata]]\np_low = 0.0\np_high = 0.005\ntotal = 47\nreplicated = 24\n\n[[strata]]\np_low = 0.005\np_high = 0.05\ntotal = 50\nreplicated = 12\n",
    );
    let from_file = json(&phack(&["fit", "--input", p.to_str().unwrap(), "--stratified"]));
    let builtin = json(&phack(&["fit", "--builtin", "psych-rep", "--stratified"]));
    assert_eq!(from_file["stratified"], builtin["stratified"]);

    let p = write(dir.path(), "full.toml", "total = 20\nreplicated = 20\n");
    let out = phack(&["fit", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bracket"));

    let p = write(dir.path(), "over.toml", "total = 20\nreplicated = 21\n");
    assert_eq!(code(&phack(&["fit", "--input", p.to_str().unwrap()])), 2);
    let p = write(dir.path(), "broken.toml", "total = \"many\"\n");
    assert_eq!(code(&phack(&["fit", "--input", p.to_str().unwrap()])), 2);
    let p = write(dir.path(), "flat.toml", "total = 97\nreplicated = 36\n");
    assert_eq!(code(&phack(&["fit", "--input", p.to_str().unwrap(), "--stratified"])), 2);
    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&phack(&["fit", "--input", missing.to_str().unwrap()])), 1);
}

#[test]
fn sweep_writes_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = phack(&["sweep", "--figure", "1", "--out", out_dir]);
    assert_eq!(code(&out), 0);
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), 1);
    let csv = std::fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    assert_eq!(csv, golden("figure1.csv"));
    let series: std::collections::BTreeSet<String> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(series.len(), 6);

    let out = phack(&["sweep", "--figure", "5", "--h", "0.15", "--out", out_dir, "--svg"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
    let csv = std::fs::read_to_string(dir.path().join("figure5_h0.15.csv")).unwrap();
    assert!(csv.starts_with("power,psi,ratio,below_one\n"));
    assert_eq!(csv, golden("figure5_h0.15.csv"));
    let svg = std::fs::read_to_string(dir.path().join("figure5_h0.15.svg")).unwrap();
    assert_eq!(svg, golden("figure5_h0.15.svg"));
}

#[test]
fn sweep_honours_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_phack"))
        .args(["sweep", "--figure", "3", "--h", "0.05"])
        .env("PHACK_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("figure3_h0.05.csv")).unwrap();
    assert_eq!(csv, golden("figure3_h0.05.csv"));
}

#[test]
fn simulate_examples() {
    let args = [
        "simulate", "--n", "1000000", "--seed", "42", "--alpha", "0.05", "--power", "0.8",
        "--prior-odds", "1:10", "--h", "0",
    ];
    let a = phack(&args);
    let r = json(&a);
    assert!((f(&r["empirical_fpr"]) - 0.3846).abs() <= 3.0 * f(&r["se_fpr"]));
    assert!(r["passed"].as_bool().unwrap());
    assert_eq!(r["generator"], "chacha8/rand_chacha-0.9/stream-per-65536-chunk");
    assert_eq!(a.stdout, phack(&args).stdout);

    let r = json(&phack(&["simulate", "--n", "1", "--seed", "7", "--h", "0.3"]));
    let nonzero = r["counts"].as_object().unwrap().values().filter(|v| v.as_u64() != Some(0)).count();
    assert_eq!(nonzero, 1);

    let r = json(&phack(&["simulate", "--n", "20000", "--h", "1"]));
    assert_eq!(f(&r["empirical_rr"]), 0.0);
    assert_eq!(f(&r["empirical_fpr"]), 1.0);
}

#[test]
fn simulate_degenerate_config_exits_3() {
    assert_eq!(code(&phack(&["simulate", "--n", "0"])), 3);
    assert_eq!(code(&phack(&["simulate", "--alpha", "0.1", "--baseline-alpha", "0.05"])), 3);
}

#[test]
fn reproduce_reports_and_writes_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = phack(&["reproduce", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
    let info: Vec<&str> = text.lines().filter(|l| l.starts_with("INFO")).collect();
    assert_eq!(info.len(), 2);
    assert!(info.iter().all(|l| l.contains("[documented gap]")));
    let fpr_lines: Vec<&str> = text.lines().filter(|l| l.contains("[fpr_a")).collect();
    assert_eq!(fpr_lines.len(), 6);
    assert!(fpr_lines.iter().all(|l| l.starts_with("PASS")));
    let mut csvs: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(csvs.len(), 7);
    for name in &csvs {
        assert_eq!(std::fs::read_to_string(dir.path().join(name)).unwrap(), golden(name), "{name}");
    }

    let strict = phack(&["reproduce", "--strict", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&strict), 1);
    assert!(String::from_utf8(strict.stdout).unwrap().contains("FAIL [double_h0.15]"));
}
