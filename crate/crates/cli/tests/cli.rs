//! Exit-code and file contracts of the `ipt-tank` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ipt_tank_testkit::f1;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipt-tank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn f1_config() -> Value {
    json!({
        "coils": {"l1": f1::L1, "l2": f1::L2, "k": f1::K},
        "f_cc": f1::F_CC_HZ,
        "loads": f1::LOADS,
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Solves F1 into `dir` and returns the config and solution paths.
fn solve_f1(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = write(dir, "f1.json", &f1_config());
    let out = run(&["solve", "--config", s(&cfg), "--out", s(dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (cfg, dir.join("solution.json"))
}

#[test]
fn solve_f1_writes_closed_form_css() {
    let dir = tempfile::tempdir().unwrap();
    let (_, sol) = solve_f1(dir.path());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(sol).unwrap()).unwrap();
    let c_ss = v["design"]["c_ss"].as_f64().unwrap();
    assert!((c_ss - f1::C_SS).abs() <= 1e-4 * f1::C_SS, "{c_ss}");
    assert_eq!(v["solutions"].as_array().unwrap().len(), 1);
    assert_eq!(v["solutions"][0]["verified"], json!(true));
    assert_eq!(v["solutions"][0]["oracle"]["cc_confirmed"], json!(true));
    assert_eq!(v["solutions"][0]["oracle"]["cv_confirmed"], json!(true));
}

#[test]
fn invalid_configs_exit_2_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad_k = f1_config();
    bad_k["coils"]["k"] = json!(1.0);
    let mut no_loads = f1_config();
    no_loads["loads"] = json!([]);
    for (name, cfg, needle) in [("k.json", bad_k, "k"), ("loads.json", no_loads, "loads")] {
        let p = write(dir.path(), name, &cfg);
        let out = run(&["solve", "--config", s(&p), "--out", s(&dir.path().join("o"))]);
        assert_eq!(code(&out), 2);
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{err}");
    }
    assert!(!dir.path().join("o").exists());

    let p = dir.path().join("syntax.json");
    std::fs::write(&p, "{\n  \"coils\": {\"l1\": 1e-4,,}\n}").unwrap();
    let out = run(&["solve", "--config", s(&p)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unsolvable_spec_exits_1() {
    // ω_cv confined below ω_cc has no physical root.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = f1_config();
    cfg["solver"] = json!({"omega_cv_ratio_bounds": [0.3, 0.9]});
    let p = write(dir.path(), "c.json", &cfg);
    let out = run(&["solve", "--config", s(&p), "--out", s(dir.path())]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap()).unwrap();
    assert!(v["design"].is_null());
}

#[test]
fn verify_contract() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, sol) = solve_f1(dir.path());
    let out = run(&[
        "verify",
        "--config",
        s(&cfg),
        "--design",
        s(&sol),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    for f in ["report_cc.json", "report_cv.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(f)).unwrap()).unwrap();
        assert_eq!(v["pass"], json!(true));
    }

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let mut detuned = v["design"].clone();
    detuned["c_ss"] = json!(detuned["c_ss"].as_f64().unwrap() * 1.05);
    let d = write(dir.path(), "detuned.json", &detuned);
    let o2 = dir.path().join("detuned_out");
    let out = run(&["verify", "--config", s(&cfg), "--design", s(&d), "--out", s(&o2)]);
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("zpa_theta_in") && stdout.contains("cc_residual"),
        "{stdout}"
    );
    let cc: Value = serde_json::from_str(&std::fs::read_to_string(o2.join("report_cc.json")).unwrap()).unwrap();
    assert_eq!(cc["pass"], json!(false));

    let mut negative = v["design"].clone();
    negative["c_sp"] = json!(-1e-8);
    let n = write(dir.path(), "neg.json", &negative);
    let o3 = dir.path().join("neg_out");
    let out = run(&["verify", "--config", s(&cfg), "--design", s(&n), "--out", s(&o3)]);
    assert_eq!(code(&out), 2);
    assert!(!o3.exists());

    let mut missing = v["design"].clone();
    missing.as_object_mut().unwrap().remove("f_cv");
    let m = write(dir.path(), "missing.json", &missing);
    let out = run(&["verify", "--config", s(&cfg), "--design", s(&m), "--out", s(&o3)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("f_cv"));
}

#[test]
fn sweep_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, sol) = solve_f1(dir.path());
    let mut two_loads = f1_config();
    two_loads["loads"] = json!([20.0, 5.0]);
    let cfg2 = write(dir.path(), "two.json", &two_loads);
    let small = dir.path().join("small");
    let out = run(&[
        "sweep",
        "--config",
        s(&cfg2),
        "--design",
        s(&sol),
        "--fmin",
        "80000",
        "--fmax",
        "90000",
        "--points",
        "3",
        "--out",
        s(&small),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(small.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(
        lines[0],
        "omega_rad_s,f_hz,r_ac_ohm,re_zin,im_zin,theta_in_deg,mag_vo_vin,mag_io_vin_s,arg_io_vin_deg,arg_vo_vin_deg,p_in_w,p_out_w,flag"
    );
    let loads: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(loads, ["5", "20", "5", "20", "5", "20"]);

    // Im(Z_in) changes sign across ω_cc for every load.
    let around = dir.path().join("around");
    let out = run(&[
        "sweep",
        "--config",
        s(&cfg),
        "--design",
        s(&sol),
        "--fmin",
        "84000",
        "--fmax",
        "86000",
        "--points",
        "2",
        "--out",
        s(&around),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(around.join("sweep.csv")).unwrap();
    let im: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    let n = f1::LOADS.len();
    for i in 0..n {
        assert!(im[i].signum() != im[n + i].signum(), "load {i}: {im:?}");
    }

    let again = dir.path().join("again");
    let full = |o: &Path| run(&["sweep", "--config", s(&cfg), "--design", s(&sol), "--out", s(o)]);
    assert_eq!(code(&full(&around)), 0);
    assert_eq!(code(&full(&again)), 0);
    assert_eq!(
        std::fs::read(around.join("sweep.csv")).unwrap(),
        std::fs::read(again.join("sweep.csv")).unwrap()
    );
}

#[test]
fn sweep_without_design_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f1.json", &f1_config());
    let out = run(&["sweep", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    let out = run(&["sweep", "--config", s(&cfg), "--fmin", "2e5", "--fmax", "1e5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn equiv_contract() {
    let out = run(&["equiv", "--random", "1000", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(code(&run(&["equiv", "--random", "0"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f1.json", &f1_config());
    let out = run(&["equiv", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("equiv.json")).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 2);

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for o in [&a, &b] {
        assert_eq!(
            code(&run(&["equiv", "--random", "50", "--seed", "7", "--out", s(o)])),
            0
        );
    }
    assert_eq!(
        std::fs::read(a.join("equiv.json")).unwrap(),
        std::fs::read(b.join("equiv.json")).unwrap()
    );
}

#[test]
fn fixed_capacitors_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let (_, sol) = solve_f1(dir.path());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(sol).unwrap()).unwrap();
    let d = &v["design"];
    let mut cfg = f1_config();
    cfg["capacitors"] = json!({"c_p": d["c_p"], "c_ss": d["c_ss"], "c_sp": d["c_sp"]});
    cfg["f_cv"] = d["f_cv"].clone();
    cfg["output_dir"] = json!("results");
    let p = write(dir.path(), "fixed.json", &cfg);
    assert_eq!(code(&run(&["verify", "--config", s(&p)])), 0);
    assert!(dir.path().join("results/report_cv.json").exists());
}
