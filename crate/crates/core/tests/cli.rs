use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn relkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relkin")).args(args).env_remove("RELKIN_WORKERS").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

// 6³ momentum grid and light quadrature so a full solve takes about a second
fn small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let c_inf = relkin::macro5::sound_speed(1.0, 1.0).unwrap().c_inf;
    let text = format!(
        "[physical]\nu1 = {u1}\n\n[grid]\nper_axis = 6\np_max = 8.0\nstretch = 2.0\nnx = 24\n\n\
         [quadrature]\nk_panels = 2\nk_angular = 3\nk_omega = 3\nnu_panels = 3\nnu_angular = 4\n\
         gamma_panels = 1\ngamma_angular = 2\ngamma_omega = 2\n\n[output]\ncsv = \"{csv}\"\n{extra}",
        u1 = -0.5 * c_inf,
        csv = dir.join("profile.csv").display(),
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn soundspeed_classical_limit_and_schema() {
    let out = relkin(&["soundspeed", "--T", "1e-4", "--c", "1", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    for key in ["schema_version", "c_inf", "c_hat_inf", "z", "a1", "a2", "a3"] {
        assert!(v[key].is_number(), "missing {key}");
    }
    let want = (5.0 / 3.0 * 1e-4f64).sqrt();
    assert!((v["c_inf"].as_f64().unwrap() / want - 1.0).abs() < 1e-3);
}

#[test]
fn invalid_input_exits_nonzero() {
    let out = relkin(&["soundspeed", "--T", "-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("T"));
    assert!(!relkin(&["soundspeed", "--bogus"]).status.success());
    assert!(!relkin(&["frobnicate"]).status.success());
}

#[test]
fn classify_reports_the_n_plus_table() {
    for (mach, n) in [("-2", 0), ("-0.5", 1), ("0.5", 4), ("2", 5)] {
        let out = relkin(&["classify", "--mach", mach, "--json"]);
        assert!(out.status.success());
        let v = json(&out);
        assert_eq!(v["n_plus"].as_u64().unwrap(), n, "mach {mach}");
        assert_eq!(v["lambda"].as_array().unwrap().len(), 5);
        assert!(v["eigen_check"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn degenerate_mach_has_its_own_exit_code() {
    let out = relkin(&["classify", "--mach", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = relkin(&["classify", "--mach", "-1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn moments_table_verifies() {
    let out = relkin(&["moments", "--u1", "0.3", "--T", "0.5", "--verify", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    for r in rows {
        assert!(r["rel_err"].as_f64().unwrap() <= 1e-6, "{r}");
    }
    let m2 = rows.iter().find(|r| r["kind"].as_str().unwrap().starts_with("M2")).unwrap();
    assert_eq!(m2["closed_form"].as_f64().unwrap(), 0.3);
}

#[test]
fn moments_at_rest_have_vanishing_odd_rows() {
    let v = json(&relkin(&["moments", "--json"]));
    for r in v["rows"].as_array().unwrap() {
        let kind = r["kind"].as_str().unwrap();
        if ["M5", "M9", "M12", "M13"].iter().any(|k| kind.starts_with(&format!("{k}[")) || kind == *k) {
            assert_eq!(r["closed_form"].as_f64().unwrap(), 0.0, "{kind}");
        }
    }
}

#[test]
fn solve_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = relkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["failed"], Value::Bool(false));
    let gamma = v["gamma"].as_f64().unwrap();
    let fit = v["gamma_fit"].as_f64().unwrap();
    assert!((fit / gamma - 1.0).abs() <= 0.02, "gamma_fit {fit} vs {gamma}");
    assert_eq!(v["solvability"].as_array().unwrap().len(), 5);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], relkin::cli::CSV_HEADER.join(","));
    assert_eq!(lines.len() - 1, 24 + 1);
    assert!(!csv.contains('\r'));
}

#[test]
fn zero_boundary_gives_zero_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "\n[boundary]\nfamily = \"zero\"\n");
    let out = relkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    for line in csv.lines().skip(1) {
        for cell in line.split(',').skip(1) {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
}

#[test]
fn failed_solve_still_emits_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "\n[solver]\nmax_iter = 1\nmax_outer = 1\ntol = 1e-14\n");
    let out = relkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["failed"], Value::Bool(true));
    assert!(v["error"].is_string());
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "\n[solver]\nbeta = 1.0\n");
    let out = relkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.beta"));
}

#[test]
fn effective_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let eff = dir.path().join("effective.toml");
    let cfg = small_config(dir.path(), &format!("effective_config = \"{}\"\n", eff.display()));
    let first = relkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(first.status.success());
    let csv1 = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let second = relkin(&["solve", "--config", eff.to_str().unwrap()]);
    assert!(second.status.success());
    let csv2 = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(json(&first), json(&second));
    assert_eq!(csv1, csv2);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let one = relkin(&["solve", "--workers", "1", "--config", cfg.to_str().unwrap()]);
    let csv1 = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let env = Command::new(env!("CARGO_BIN_EXE_relkin"))
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .env("RELKIN_WORKERS", "3")
        .output()
        .unwrap();
    let csv3 = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(one.status.success() && env.status.success());
    assert_eq!(json(&one), json(&env));
    assert_eq!(csv1, csv3);
    let bad = Command::new(env!("CARGO_BIN_EXE_relkin")).args(["soundspeed"]).env("RELKIN_WORKERS", "many").output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn verify_lorentz_passes() {
    let out = relkin(&["verify", "--suite", "lorentz"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn perturbed_bessel_is_detected() {
    let out = relkin(&["verify", "--suite", "moments", "--perturb-bessel", "1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn verify_all_emits_records() {
    let out = relkin(&["verify", "--suite", "all", "--json"]);
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(out.status.success()));
    assert!(out.status.success(), "{v}");
    let checks = v["checks"].as_array().unwrap();
    for suite in ["lorentz", "moments", "collision", "macro", "solver"] {
        assert!(checks.iter().any(|c| c["suite"] == suite), "no checks for {suite}");
    }
    for c in checks {
        for key in ["suite", "name", "value", "threshold", "passed"] {
            assert!(!c[key].is_null(), "{key} missing in {c}");
        }
    }
}
