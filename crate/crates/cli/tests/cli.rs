use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatframes"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn build_small(dir: &Path, name: &str, variant: &str) {
    let o = run(
        dir,
        &["build", "--space", "torus", "--N", "128", "--levels", "4", "--variant", variant, "--out", name],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    build_small(dir.path(), "t.hkf", "tight");
    let summary = json(&dir.path().join("t.json"));
    assert_eq!(summary["variant"], "tight");
    assert_eq!(summary["levels"].as_array().unwrap().len(), 5);

    let o = run(
        dir.path(),
        &["verify", "t.hkf", "--suite", "frame-bounds,cubature,markov", "--trials", "10", "--out", "v.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    assert!(csv.starts_with("suite,item,value,lower,upper,pass\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(json(&dir.path().join("v.json"))["pass"], true);
}

#[test]
fn dual_frame_reconstructs() {
    let dir = tempfile::tempdir().unwrap();
    build_small(dir.path(), "d.hkf", "dual");
    let o = run(dir.path(), &["verify", "d.hkf", "--suite", "reconstruction", "--trials", "5", "--out", "r.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_invariant_exits_one() {
    // Scaling one level of a tight frame breaks the Parseval identity.
    let dir = tempfile::tempdir().unwrap();
    build_small(dir.path(), "t.hkf", "tight");
    let mut doc = json(&dir.path().join("t.hkf"));
    for v in doc["frame"]["levels"][2]["primal"]["data"].as_array_mut().unwrap() {
        *v = serde_json::json!(v.as_f64().unwrap() * 1.5);
    }
    std::fs::write(dir.path().join("bent.hkf"), doc.to_string()).unwrap();
    let o = run(dir.path(), &["verify", "bent.hkf", "--suite", "frame-bounds", "--trials", "5", "--out", "v.csv"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("v.json"))["pass"], false);

    // Suites that do not apply are skipped, not failed.
    build_small(dir.path(), "f.hkf", "frame1");
    let o = run(dir.path(), &["verify", "f.hkf", "--suite", "cubature", "--out", "c.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("c.json"))["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["build", "--space", "sphere", "--N", "8", "--out", "x.hkf"])), 2);
    assert_eq!(code(&run(dir.path(), &["build", "--N", "8", "--gamma", "soon", "--out", "x.hkf"])), 2);
    assert_eq!(code(&run(dir.path(), &["verify", "missing.hkf"])), 2);

    std::fs::write(dir.path().join("old.hkf"), "{\"format\":\"hkf\",\"version\":99,\"frame\":{}}").unwrap();
    let o = run(dir.path(), &["verify", "old.hkf"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));

    build_small(dir.path(), "t.hkf", "tight");
    let o = run(dir.path(), &["norms", "t.hkf", "--spaces", "tl", "--p", "inf"]);
    assert_eq!(code(&o), 2);
    let o = run(dir.path(), &["approx", "t.hkf", "--p", "0.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    build_small(dir.path(), "a.hkf", "tight");
    build_small(dir.path(), "b.hkf", "tight");
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.hkf"), read("b.hkf"));
    for out in ["n1.csv", "n2.csv"] {
        let o = run(dir.path(), &["norms", "a.hkf", "--f", "random:seed=3", "--s", "0.5,1", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read("n1.csv"), read("n2.csv"));
}

#[test]
fn config_file_fills_in_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"space": {"kind": "torus", "N": 64}, "levels": 5, "variant": "frame1", "trials": 3}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["build", "--config", "cfg.json", "--levels", "2", "--out", "c.hkf"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("c.json"));
    assert_eq!(s["variant"], "frame1");
    assert_eq!(s["truncation"], 64);
    assert_eq!(s["levels"].as_array().unwrap().len(), 3);

    std::fs::write(dir.path().join("broken.json"), "[1, 2]").unwrap();
    assert_eq!(code(&run(dir.path(), &["build", "--config", "broken.json", "--out", "x.hkf"])), 2);
}

#[test]
fn norms_methods_agree_within_a_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["build", "--space", "torus", "--N", "512", "--levels", "6", "--variant", "dual", "--out", "d.hkf"],
    );
    assert_eq!(code(&o), 0);
    let o = run(
        dir.path(),
        &[
            "norms", "d.hkf", "--f", "random:seed=1", "--s", "0.5", "--p", "2", "--q", "2",
            "--methods", "lp,heat,seq", "--out", "n.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let groups = json(&dir.path().join("n.json"))["groups"].clone();
    let spread = groups[0]["spread"].as_f64().unwrap();
    assert!(spread.is_finite() && spread < 4.0, "spread {spread}");
}

#[test]
fn approx_curve_decays_at_the_jackson_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["build", "--space", "torus", "--N", "512", "--levels", "6", "--variant", "tight", "--out", "t.hkf"],
    );
    assert_eq!(code(&o), 0);
    let o = run(
        dir.path(),
        &["approx", "t.hkf", "--f", "sample:besov,seed=1", "--s", "1", "--p", "2", "--nmax", "400", "--out", "a.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("a.json"));
    let slope = s["jackson"]["slope_hat"].as_f64().unwrap();
    assert!(slope <= -0.85, "slope {slope}");
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("n,sigma_hat,p,s\n"));
}

#[test]
fn report_lists_levels_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    build_small(dir.path(), "t.hkf", "tight");
    let o = run(dir.path(), &["report", "t.hkf", "--trials", "5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 5);
    assert!(v["bounds"].is_object());
}
