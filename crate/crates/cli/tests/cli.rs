use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn leakcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakcert"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = leakcert(&["gen-data", "--seed", "7", "--n", "200", "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("s,t\n"));
    assert_eq!(text.lines().count(), 201);

    let c = dir.path().join("c.csv");
    leakcert(&["gen-data", "--seed", "8", "--n", "200", "--out", path(&c)]);
    assert_ne!(text, fs::read_to_string(&c).unwrap());
}

#[test]
fn audit_cls_flags_deterministic_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("det.csv");
    let mut csv = String::from("s,t\n");
    for i in 0..200 {
        csv.push_str(if i % 2 == 0 { "1,1\n" } else { "-1,2\n" });
    }
    fs::write(&data, csv).unwrap();
    let o = leakcert(&["audit-cls", "--data", path(&data), "--d", "2", "--delta", "0.01"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "leakage-possible");
    assert_eq!(report["certified_lower_bound"], 0.0);
}

#[test]
fn audit_cls_bounds_independent_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ind.csv");
    let out = dir.path().join("report.json");
    let mut csv = String::from("s,t\n");
    for i in 0..40_000 {
        csv.push_str(["1,1\n", "-1,1\n", "1,2\n", "-1,2\n"][i % 4]);
    }
    fs::write(&data, csv).unwrap();
    let o = leakcert(&["audit-cls", "--data", path(&data), "--d", "2", "--delta", "0.01", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["verdict"], "leakage-bounded");
    assert_eq!(report["empirical_loss"], 1.0);

    // Log-loss certificate ln 2 − h_b(0.014667…) ≈ 0.6167 sits below the 0.95·ln 2 default.
    let o = leakcert(&["audit-cls", "--data", path(&data), "--d", "2", "--loss", "log"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lb = report["certified_lower_bound"].as_f64().unwrap();
    assert!((lb - 0.616_660_720_469_433_5).abs() < 1e-12, "{lb}");
    let o = leakcert(&["audit-cls", "--data", path(&data), "--d", "2", "--loss", "log", "--threshold", "0.6"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn audit_cls_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "s,t\n1,1\n-1,2\n").unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, format!(r#"{{"data": {:?}, "d": 2, "delta": 0.1}}"#, path(&data))).unwrap();
    let o = leakcert(&["audit-cls", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["delta"], 0.1);

    let o = leakcert(&["audit-cls", "--config", path(&cfg), "--delta", "0.2"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["delta"], 0.2);
}

#[test]
fn audit_rep_runs_on_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rep.csv");
    leakcert(&["gen-data", "--seed", "1", "--n", "2000", "--mu", "0.1", "--out", path(&data)]);
    let args = ["audit-rep", "--data", path(&data), "--k", "8", "--delta", "0.05", "--diam", "6", "--restarts", "2", "--epochs", "3"];

    let mut loose = args.to_vec();
    loose.extend(["--c-eta", "0.1", "--threshold", "0.0"]);
    let o = leakcert(&loose);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["c_eta_source"], "user-asserted");
    assert_eq!(report["k"], 8);

    let mut vacuous = args.to_vec();
    vacuous.extend(["--c-eta", "10"]);
    assert_eq!(leakcert(&vacuous).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(leakcert(&["audit-cls", "--d", "2"]).status.code(), Some(1));
    assert_eq!(leakcert(&["audit-cls", "--bogus"]).status.code(), Some(1));
    assert_eq!(leakcert(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(leakcert(&["audit-cls", "--data", "/nonexistent.csv", "--d", "2"]).status.code(), Some(1));
    assert_eq!(leakcert(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = leakcert(&[
                "sweep", "--mu", "0,0.1", "--n", "500", "--k", "6", "--restarts", "2", "--epochs", "2", "--seed", "9", "--out", path(&out),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    for file in ["sweep.csv", "sweep.json", "sweep.svg"] {
        assert_eq!(fs::read(runs[0].join(file)).unwrap(), fs::read(runs[1].join(file)).unwrap(), "{file}");
    }
}

#[test]
fn selftest_quick_passes() {
    let o = leakcert(&["selftest", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
