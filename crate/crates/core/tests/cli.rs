use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{name}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn preset_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinchain(&["preset", "cnot", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let s = summary(dir.path(), "cnot");
    for key in ["goodness", "final_populations", "mean_entropy", "max_entropy_bound", "norm_drift", "step", "pulses"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    assert!(s["goodness"].as_f64().unwrap() < 0.02);
    let stdout: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout, s);

    let trace = fs::read_to_string(dir.path().join("cnot_trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "tau,p1,p2,p3,p4,total,entropy");
    let drift = s["norm_drift"].as_f64().unwrap();
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 7);
        // values are printed to 12 significant digits
        assert!((cols[5] - 1.0).abs() <= drift + 1e-11);
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = spinchain(&["preset", "ccnot", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    for file in ["ccnot_trace.csv", "ccnot_summary.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn describe_output_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let described = spinchain(&["describe", "teleport"]);
    assert_eq!(code(&described), 0);
    let text = String::from_utf8(described.stdout).unwrap();
    assert!(text.contains("|110>"));
    let reparsed = spinchain::config::parse_spec(&text).unwrap();
    let preset = spinchain::config::Preset::Teleport.spec();
    assert_eq!(reparsed.pulses, preset.pulses);
    assert_eq!(reparsed.initial, preset.initial);
    assert_eq!(reparsed.register, preset.register);

    // a shorter program keeps the run cheap
    let dir_str = dir.path().to_str().unwrap();
    let cfg = dir.path().join("not.cfg");
    fs::write(&cfg, String::from_utf8(spinchain(&["describe", "not"]).stdout).unwrap()).unwrap();
    let from_file = dir.path().join("file");
    let from_preset = dir.path().join("preset");
    fs::create_dir_all(&from_file).unwrap();
    fs::create_dir_all(&from_preset).unwrap();
    assert_eq!(code(&spinchain(&["run", cfg.to_str().unwrap(), "--out", from_file.to_str().unwrap()])), 0);
    assert_eq!(code(&spinchain(&["preset", "not", "--out", from_preset.to_str().unwrap()])), 0);
    assert_eq!(summary(&from_file, "not"), summary(&from_preset, "not"), "in {dir_str}");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&spinchain(&["preset", "swap"])), 2);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "omega = [100]\nrabi = -1\ninitial = [1:1]\npulses = [1-2:2]\n").unwrap();
    let out = spinchain(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rabi"));

    fs::write(&cfg, "omega = [100]\nrabi = 0.1\ninitial = [1:1]\npulses = []\n").unwrap();
    assert_eq!(code(&spinchain(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.cfg");
    fs::write(&cfg, "omega = [100]\nrabi = 10\ninitial = [1:1]\npulses = [1-2:11141]\nstep = 100\n").unwrap();
    let out = spinchain(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn io_errors_exit_4() {
    assert_eq!(code(&spinchain(&["run", "/nonexistent/spec.cfg"])), 4);
    let file = tempfile::NamedTempFile::new().unwrap();
    let blocked = file.path().join("out");
    let out = spinchain(&["preset", "not", "--out", blocked.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains(blocked.to_str().unwrap()));
}

#[test]
fn converge_prints_a_row_per_step() {
    let out = spinchain(&["converge", "not", "--halvings", "2", "--step", "0.004"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().last().unwrap().ends_with("ok"));
    assert_eq!(code(&spinchain(&["converge", "not", "--halvings", "1"])), 2);
}
