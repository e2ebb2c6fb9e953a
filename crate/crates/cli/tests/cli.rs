use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = r#"{"motor": {"rated_power": 11185.5, "rated_voltage_line": 96.0, "pole_count": 2,
  "rated_speed": 1800.0, "max_speed": 9000.0, "stator_slots": 18, "rotor_slots": 13,
  "stator_slot_shape": "rectangular", "rotor_slot_shape": "rectangular", "phases": 3},
  "optimizer": {"start_fractions": [0.5]}}"#;

fn evim(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evim"));
    cmd.args(args).current_dir(dir);
    match threads {
        Some(t) => cmd.env("EVIM_THREADS", t),
        None => cmd.env_remove("EVIM_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn optimize_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
    let o = evim(
        &["optimize", "--spec", "spec.json", "--trace", "trace.csv"],
        dir.path(),
        Some("1"),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["feasible"], true);
    let eta = v["efficiency"].as_f64().unwrap();

    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header = trace.lines().next().unwrap();
    assert!(
        header.starts_with("start,iteration,move,step_fraction,objective,stator_inner_diameter")
    );
    assert_eq!(header.split(',').count(), 16);

    std::fs::write(dir.path().join("d.json"), v["design"].to_string()).unwrap();
    let o = evim(
        &["evaluate", "--spec", "spec.json", "--design", "d.json"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 0);
    let e: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(e["report"]["efficiency"].as_f64().unwrap(), eta);
    assert_eq!(e["constraints"]["feasible"], true);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SPEC.replace("\"pole_count\": 2", "\"pole_count\": 3");
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let o = evim(&["optimize", "--spec", "bad.json"], dir.path(), None);
    assert_eq!(code(&o), 2);

    std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
    std::fs::write(dir.path().join("d.json"), r#"{"core_length": 0.1}"#).unwrap();
    let o = evim(
        &["evaluate", "--spec", "spec.json", "--design", "d.json"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 2);

    let o = evim(
        &["optimize", "--spec", "spec.json"],
        dir.path(),
        Some("zero"),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn unevaluable_design_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
    // slots deeper than the rotor radius
    let d = r#"{"stator_inner_diameter": 0.06, "core_length": 0.1, "stator_slot_width": 0.005,
      "stator_slot_depth": 0.02, "rotor_slot_width": 0.004, "rotor_slot_depth": 0.05,
      "stator_yoke_depth": 0.02, "rotor_yoke_depth": 0.01, "airgap_length": 0.0005,
      "end_ring_cross_section": 0.0003, "airgap_flux_density": 0.6}"#;
    std::fs::write(dir.path().join("d.json"), d).unwrap();
    let o = evim(
        &["evaluate", "--spec", "spec.json", "--design", "d.json"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["infeasible"]["stage"], "geometry");
}

#[test]
fn study_writes_tables_and_table_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"pole_counts": [2], "rotor_slot_shapes": ["rectangular"], "rated_speeds": [1800],
      "optimizer": {"start_fractions": [0.5]}}"#;
    std::fs::write(dir.path().join("study.json"), cfg).unwrap();
    let o = evim(
        &["study", "--config", "study.json", "--out", "out"],
        dir.path(),
        Some("2"),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["study.json", "table.csv", "table.txt"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let o = evim(
        &["table", "--study", "out", "--format", "csv"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        csv,
        std::fs::read_to_string(dir.path().join("out/table.csv")).unwrap()
    );
    assert!(csv.starts_with("parameter,2p rect-rect 1800\n"));

    let o = evim(
        &["table", "--study", "out", "--format", "xml"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn study_with_no_feasible_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"pole_counts": [2], "rotor_slot_shapes": ["rectangular"], "rated_speeds": [1800],
      "constraints": {"min_power_factor": {"bound": 0.999}},
      "optimizer": {"start_fractions": [0.5], "max_evaluations": 300, "max_penalty_doublings": 0}}"#;
    std::fs::write(dir.path().join("study.json"), cfg).unwrap();
    let o = evim(
        &["study", "--config", "study.json", "--out", "out"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 3);
    assert!(dir.path().join("out/table.csv").exists());
}

#[test]
fn empty_speed_list_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("study.json"), r#"{"rated_speeds": []}"#).unwrap();
    let o = evim(
        &["study", "--config", "study.json", "--out", "out"],
        dir.path(),
        None,
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
