use std::process::{Command, Output};

const FIG3: [&str; 6] = ["--omega1", "0.1", "--omega2", "0.1", "--omega3", "0.1"];
const FIG4: [&str; 8] = ["--omega1", "0.3", "--omega2", "0.3", "--omega3", "0.0003", "--natoms", "1e4"];
const FIG5: [&str; 8] = ["--omega1", "0.3", "--omega2", "0.002", "--omega3", "0.002", "--natoms", "1000"];
const FIG6: [&str; 8] = ["--omega1", "0.3", "--omega2", "0.02", "--omega3", "0.0004", "--natoms", "5000"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anisobec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anisobec"))
        .env("RAYON_NUM_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn concat(a: &[&str], b: &[&'static str]) -> Vec<String> {
    a.iter().chain(b).map(|s| s.to_string()).collect()
}

fn run_v(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

fn value(csv: &str, key: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("missing {key} in\n{csv}"))
        .to_string()
}

#[test]
fn negative_frequency_is_a_validation_error() {
    let o = run(&["temps", "--omega1", "-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--omega1"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["temps", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn closed_form_t2_with_c2_is_inapplicable() {
    let mut args = concat(&["temps", "--c2", "2", "--mode", "closed_form"], &FIG5);
    let o = run_v(args.clone());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    args[4] = "full_solve".into();
    let o = run_v(args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = run(&["temps", "--out", "/nonexistent-dir/sub/x.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn verify_fails_on_impossible_tolerance() {
    let o = run(&["verify", "--oracle-tol", "1e-15", "--oracle-temps", "0.3", "--points", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL oracle"));
}

#[test]
fn verify_passes_on_maximal_trap_with_advisory() {
    let args = concat(&["verify", "--oracle-temps", "0.05", "--tmin", "0.01", "--tmax", "0.4", "--points", "20"], &FIG6);
    let o = run_v(args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("ADVISORY"));
    assert!(stderr(&o).contains("advisory:"));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn verify_json_report() {
    let o = run(&["verify", "--oracle-temps", "0.5", "--points", "10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn sweep_csv_shape() {
    let o = run(&["sweep", "--points", "1", "--tmin", "0.5", "--tmax", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,phi,z,frac0,frac1,frac2,frac3,eird,x1,x2,x3,xi_ratio");
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), 12);
}

#[test]
fn log_grid_is_geometric() {
    let o = run(&["sweep", "--points", "3", "--tmin", "0.1", "--tmax", "1", "--log"]);
    assert!(o.status.success());
    let ts: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ts.len(), 3);
    assert!((ts[1] - 0.1f64.sqrt()).abs() < 1e-12);
}

#[test]
fn sweep_writes_sidecar_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["sweep", "--points", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "sweep");
    assert_eq!(meta["config"]["natoms"], 1000.0);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig4.json");
    std::fs::write(&cfg, r#"{"omega1": 0.3, "omega2": 0.3, "omega3": 0.0003, "natoms": 10000}"#).unwrap();
    let o = run(&["temps", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "predicted_label"), "TwoStep");
    let o = run(&["temps", "--config", cfg.to_str().unwrap(), "--omega2", "0.0003"]);
    assert_eq!(value(&stdout(&o), "regime"), "oblate");
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = concat(&["sweep", "--points", "40"], &FIG4);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let a = run_with(&refs, "1");
    let b = run_with(&refs, "4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_sweep_round_trips() {
    let o = run(&["sweep", "--points", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs[0]["T"].as_f64().unwrap() > 0.0);
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn temps_two_step_trap() {
    let o = run(&[&["temps"][..], &FIG4].concat());
    assert!(o.status.success());
    let s = stdout(&o);
    let t3: f64 = value(&s, "t3d_star").parse().unwrap();
    let t1: f64 = value(&s, "t1d_star").parse().unwrap();
    assert!((t3 - 0.61).abs() < 5e-3, "{t3}");
    assert!((t1 - 0.34).abs() < 5e-3, "{t1}");
    assert_eq!(value(&s, "in_window"), "true");
    assert_eq!(value(&s, "predicted_label"), "TwoStep");
}

#[test]
fn temps_isotropic_trap() {
    let o = run(&[&["temps"][..], &FIG3].concat());
    let s = stdout(&o);
    let t3: f64 = value(&s, "t3d").parse().unwrap();
    assert!((t3 - 0.94).abs() < 5e-3);
    assert_eq!(value(&s, "regime"), "isotropic");
    assert_eq!(value(&s, "predicted_label"), "DirectBEC");
}

fn labels(csv: &str) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect()
}

#[test]
fn phase_diagram_contains_all_scenarios() {
    let o = run(&["phase-diagram", "--zeta-as-one"]);
    assert!(o.status.success());
    let ls = labels(&stdout(&o));
    assert_eq!(ls.len(), 2500);
    for want in ["DirectBEC", "TwoStep", "TwoDimensionalBEC", "ThreeStepReduction"] {
        assert!(ls.iter().any(|l| l == want), "no {want} cell");
    }
}

#[test]
fn phase_diagram_small_grids() {
    let o = run(&["phase-diagram", "--r12-max", "1", "--r12-points", "1", "--r23-max", "1", "--r23-points", "1"]);
    assert_eq!(labels(&stdout(&o)), vec!["DirectBEC"]);
    let o = run(&[
        "phase-diagram",
        "--zeta-as-one",
        "--r12-max",
        "1",
        "--r12-points",
        "1",
        "--r23-max",
        "1000",
        "--r23-points",
        "4",
    ]);
    let ls = labels(&stdout(&o));
    assert_eq!(ls.len(), 4);
    assert_eq!(ls[0], "DirectBEC");
    assert_eq!(ls[3], "TwoStep");
}

#[test]
fn scan_k3_reverses_ordering() {
    let o = run(&["scan-k3", "--k3-points", "7"]);
    assert!(o.status.success());
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    let (first, last) = (&rows[0], &rows[6]);
    assert!(first[3] < first[2] && first[2] < first[1]);
    assert!(last[1] < last[2] && last[2] < last[3]);
}

#[test]
fn similarity_reports_spread() {
    let args = concat(&["similarity", "--points", "60", "--tmin", "0.005", "--tmax", "0.4", "--log"], &FIG6);
    let o = run_v(args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("d,t_star,reduced_T,fraction\n"));
    assert!(stderr(&o).contains("spread:"));
}
