use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_silversplit"))
        .args(args)
        .env_remove("SILVERSPLIT_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn small_p_is_a_config_error() {
    let o = run(&["--p", "2.5", "dominance", "--eps", "1e-4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p = 2.5"));
    let o = run(&["--p", "2.5", "--allow-small-p", "dominance", "--eps", "1e-4"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bad_rho_and_unknown_flags_exit_two() {
    assert_eq!(run(&["--rho", "0", "dominance", "--eps", "1e-4"]).status.code(), Some(2));
    assert_eq!(run(&["dominance", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["dominance", "--eps", "-1"]).status.code(), Some(2));
}

#[test]
fn dominance_csv_layout() {
    let o = run(&["dominance", "--eps", "1e-4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let head: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(head[..3], ["eps", "n", "h1"]);
    assert!(head.contains(&"S5".to_string()) && head.contains(&"ln_L_S1".to_string()));
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let h: Vec<f64> = (2..7).map(|i| rows[0][i].parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(&rows[0][7], "-2,5");
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--eps-min", "1e-5", "--eps-max", "1e-4", "--points", "4", "--log"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dom.json");
    let o = run(&["--format", "json", "-o", path.to_str().unwrap(), "dominance", "--eps", "3e-5"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["ranked"].as_array().unwrap().len(), 5);
}

#[test]
fn critical_points_at_a_transition() {
    // eps^_5 = 16 D0 / lambda^24 with D0 = (pi / 4)^2
    let lambda = 1.0 + 2f64.sqrt();
    let eps = 16.0 * (std::f64::consts::PI / 4.0).powi(2) / lambda.powi(24);
    let o = run(&["critical-points", "--eps", &eps.to_string()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let head = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| row[head.iter().position(|h| h == name).unwrap()].to_string();
    let q: f64 = col("Q").parse().unwrap();
    let qt: f64 = col("Qt").parse().unwrap();
    // limit values, approached at finite n
    assert!((q - 1.0 / (1.0 + lambda * lambda)).abs() < 2e-3);
    assert!((qt - 0.5).abs() < 2e-3);
    for j in 1..=4 {
        assert_eq!(col(&format!("flag_{j}")), "ok");
        let ln_det: f64 = col(&format!("ln_abs_det_{j}")).parse().unwrap();
        assert!(ln_det.is_finite());
    }
}

#[test]
fn phase_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phases.json");
    std::fs::write(&path, r#"{"mode": "random", "seed": 7, "check46": true}"#).unwrap();
    let o = run(&["--phases", path.to_str().unwrap(), "critical-points", "--eps", "3e-5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let dtau: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(dtau != 0.0);

    std::fs::write(&path, "not json").unwrap();
    let o = run(&["--phases", path.to_str().unwrap(), "critical-points", "--eps", "3e-5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_agrees() {
    let o = run(&["oracle", "--samples", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn verify_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&["verify", "--only", "1,2,3", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("PASS")).count(), 3);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn figure_tables_have_expected_columns() {
    let o = run(&["figure-data", "h-curves", "--points", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("ln_eps_periods,ln_eps,h1,h2,h3"));
    assert_eq!(text.lines().count(), 12);
    let o = run(&["figure-data", "gk-curves", "--points", "3"]);
    let head = stdout(&o).lines().next().unwrap().to_string();
    assert!(head.contains("gstar_1_4") && head.contains("g_3_6"));
}
