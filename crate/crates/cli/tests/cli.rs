use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mppdp::scenario::{poc_instance, ScenarioConfig, Spatial, TwRegime};

fn mppdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mppdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_scenario(dir: &Path, n_sd: usize, seed: u64) -> PathBuf {
    let mut cfg =
        ScenarioConfig::new(Spatial::Clustered, TwRegime::Tight, n_sd, seed).with_requests(3, 3);
    cfg.fleet.kappa = 3;
    let config = dir.join(format!("cfg{n_sd}_{seed}.json"));
    std::fs::write(&config, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.join(format!("gen{n_sd}_{seed}"));
    let o = mppdp(&["generate", "--config", p(&config), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
    let file = manifest
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .to_string();
    out.join(file)
}

const QUICK: &[&str] = &["--max-iterations", "300"];

#[test]
fn generate_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = small_scenario(dir.path(), 2, 3);
    let sol = dir.path().join("best.json");
    let report = dir.path().join("report.csv");
    let mut args = vec![
        "solve",
        p(&inst),
        "--seed",
        "5",
        "--ensemble",
        "3",
        "--out",
        p(&sol),
        "--report",
        p(&report),
    ];
    args.extend_from_slice(QUICK);
    let o = mppdp(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&report).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 + 2);
    assert!(csv.lines().any(|l| l.contains(",mean,")));

    let o = mppdp(&["verify", p(&inst), p(&sol)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("feasible"));
}

#[test]
fn tampered_solution_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let inst = small_scenario(dir.path(), 0, 4);
    let sol = dir.path().join("best.json");
    let mut args = vec!["solve", p(&inst), "--seed", "1", "--out", p(&sol)];
    args.extend_from_slice(QUICK);
    assert!(mppdp(&args).status.success());

    let mut json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let route = &mut json["routes"][0];
    let visits = route["visits"].as_array_mut().unwrap();
    let n = visits.len();
    // Swap a pickup with its destination neighbour so precedence breaks.
    visits.swap(1, n - 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.to_string()).unwrap();
    let o = mppdp(&["verify", p(&inst), p(&bad)]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn traces_are_written_per_run_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = small_scenario(dir.path(), 1, 6);
    for tag in ["a", "b"] {
        let trace = dir.path().join(format!("{tag}.csv"));
        let mut args = vec![
            "solve",
            p(&inst),
            "--seed",
            "9",
            "--ensemble",
            "2",
            "--trace",
            p(&trace),
        ];
        args.extend_from_slice(QUICK);
        assert!(mppdp(&args).status.success());
    }
    for run in 0..2 {
        let a = std::fs::read(dir.path().join(format!("a.run{run}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b.run{run}.csv"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn oracle_and_milp_round_trip_on_reference_network() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("poc.json");
    std::fs::write(&inst, poc_instance(1).unwrap().to_json()).unwrap();
    let sol = dir.path().join("oracle.json");
    let o = mppdp(&["oracle", p(&inst), "--out", p(&sol)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let objective: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(objective["b1"], 1);
    assert_eq!(objective["b5"], 1);
    assert_eq!(mppdp(&["verify", p(&inst), p(&sol)]).status.code(), Some(0));

    let lp = dir.path().join("poc.lp");
    assert!(mppdp(&["export-milp", p(&inst), "--out", p(&lp)])
        .status
        .success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\") || text.contains("Minimize"));

    let o = mppdp(&["export-milp", p(&inst), "--out", p(&lp), "--node-cap", "3"]);
    assert_eq!(o.status.code(), Some(2));

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let imported = dir.path().join("imp.json");
    let o = mppdp(&[
        "import-solution",
        p(&inst),
        p(&empty),
        "--out",
        p(&imported),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&imported).unwrap()).unwrap();
    assert!(json["routes"].as_array().unwrap().is_empty());

    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, "x_1_2_0 0.5\n").unwrap();
    let o = mppdp(&[
        "import-solution",
        p(&inst),
        p(&broken),
        "--out",
        p(&imported),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_without_requests() {
    let dir = tempfile::tempdir().unwrap();
    let inst = small_scenario(dir.path(), 0, 2);
    let mut spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    spec["requests"] = serde_json::json!([]);
    let empty = dir.path().join("none.json");
    std::fs::write(&empty, spec.to_string()).unwrap();
    let o = mppdp(&["oracle", p(&empty)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let objective: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(objective["total"], 0.0);
}

#[test]
fn compare_aggregates_reports() {
    let dir = tempfile::tempdir().unwrap();
    let conv = small_scenario(dir.path(), 0, 8);
    let multi = small_scenario(dir.path(), 2, 8);
    let mut reports = Vec::new();
    for (id, inst) in [("c", &conv), ("m", &multi)] {
        let report = dir.path().join(format!("{id}.csv"));
        let mut args = vec![
            "solve",
            p(inst),
            "--ensemble",
            "2",
            "--seed",
            "3",
            "--scenario-id",
            id,
            "--report",
            p(&report),
        ];
        args.extend_from_slice(QUICK);
        assert!(mppdp(&args).status.success());
        reports.push(report);
    }
    let manifest = dir.path().join("manifest.csv");
    std::fs::write(
        &manifest,
        "scenario_id,spatial,tw,n_sd,seed,file\nc,clustered,tight,0,8,a.json\nm,clustered,tight,2,8,b.json\n",
    )
    .unwrap();
    let o = mppdp(&[
        "compare",
        "--manifest",
        p(&manifest),
        p(&reports[0]),
        p(&reports[1]),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 3);

    let o = mppdp(&["compare", "--manifest", p(&manifest), p(&reports[0])]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains('m'));
}

#[test]
fn schema_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"not\": \"an instance\"}").unwrap();
    assert_eq!(mppdp(&["solve", p(&bad)]).status.code(), Some(2));
    assert_eq!(mppdp(&["verify", p(&bad), p(&bad)]).status.code(), Some(2));
}
