//! End-to-end CLI flows over the shipped sample data: report contents,
//! exit codes, round-trips of every emitted format, and the seed
//! environment fallback (exercised through the real binary).

use std::fs;
use std::path::Path;
use std::process::Command;

use millrun::cli::run_from;
use millrun::io;

fn data(file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> i32 {
    run_from(std::iter::once("millrun").chain(args.iter().copied()))
}

struct Paths {
    demand: String,
    orders: String,
    plant: String,
    cfg: String,
    spec: String,
}

fn paths() -> Paths {
    Paths {
        demand: data("demand_2013.csv"),
        orders: data("orders_example.csv"),
        plant: data("plant.csv"),
        cfg: data("plant.cfg"),
        spec: data("scenario.json"),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_the_2013_statistics() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("analysis.json");
    let code = run(&["analyze", "--input", &p.demand, "--out", path_str(&out)]);
    assert_eq!(code, 0);
    let report = io::read_analysis_json(&out).unwrap();
    assert!((report.mu - 397_058.0).abs() <= 1.0);
    assert!((report.sigma - 71_078.0).abs() <= 1.0);
    assert!((report.ad_p.unwrap() - 0.609).abs() <= 0.05);
    assert!(report.d_ins.is_none(), "no sales column in the sample data");
}

#[test]
fn forecast_writes_ranking_and_fitted_values() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("forecast.json");
    let code = run(&[
        "forecast",
        "--input",
        &p.demand,
        "--grid",
        "--report",
        path_str(&report_path),
    ]);
    assert_eq!(code, 0);

    let report = io::read_forecast_json(&report_path).unwrap();
    // 12 points: winters cannot fit, the other five families can.
    assert_eq!(report.models.len(), 5);
    assert!(report.models.windows(2).all(|w| w[0].mape <= w[1].mape));

    let fitted = io::read_fitted_csv(&dir.path().join("forecast_fitted.csv")).unwrap();
    assert_eq!(fitted.len(), 12);
    assert_eq!(fitted[0].0, "2013-01");
    assert_eq!(fitted[0].1, 435_536.0);
}

#[test]
fn capacity_csv_round_trips() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("capacity.csv");
    let code = run(&[
        "capacity",
        "--plant",
        &p.plant,
        "--config",
        &p.cfg,
        "--n-max",
        "120",
        "--demand",
        &p.demand,
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let rows = io::read_capacity_csv(&out).unwrap();
    assert_eq!(rows.len(), 121);
    assert!(rows[0].available_kg > rows[120].available_kg);
    assert_eq!(rows[0].required_max_kg, Some(535_150.0));
}

#[test]
fn schedule_round_trips_and_enforces_full_service() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("schedule.json");
    let code = run(&[
        "schedule",
        "--orders",
        &p.orders,
        "--plant",
        &p.plant,
        "--config",
        &p.cfg,
        "--method",
        "local",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let result = io::read_schedule_json(&out).unwrap();
    assert!(result.evaluation.verdict.feasible);
    assert_eq!(result.order_ids.len(), 6);

    // The sample month cannot be fully served inside 84 pallets.
    let strict = dir.path().join("strict.json");
    let code = run(&[
        "schedule",
        "--orders",
        &p.orders,
        "--plant",
        &p.plant,
        "--config",
        &p.cfg,
        "--method",
        "oracle",
        "--require-full-service",
        "--out",
        path_str(&strict),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn scenario_csv_round_trips() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let code = run(&[
        "scenario",
        "--spec",
        &p.spec,
        "--plant",
        &p.plant,
        "--config",
        &p.cfg,
        "--method",
        "greedy",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let cells = io::read_scenario_csv(&out).unwrap();
    assert_eq!(cells.len(), 24);
    assert!(cells.iter().all(|c| c.unserved.is_some()));
    // 84 and 144 pallets at the sample plant's 2000 kg per pallet.
    assert_eq!(cells[0].a_kg, 168_000.0);
    assert_eq!(cells[1].a_kg, 288_000.0);
}

#[test]
fn repeated_seed_flag_warns_and_last_wins() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let last = dir.path().join("last.json");
    let repeated = dir.path().join("repeated.json");
    for (out, seeds) in [(&last, vec!["9"]), (&repeated, vec!["3", "9"])] {
        let mut args = vec![
            "schedule", "--orders", &p.orders, "--plant", &p.plant, "--config", &p.cfg, "--method",
            "local",
        ];
        for s in seeds {
            args.push("--seed");
            args.push(s);
        }
        let out_str = path_str(out);
        args.push("--out");
        args.push(out_str);
        assert_eq!(run(&args), 0);
    }
    assert_eq!(fs::read(&last).unwrap(), fs::read(&repeated).unwrap());
}

#[test]
fn env_seed_fallback_through_the_binary() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let by_flag = dir.path().join("flag.json");
    let by_env = dir.path().join("env.json");
    let base = [
        "schedule", "--orders", &p.orders, "--plant", &p.plant, "--config", &p.cfg, "--method",
        "local",
    ];

    let status = Command::new(env!("CARGO_BIN_EXE_millrun"))
        .args(base)
        .args(["--seed", "123", "--out", path_str(&by_flag)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let status = Command::new(env!("CARGO_BIN_EXE_millrun"))
        .args(base)
        .args(["--out", path_str(&by_env)])
        .env("MILLRUN_SEED", "123")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    assert_eq!(fs::read(&by_flag).unwrap(), fs::read(&by_env).unwrap());
}

#[test]
fn scenario_seed_override_changes_the_split() {
    let p = paths();
    let dir = tempfile::tempdir().unwrap();
    let default_seed = dir.path().join("default.csv");
    let overridden = dir.path().join("override.csv");
    let base = [
        "scenario", "--spec", &p.spec, "--plant", &p.plant, "--config", &p.cfg, "--method",
        "greedy",
    ];
    let mut args = base.to_vec();
    let out1 = path_str(&default_seed);
    args.extend(["--out", out1]);
    assert_eq!(run(&args), 0);

    let mut args = base.to_vec();
    let out2 = path_str(&overridden);
    args.extend(["--seed", "99", "--out", out2]);
    assert_eq!(run(&args), 0);

    assert_ne!(
        fs::read(&default_seed).unwrap(),
        fs::read(&overridden).unwrap()
    );
}
