use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgg-evo")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const GAME: [&str; 6] = ["--n", "10", "--b", "10", "--c", "5"];

fn with_game<'a>(cmd: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(GAME);
    v.extend(rest);
    v
}

#[test]
fn payoff_reports_the_worked_example() {
    let out = run(&with_game(
        "payoff",
        &["--delta", "0.9", "--epsilon", "0.05", "--incumbent-k", "9", "--focal-k", "9"],
    ));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 10.300_632).abs() < 1e-6);
    assert_eq!(v["config"]["n"], 10);
}

#[test]
fn payoff_with_oracle_and_exact_mode() {
    let v = json(&run(&with_game(
        "payoff",
        &["--delta", "0.9", "--epsilon", "0.05", "--incumbent-k", "9", "--focal-k", "10", "--oracle", "20000"],
    )));
    let oracle = &v["oracle"];
    let z = (oracle["mean"].as_f64().unwrap() - v["value"].as_f64().unwrap()) / oracle["std_error"].as_f64().unwrap();
    assert!(z.abs() < 4.0);
    let v = json(&run(&with_game(
        "payoff",
        &["--delta", "0.9", "--epsilon", "0.05", "--incumbent-k", "9", "--focal-k", "9", "--mode", "exact"],
    )));
    assert!(v["value"].as_f64().unwrap().is_finite());
}

#[test]
fn out_of_range_strategy_is_a_domain_error() {
    let out = run(&with_game(
        "payoff",
        &["--delta", "0.9", "--epsilon", "0.05", "--incumbent-k", "9", "--focal-k", "11"],
    ));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k out of range"));
    let out = run(&with_game("stability", &["--delta", "1.5", "--epsilon", "0.05", "--k", "9"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stability_verdicts() {
    let verdict = |eps: &str, k: &str| {
        json(&run(&with_game("stability", &["--delta", "0.9", "--epsilon", eps, "--k", k])))["verdict"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(verdict("0.05", "9"), "EvolutionarilyStable");
    assert_eq!(verdict("0", "9"), "NeutrallyStable");
    assert_eq!(verdict("0", "5"), "Unstable");
    assert_eq!(verdict("0.3", "9"), "Unstable");
}

#[test]
fn band_reports_edges_and_ordering() {
    let v = json(&run(&with_game("band", &["--delta", "0.9", "--k", "9"])));
    assert_eq!(v["eps_lower"], 0.0);
    assert!((v["eps_upper"].as_f64().unwrap() - 0.06813).abs() < 1e-4);
    let v = json(&run(&with_game("band", &["--delta", "0.99"])));
    let text = v.to_string();
    assert!(text.contains("\"ordered\":true"), "{text}");
}

#[test]
fn sweep_writes_csv_and_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curves.csv");
    let gp = dir.path().join("curves.gp");
    let out = run(&[
        "sweep", "--n", "10", "--deltas", "1,0.9,0.8", "--ks", "1,5,9", "--points", "200", "--b", "10", "--c", "5",
        "-o", csv.to_str().unwrap(), "--gnuplot", gp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,k,epsilon,Delta,threshold"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3 * 3 * 200);
    let unit: Vec<f64> = rows.iter().filter(|r| r[0] == 1.0 && r[1] == 5.0).map(|r| r[3]).collect();
    assert!(unit.windows(2).all(|w| w[1] < w[0]));
    assert!(std::fs::read_to_string(&gp).unwrap().contains("curves.csv"));
}

#[test]
fn config_files_set_defaults_and_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"n":10,"b":10,"c":5,"delta":0.9,"epsilon":0.05,"incumbent_k":9,"focal_k":10}"#).unwrap();
    let v = json(&run(&["payoff", "--config", good.to_str().unwrap()]));
    assert!((v["value"].as_f64().unwrap() - 8.55).abs() < 1e-9);
    let v = json(&run(&["payoff", "--config", good.to_str().unwrap(), "--focal-k", "9"]));
    assert!((v["value"].as_f64().unwrap() - 10.300_632).abs() < 1e-6);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n":10,"b":10,"c":5,"delta":0.9,"epsilon":0.05,"k":9,"colour":"red"}"#).unwrap();
    let out = run(&["stability", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_stable_across_thread_counts() {
    let args = [
        "simulate", "--population", "40", "--n", "10", "--b", "10", "--c", "5", "--delta", "0.9", "--epsilon", "0.05",
        "--selection", "1", "--mutation-rate", "0.01", "--generations", "30", "--episodes-per-generation", "2",
        "--seed", "4", "--initial", "9:30,5:10",
    ];
    let go = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pgg-evo")).args(args).env("PGG_EVO_THREADS", threads).output().unwrap()
    };
    let (a, b) = (go("1"), go("3"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("generation,k,frequency,mean_payoff\n"));
    assert_eq!(text.lines().count(), 1 + 30 * 11);
}

#[test]
fn validate_quick_passes() {
    let out = run(&["validate", "--quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().filter(|l| !l.contains("checks,")).all(|l| l.starts_with("PASS")), "{text}");
    assert!(text.contains(" 0 failed"));
}

#[test]
fn embedded_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [Vec<&str>; 2] = [
        with_game("stability", &["--delta", "0.9", "--epsilon", "0.05", "--k", "8"]),
        with_game(
            "simulate",
            &["--population", "20", "--delta", "0.9", "--epsilon", "0.05", "--selection", "1", "--mutation-rate",
              "0.01", "--generations", "5", "--seed", "2", "--format", "json"],
        ),
    ];
    for args in cases {
        let first = json(&run(&args));
        let path = dir.path().join(format!("{}.json", args[0]));
        std::fs::write(&path, first["config"].to_string()).unwrap();
        let second = json(&run(&[args[0], "--config", path.to_str().unwrap()]));
        assert_eq!(first, second, "{}", args[0]);
    }
}
