use std::path::Path;
use std::process::{Command, Output};

use survnet::cli::{cmd_report, RunConfig};
use survnet::SelectionReport;

fn survnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_survnet"))
        .args(args)
        .current_dir(dir)
        .env_remove("SURVNET_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const SMALL: [&str; 6] = ["--n", "1000", "--p", "30", "--p-prime", "6"];

#[test]
fn simulate_is_byte_identical_for_one_seed() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let mut args = vec!["simulate", "--scheme", "dataset3", "--seed", "4", "--out", name];
        args.extend(SMALL);
        assert!(survnet(tmp.path(), &args).status.success());
    }
    let read = |n: &str| std::fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn select_then_evaluate_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["select", "--scheme", "dataset1", "--seed", "2", "--replicates", "2", "--out", "runs"];
    args.extend(SMALL);
    let out = survnet(tmp.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let run = tmp.path().join("runs/run_2");
    for f in ["config.toml", "history.csv", "importance.csv", "model.json", "selection.json"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    let history = std::fs::read_to_string(run.join("history.csv")).unwrap();
    let last = history.lines().last().unwrap();
    let eta_hat: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!(eta_hat <= 0.1);

    let report: SelectionReport =
        serde_json::from_str(&std::fs::read_to_string(run.join("selection.json")).unwrap()).unwrap();
    let eval = survnet(tmp.path(), &["evaluate", "--run", "runs/run_2"]);
    assert!(eval.status.success());
    let e: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(e["loss"].as_f64().unwrap(), report.final_.loss);

    // Rerunning from the saved config reproduces the run.
    let cfg = RunConfig::load(&run.join("config.toml")).unwrap();
    assert_eq!(cfg.seed, 2);

    std::fs::create_dir_all(tmp.path().join("runs/run_99")).unwrap();
    let table = cmd_report(&[tmp.path().join("runs")]).unwrap();
    assert_eq!(table.runs.len(), 2);
    assert_eq!(table.mean[4], Some(
        (report.selected.len() as f64
            + serde_json::from_str::<SelectionReport>(
                &std::fs::read_to_string(tmp.path().join("runs/run_3/selection.json")).unwrap(),
            )
            .unwrap()
            .selected
            .len() as f64)
            / 2.0,
    ));
    let printed = survnet(tmp.path(), &["report", "runs", "--out", "table.csv"]);
    assert!(printed.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("table.csv")).unwrap();
    assert!(csv.starts_with("statistic,initial_loss,final_loss,initial_error_pct,final_error_pct,n_original,n_significant,estimated_fdr,actual_fdr"));
}

#[test]
fn grid_data_gets_a_heatmap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = survnet(
        tmp.path(),
        &["select", "--scheme", "dataset2", "--n", "800", "--p", "100", "--p-prime", "10", "--seed", "1", "--out", "g"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let heat = std::fs::read_to_string(tmp.path().join("g/run_1/heatmap.csv")).unwrap();
    assert_eq!(heat.lines().count(), 10);
    assert!(heat.lines().all(|l| l.split(',').count() == 10));
}

#[test]
fn csv_input_uses_sidecar_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--scheme", "dataset1", "--seed", "6", "--out", "d.csv"];
    args.extend(SMALL);
    assert!(survnet(tmp.path(), &args).status.success());
    let out = survnet(tmp.path(), &["select", "--data", "d.csv", "--seed", "6", "--out", "r"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: SelectionReport =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r/run_6/selection.json")).unwrap()).unwrap();
    assert!(report.true_positives.is_some());
}

#[test]
fn seed_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_survnet"))
        .args(["simulate", "--scheme", "1", "--n", "50", "--p", "4", "--p-prime", "1", "--out", "e.csv"])
        .current_dir(tmp.path())
        .env("SURVNET_SEED", "17")
        .output()
        .unwrap();
    assert!(out.status.success());
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(side["spec"]["seed"], 17);
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "eta_star = 0.1\nnot_a_key = 1\n").unwrap();
    let out = survnet(tmp.path(), &["select", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));

    std::fs::write(tmp.path().join("broken.csv"), "a,y\n1,0\nx,1\n").unwrap();
    let out = survnet(tmp.path(), &["select", "--data", "broken.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let out = survnet(tmp.path(), &["select", "--eta-star", "1.5", "--n", "200", "--p", "5", "--p-prime", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
