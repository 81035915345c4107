use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn salesboost(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salesboost"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn small_data(dir: &Path) {
    fs::write(dir.join("spec.json"), r#"{"n_products": 200, "seed": 3}"#).unwrap();
    let out = salesboost(&["synth", "--spec", "spec.json", "--out", "data.csv"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_train_predict() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    small_data(dir);
    fs::write(
        dir.join("train.json"),
        r#"{"model": {"kind": "xgboost", "n_trees": 20}, "target_mode": {"mode": "binned_range"}}"#,
    )
    .unwrap();
    let out = salesboost(
        &[
            "train",
            "--data",
            "data.csv",
            "--config",
            "train.json",
            "--model-out",
            "model.json",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = salesboost(
        &[
            "predict",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--out",
            "preds.csv",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let preds = fs::read_to_string(dir.join("preds.csv")).unwrap();
    let lines: Vec<&str> = preds.lines().collect();
    assert_eq!(lines[0], "prediction,range");
    assert_eq!(lines.len(), 201);
    let (value, label) = lines[1].split_once(',').unwrap();
    assert!(value.parse::<f64>().unwrap().is_finite());
    assert!(label.contains('-'));
}

#[test]
fn bare_hyperparameters_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    small_data(dir);
    fs::write(dir.join("train.json"), r#"{"n_trees": 3, "max_depth": 2}"#).unwrap();
    let out = salesboost(
        &[
            "train",
            "--data",
            "data.csv",
            "--config",
            "train.json",
            "--model-out",
            "m.json",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("m.json")).unwrap()).unwrap();
    assert_eq!(doc["trees"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_writes_report_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    fs::write(
        dir.join("exp.json"),
        r#"{
            "data": {"source": "synthetic", "spec": {"n_products": 200}},
            "target_mode": {"mode": "binned_range"},
            "roster": [
                {"name": "XGBoost", "model": {"kind": "xgboost", "n_trees": 10}},
                {"name": "Linear", "model": {"kind": "ols"}}
            ]
        }"#,
    )
    .unwrap();
    let out = salesboost(
        &["compare", "--experiment", "exp.json", "--out", "r.csv"],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("r.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "Model,MSE,RMSE,MAE,Error");
    assert!(lines[1].starts_with("XGBoost,"));
    assert!(lines[2].starts_with("Linear,"));

    let out = salesboost(
        &["--threads", "2", "compare", "--experiment", "exp.json"],
        dir,
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Model\tMSE\tRMSE\tMAE\n"));
}

#[test]
fn bins_show() {
    let dir = tempfile::tempdir().unwrap();
    let out = salesboost(&["bins", "--show"], dir.path());
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["labels"].as_array().unwrap().len(), 8);
    assert_eq!(code(&salesboost(&["bins"], dir.path())), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    fs::write(dir.join("bad.json"), r#"{"roster": []}"#).unwrap();
    assert_eq!(
        code(&salesboost(&["compare", "--experiment", "bad.json"], dir)),
        2
    );
    fs::write(dir.join("typo.json"), r#"{"n_tres": 3}"#).unwrap();
    small_data(dir);
    let out = salesboost(
        &[
            "train",
            "--data",
            "data.csv",
            "--config",
            "typo.json",
            "--model-out",
            "m.json",
        ],
        dir,
    );
    assert_eq!(code(&out), 2);

    fs::write(dir.join("broken.csv"), "Products,Brand\nmice,A\n").unwrap();
    let out = salesboost(
        &["train", "--data", "broken.csv", "--model-out", "m.json"],
        dir,
    );
    assert_eq!(code(&out), 3);

    fs::write(dir.join("junk.json"), "{}").unwrap();
    let out = salesboost(
        &[
            "predict",
            "--model",
            "junk.json",
            "--data",
            "data.csv",
            "--out",
            "p.csv",
        ],
        dir,
    );
    assert_eq!(code(&out), 4);
}
