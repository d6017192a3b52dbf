mod support;

use std::fs;
use std::path::Path;

use support::{files_below, path_str, run_ok, seer};

/// Two kernels: SLOW has no preprocessing, FAST pays 10 s once and runs at
/// half the cost, so FAST wins from k = 21 on.
fn write_crossover_tables(dir: &Path, collection_time: f64) {
    fs::create_dir_all(dir).unwrap();
    let mut el = String::from("name,SLOW,FAST\n");
    let mut pre = String::from("name,SLOW,FAST\n");
    let mut meta = String::from("name,rows,cols,nnz,max_density,min_density,mean_density,var_density,collection_time\n");
    for i in 0..6 {
        el.push_str(&format!("m{i},1,0.5\n"));
        pre.push_str(&format!("m{i},0,10\n"));
        meta.push_str(&format!("m{i},{},{},{},0.5,0.01,0.1,0.001,{collection_time}\n", 100 + i, 100 + i, 500 * (i + 1)));
    }
    fs::write(dir.join("elapsed.csv"), el).unwrap();
    fs::write(dir.join("preprocess.csv"), pre).unwrap();
    fs::write(dir.join("metadata.csv"), meta).unwrap();
}

/// Known features are identical across rows; only max_density tells the
/// kernels apart, and collection is nearly free.
fn write_density_tables(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let mut el = String::from("name,A,B\n");
    let mut pre = String::from("name,A,B\n");
    let mut meta = String::from("name,rows,cols,nnz,max_density,min_density,mean_density,var_density,collection_time\n");
    for i in 0..8 {
        let dense = i % 2 == 0;
        el.push_str(&format!("m{i},{},{}\n", if dense { 1.0 } else { 3.0 }, if dense { 3.0 } else { 1.0 }));
        pre.push_str(&format!("m{i},0,0\n"));
        let max = if dense { 0.9 } else { 0.1 };
        meta.push_str(&format!("m{i},4,4,8,{max},0.1,0.5,0.01,1e-9\n"));
    }
    fs::write(dir.join("elapsed.csv"), el).unwrap();
    fs::write(dir.join("preprocess.csv"), pre).unwrap();
    fs::write(dir.join("metadata.csv"), meta).unwrap();
}

fn write_mtx(path: &Path, rows: usize, per_row: usize) {
    let mut s = format!("%%MatrixMarket matrix coordinate real general\n{rows} {rows} {}\n", rows * per_row);
    for r in 0..rows {
        for j in 0..per_row {
            s.push_str(&format!("{} {} 1.5\n", r + 1, (r + j) % rows + 1));
        }
    }
    fs::write(path, s).unwrap();
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = seer().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn features_writes_one_row_per_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let mats = tmp.path().join("mats");
    fs::create_dir(&mats).unwrap();
    for (i, n) in [5, 9, 13].iter().enumerate() {
        write_mtx(&mats.join(format!("m{i}.mtx")), *n, 2);
    }
    fs::write(mats.join("notes.txt"), "ignored").unwrap();
    let out = tmp.path().join("out");
    run_ok(&["features", "--matrices", path_str(&mats), "--fixed-clock", "--out", path_str(&out)]);
    let meta = fs::read_to_string(out.join("metadata.csv")).unwrap();
    let lines: Vec<&str> = meta.lines().collect();
    assert_eq!(lines.len(), 4, "{meta}");
    assert!(lines[0].starts_with("name,rows,cols,nnz,"));
    assert!(lines[1].starts_with("m0,5,5,10,"));
    assert!(lines[3].ends_with(",1e-6"), "{}", lines[3]);
}

#[test]
fn features_on_empty_directory_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let mats = tmp.path().join("empty");
    fs::create_dir(&mats).unwrap();
    let out = seer()
        .args(["features", "--matrices", path_str(&mats), "--out", path_str(tmp.path())])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let meta = fs::read_to_string(tmp.path().join("metadata.csv")).unwrap();
    assert_eq!(meta.lines().count(), 1);
}

#[test]
fn depth_zero_trees_score_the_majority_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_density_tables(&data);
    let out = tmp.path().join("model");
    run_ok(&[
        "train", "--data", path_str(&data), "--max-depth", "0", "--split", "0.9", "--out", path_str(&out),
    ]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("train_summary.json")).unwrap()).unwrap();
    // labels split 4/4, so whichever row is held out the majority covers 4 of 7
    assert_eq!(summary["n_train"], 7);
    assert_eq!(summary["train"]["known"], 4.0 / 7.0);
    assert_eq!(summary["train"]["gathered"], 4.0 / 7.0);
}

#[test]
fn missing_metadata_is_named_in_the_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_crossover_tables(&data, 1.0);
    fs::remove_file(data.join("metadata.csv")).unwrap();
    let (code, err) = exit_code(&["train", "--data", path_str(&data), "--out", path_str(tmp.path())]);
    assert_ne!(code, 0);
    assert!(err.contains("metadata.csv"), "{err}");
}

#[test]
fn costly_collection_keeps_the_known_path() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_crossover_tables(&data, 1e3);
    let model_dir = tmp.path().join("model");
    run_ok(&["train", "--data", path_str(&data), "--iterations", "1,30", "--out", path_str(&model_dir)]);
    let model = model_dir.join("model.json");
    let out = run_ok(&[
        "predict", "--model", path_str(&model), "--features", "rows=100,cols=100,nnz=500", "--iterations", "1,30",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iterations,kernel,path,charged_overhead,inference_time");
    let row1: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&row1[..4], ["1", "SLOW", "known", "0.0"]);
    assert!(lines[2].starts_with("30,FAST,known,0.0,"));
}

#[test]
fn gathered_path_charges_collection_on_a_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_density_tables(&data);
    let model_dir = tmp.path().join("model");
    run_ok(&["train", "--data", path_str(&data), "--split", "0.9", "--out", path_str(&model_dir)]);
    // pin the selector to a single gathered leaf
    let path = model_dir.join("model.json");
    let mut bundle: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(bundle["selector_classes"][1], "gathered");
    bundle["selector_tree"]["nodes"] = serde_json::json!([{ "kind": "leaf", "class": 1 }]);
    fs::write(&path, serde_json::to_string(&bundle).unwrap()).unwrap();
    let mtx = tmp.path().join("dense.mtx");
    write_mtx(&mtx, 4, 3);
    let out = run_ok(&[
        "predict", "--model", path_str(&model_dir.join("model.json")), "--matrix", path_str(&mtx), "--fixed-clock",
    ]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "gathered");
    assert_eq!(row[3], "1e-6", "{text}");
    // 3 entries in each row of 4: max density 0.75, above the learned 0.5
    assert_eq!(row[1], "A");
}

#[test]
fn iteration_sweep_switches_kernel_exactly_once() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_crossover_tables(&data, 1e3);
    let model_dir = tmp.path().join("model");
    run_ok(&["train", "--data", path_str(&data), "--iterations", "1..32", "--split", "0.9", "--out", path_str(&model_dir)]);
    let out = run_ok(&[
        "predict", "--model", path_str(&model_dir.join("model.json")), "--features", "rows=103,cols=103,nnz=2000",
        "--iterations", "1..32",
    ]);
    let kernels: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(kernels.len(), 32);
    let switches: Vec<usize> = (1..kernels.len()).filter(|&i| kernels[i] != kernels[i - 1]).collect();
    assert_eq!(switches, vec![20], "{kernels:?}");
    assert_eq!(kernels[0], "SLOW");
    assert_eq!(kernels[20], "FAST");
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let t = path_str(tmp.path());

    assert_eq!(exit_code(&["train", "--out", t]).0, 2, "no data source");
    assert_eq!(exit_code(&["no-such-command"]).0, 2);

    let bad = tmp.path().join("bad");
    write_crossover_tables(&bad, 1.0);
    fs::write(bad.join("elapsed.csv"), "name,SLOW,FAST\nm0,abc,1\n").unwrap();
    assert_eq!(exit_code(&["train", "--data", path_str(&bad), "--out", t]).0, 3, "bad number");

    let schema = tmp.path().join("schema");
    write_crossover_tables(&schema, 1.0);
    fs::write(schema.join("metadata.csv"), "name,max_density,collection_time\nm0,1,1\n").unwrap();
    assert_eq!(exit_code(&["train", "--data", path_str(&schema), "--out", t]).0, 4, "missing column");

    let empty = tmp.path().join("empty");
    write_crossover_tables(&empty, 1.0);
    fs::write(empty.join("elapsed.csv"), "name,SLOW,FAST\n").unwrap();
    assert_eq!(exit_code(&["train", "--data", path_str(&empty), "--out", t]).0, 5, "no rows");

    let mats = tmp.path().join("nomats");
    fs::create_dir(&mats).unwrap();
    assert_eq!(exit_code(&["train", "--matrices", path_str(&mats), "--out", t]).0, 5);

    let model = tmp.path().join("model.json");
    fs::write(&model, "{not json").unwrap();
    assert_eq!(exit_code(&["emit", "--model", path_str(&model)]).0, 3);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    write_crossover_tables(&tmp.path().join("data"), 1e3);
    fs::write(
        tmp.path().join("seer.toml"),
        "data = \"data\"\nout = \"run\"\niterations = [1, 30]\nseed = 7\n",
    )
    .unwrap();
    let cfg = tmp.path().join("seer.toml");
    run_ok(&["--config", path_str(&cfg), "train"]);
    let summary = fs::read_to_string(tmp.path().join("run/train_summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 7"), "{summary}");

    run_ok(&["--config", path_str(&cfg), "train", "--seed", "8"]);
    let summary = fs::read_to_string(tmp.path().join("run/train_summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 8"), "{summary}");

    fs::write(tmp.path().join("typo.toml"), "sede = 1\n").unwrap();
    assert_eq!(exit_code(&["--config", path_str(&tmp.path().join("typo.toml")), "train"]).0, 3);
}

#[test]
fn rerunning_a_command_overwrites_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_crossover_tables(&data, 1e-3);
    let model_dir = tmp.path().join("model");
    let eval_dir = tmp.path().join("eval");
    let model = model_dir.join("model.json");
    let snapshot = || -> Vec<(std::path::PathBuf, Vec<u8>)> {
        files_below(tmp.path())
            .into_iter()
            .map(|p| {
                let bytes = fs::read(tmp.path().join(&p)).unwrap();
                (p, bytes)
            })
            .collect()
    };
    let steps = |_: ()| {
        run_ok(&["train", "--data", path_str(&data), "--iterations", "1,30", "--fixed-clock", "--out", path_str(&model_dir)]);
        run_ok(&["evaluate", "--model", path_str(&model), "--data", path_str(&data), "--fixed-clock", "--out", path_str(&eval_dir)]);
    };
    steps(());
    let first = snapshot();
    steps(());
    assert_eq!(first, snapshot());
    assert!(first.iter().all(|(p, _)| !p.to_string_lossy().contains(".tmp")));
}

#[test]
fn emit_writes_compilable_looking_sources() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_crossover_tables(&data, 1.0);
    let model_dir = tmp.path().join("model");
    run_ok(&["train", "--data", path_str(&data), "--iterations", "1,30", "--out", path_str(&model_dir)]);
    let model = model_dir.join("model.json");
    let c = stdout(&run_ok(&["emit", "--model", path_str(&model)]));
    assert!(c.contains("int seer_"), "{c}");
    run_ok(&["emit", "--model", path_str(&model), "--lang", "rust", "--out", path_str(tmp.path())]);
    let rs = fs::read_to_string(tmp.path().join("seer_model.rs")).unwrap();
    assert!(rs.contains("pub fn "), "{rs}");
}
