use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn neatboost(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neatboost"))
        .current_dir(dir)
        .args(args)
        .env_remove("NEATBOOST_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = neatboost(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Binary PGM of a bright ellipse with a darker core of radius `core`.
fn phantom_pgm(core: f64) -> Vec<u8> {
    let (w, h) = (96usize, 64usize);
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - 48.0, y as f64 - 32.0);
            let v = if dx * dx + dy * dy <= core * core {
                90
            } else if (dx / 40.0).powi(2) + (dy / 24.0).powi(2) <= 1.0 {
                210 + ((x * 7 + y * 3) % 20) as u8
            } else {
                5
            };
            bytes.push(v);
        }
    }
    bytes
}

fn image_dir(tmp: &TempDir, corrupt: bool) -> std::path::PathBuf {
    let dir = tmp.path().join("images");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("a.pgm"), phantom_pgm(4.0)).unwrap();
    std::fs::write(dir.join("b.pgm"), phantom_pgm(10.0)).unwrap();
    if corrupt {
        std::fs::write(dir.join("c.pgm"), b"P5\n96 64\n255\nshort").unwrap();
    } else {
        std::fs::write(dir.join("c.pgm"), phantom_pgm(16.0)).unwrap();
    }
    std::fs::write(
        tmp.path().join("labels.csv"),
        "file,label\na.pgm,normal\nb.pgm,wb\nc.pgm,sm\n",
    )
    .unwrap();
    dir
}

#[test]
fn extract_writes_one_row_per_image_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    image_dir(&tmp, false);
    let args = [
        "--seed",
        "1",
        "--out",
        "o",
        "extract",
        "--images",
        "images",
        "--labels",
        "labels.csv",
    ];
    ok(tmp.path(), &args);
    let first = read(tmp.path(), "o/features.csv");
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("path,id,label,f01"));
    assert!(lines[1].starts_with("a.pgm,a,normal,"));
    ok(tmp.path(), &args);
    assert_eq!(read(tmp.path(), "o/features.csv"), first);
}

#[test]
fn extract_skips_corrupt_files() {
    let tmp = TempDir::new().unwrap();
    image_dir(&tmp, true);
    let out = neatboost(
        tmp.path(),
        &[
            "--seed",
            "1",
            "--out",
            "o",
            "extract",
            "--images",
            "images",
            "--labels",
            "labels.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("file=c.pgm"));
    assert_eq!(read(tmp.path(), "o/features.csv").lines().count(), 3);
}

#[test]
fn extract_on_empty_directory_is_a_data_error() {
    let tmp = TempDir::new().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    std::fs::write(tmp.path().join("labels.csv"), "file,label\n").unwrap();
    let out = neatboost(
        tmp.path(),
        &[
            "--seed",
            "1",
            "--out",
            "o",
            "extract",
            "--images",
            "empty",
            "--labels",
            "labels.csv",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_seed_is_a_usage_error_and_env_fills_it() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&neatboost(tmp.path(), &["--out", "o", "synth"])), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_neatboost"))
        .current_dir(tmp.path())
        .args(["--out", "o", "synth", "--n-per-class", "5"])
        .env("NEATBOOST_SEED", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(tmp.path(), "o/synthetic.csv").lines().count(), 16);
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("c.toml"), "seed = 1\n[synth]\nn_per_class = 4\n").unwrap();
    ok(tmp.path(), &["--config", "c.toml", "--out", "a", "synth"]);
    ok(
        tmp.path(),
        &["--config", "c.toml", "--out", "b", "synth", "--n-per-class", "6"],
    );
    ok(
        tmp.path(),
        &["--config", "c.toml", "--seed", "2", "--out", "c", "synth"],
    );
    assert_eq!(read(tmp.path(), "a/synthetic.csv").lines().count(), 13);
    assert_eq!(read(tmp.path(), "b/synthetic.csv").lines().count(), 19);
    assert_ne!(read(tmp.path(), "a/synthetic.csv"), read(tmp.path(), "c/synthetic.csv"));
}

#[test]
fn bad_config_and_missing_input_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("c.toml"), "seed = 1\nbogus = 2\n").unwrap();
    assert_eq!(code(&neatboost(tmp.path(), &["--config", "c.toml", "synth"])), 1);
    assert_eq!(
        code(&neatboost(
            tmp.path(),
            &["--seed", "1", "--out", "o", "analyze", "--data", "nope.csv"]
        )),
        2
    );
    assert_eq!(
        code(&neatboost(
            tmp.path(),
            &["--seed", "1", "--out", "o", "train", "--data", "nope.csv"]
        )),
        2
    );
}

#[test]
fn too_many_folds_names_the_class() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["--seed", "3", "--out", "o", "synth", "--n-per-class", "4"],
    );
    let out = neatboost(
        tmp.path(),
        &[
            "--seed",
            "3",
            "--out",
            "o",
            "evolve",
            "--data",
            "o/synthetic.csv",
            "--folds",
            "5",
        ],
    );
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("class normal"), "{err}");
}

const SMALL: &str = "seed = 5\n\
[synth]\nn_per_class = 40\nseparation = 6.0\n\
[split]\nfolds = 3\n\
[neat.gbdt]\npopulation_size = 4\ngenerations = 2\n\
[neat.mlp]\npopulation_size = 4\ngenerations = 2\n";

fn pipeline(tmp: &TempDir) {
    std::fs::write(tmp.path().join("run.toml"), SMALL).unwrap();
    let c = ["--config", "run.toml", "--out", "o"];
    ok(tmp.path(), &[&c[..], &["synth"]].concat());
    ok(tmp.path(), &[&c[..], &["split", "--data", "o/synthetic.csv"]].concat());
    ok(tmp.path(), &[&c[..], &["evolve", "--data", "o/dev.csv"]].concat());
    ok(tmp.path(), &[&c[..], &["train", "--data", "o/dev.csv"]].concat());
}

#[test]
fn separable_pipeline_end_to_end() {
    let tmp = TempDir::new().unwrap();
    pipeline(&tmp);
    let c = ["--config", "run.toml", "--out", "o"];

    let best: serde_json::Value = serde_json::from_str(&read(tmp.path(), "o/best_hyperparameters.json")).unwrap();
    let gbdt_fitness = best["candidates"]["gbdt"][0]["fitness"].as_f64().unwrap();
    assert!(gbdt_fitness >= 0.95, "{gbdt_fitness}");

    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "o/manifest.json")).unwrap();
    let w: Vec<f64> = manifest["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(manifest["weight_provenance"]["source"], "nelder_mead");
    let fused = manifest["oof_objective"].as_f64().unwrap();
    for m in manifest["models"].as_array().unwrap() {
        assert!(fused >= m["oof_metrics"]["weighted_f1"].as_f64().unwrap() - 0.01);
    }
    assert!(manifest["test_metrics"].is_null());

    ok(tmp.path(), &[&c[..], &["evaluate", "--test", "o/test.csv"]].concat());
    let first = read(tmp.path(), "o/evaluation.json");
    let manifest_after = read(tmp.path(), "o/manifest.json");
    ok(tmp.path(), &[&c[..], &["evaluate", "--test", "o/test.csv"]].concat());
    assert_eq!(read(tmp.path(), "o/evaluation.json"), first);
    assert_eq!(read(tmp.path(), "o/manifest.json"), manifest_after);

    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    for m in report["models"].as_array().unwrap() {
        let metrics = &m["metrics"];
        for c in 0..3 {
            let diag = metrics["confusion"][c][c].as_f64().unwrap();
            let support = metrics["per_class"][c]["support"].as_f64().unwrap();
            let recall = metrics["per_class"][c]["recall"].as_f64().unwrap();
            assert!((recall - diag / support).abs() < 1e-12);
        }
    }
    let table = read(tmp.path(), "o/evaluation.txt");
    assert!(table.contains("ensemble"));
    assert!(read(tmp.path(), "o/confusion_ensemble_normalized.csv").starts_with("true\\pred,normal,wb,sm"));

    ok(tmp.path(), &[&c[..], &["predict", "--data", "o/test.csv"]].concat());
    let preds = read(tmp.path(), "o/predictions.csv");
    assert!(preds.starts_with("id,predicted,p_normal,p_wb,p_sm\n"));
    assert_eq!(preds.lines().count(), read(tmp.path(), "o/test.csv").lines().count());
}

#[test]
fn weight_override_and_drift_detection() {
    let tmp = TempDir::new().unwrap();
    pipeline(&tmp);
    ok(
        tmp.path(),
        &[
            "--config",
            "run.toml",
            "--out",
            "o",
            "train",
            "--data",
            "o/dev.csv",
            "--weights",
            "0.5,0.5",
        ],
    );
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "o/manifest.json")).unwrap();
    assert_eq!(manifest["weight_provenance"]["source"], "override");
    assert_eq!(manifest["weights"], serde_json::json!([0.5, 0.5]));

    let bad = neatboost(
        tmp.path(),
        &[
            "--config",
            "run.toml",
            "--out",
            "o",
            "train",
            "--data",
            "o/dev.csv",
            "--weights",
            "0.7,0.7",
        ],
    );
    assert_eq!(code(&bad), 1);

    std::fs::write(tmp.path().join("drift.toml"), SMALL.replace("folds = 3", "folds = 4")).unwrap();
    let drift = neatboost(
        tmp.path(),
        &["--config", "drift.toml", "--out", "o", "train", "--data", "o/dev.csv"],
    );
    assert_eq!(code(&drift), 1);
    assert!(String::from_utf8_lossy(&drift.stderr).contains("drift"));
    let drift = neatboost(
        tmp.path(),
        &[
            "--config",
            "drift.toml",
            "--out",
            "o",
            "evaluate",
            "--test",
            "o/test.csv",
        ],
    );
    assert_eq!(code(&drift), 1);
}

#[test]
fn manual_hyperparameters_skip_evolution() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &[
            "--seed",
            "2",
            "--out",
            "o",
            "synth",
            "--n-per-class",
            "30",
            "--separation",
            "5",
        ],
    );
    std::fs::write(
        tmp.path().join("manual.json"),
        r#"{"gbdt": {"n_estimators": 20}, "mlp": {"hidden_size": 8}}"#,
    )
    .unwrap();
    ok(
        tmp.path(),
        &[
            "--seed",
            "2",
            "--out",
            "o",
            "train",
            "--data",
            "o/synthetic.csv",
            "--folds",
            "3",
            "--manual",
            "manual.json",
        ],
    );
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "o/manifest.json")).unwrap();
    assert_eq!(manifest["models"][0]["hyperparameters"]["n_estimators"], 20.0);
    assert!(tmp.path().join("o/model_mlp.json").exists());
}

#[test]
fn train_without_evolution_output_fails() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["--seed", "2", "--out", "o", "synth", "--n-per-class", "10"],
    );
    let out = neatboost(
        tmp.path(),
        &["--seed", "2", "--out", "o", "train", "--data", "o/synthetic.csv"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_outputs_and_two_class_projection() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &[
            "--seed",
            "9",
            "--out",
            "o",
            "synth",
            "--n-per-class",
            "30",
            "--separation",
            "3",
        ],
    );
    let args = ["--seed", "9", "--out", "o", "analyze", "--data", "o/synthetic.csv"];
    ok(tmp.path(), &args);
    let anova = read(tmp.path(), "o/anova.csv");
    assert!(anova.starts_with("feature,F,df1,df2,p\n"));
    assert_eq!(anova.lines().count(), 17);
    assert!(read(tmp.path(), "o/lda_coordinates.csv").starts_with("id,label,ld1,ld2\n"));
    let ranking = read(tmp.path(), "o/feature_ranking.csv");
    ok(tmp.path(), &args);
    assert_eq!(read(tmp.path(), "o/feature_ranking.csv"), ranking);

    let full = read(tmp.path(), "o/synthetic.csv");
    let two: String = full
        .lines()
        .filter(|l| !l.contains(",sm,"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(tmp.path().join("two.csv"), two).unwrap();
    ok(
        tmp.path(),
        &["--seed", "9", "--out", "t", "analyze", "--data", "two.csv"],
    );
    assert!(read(tmp.path(), "t/lda_coordinates.csv").starts_with("id,label,ld1\n"));
    let lda: serde_json::Value = serde_json::from_str(&read(tmp.path(), "t/lda.json")).unwrap();
    assert_eq!(lda["components"], 1);

    let one: String = full
        .lines()
        .filter(|l| l.starts_with("id") || l.contains(",normal,"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(tmp.path().join("one.csv"), one).unwrap();
    assert_eq!(
        code(&neatboost(
            tmp.path(),
            &["--seed", "9", "--out", "u", "analyze", "--data", "one.csv"]
        )),
        2
    );
}
