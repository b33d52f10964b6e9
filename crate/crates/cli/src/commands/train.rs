use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use neatboost::fusion::{fuse, optimize_weights, EnsembleWeights};
use neatboost::neat::Hyperparameters;
use neatboost::pipeline::{compute_metrics, smote, stratified_kfold, CLASS_NAMES};
use neatboost::{seed, N_CLASSES, SCHEMA_VERSION};

use super::{load_dataset, write_text};
use crate::error::{CliError, CliResult};
use crate::learners::{fit, out_of_fold, LearnerKind};
use crate::manifest::{read_json, write_json, BestHyperparameters, EnsembleManifest, ModelEntry, WeightProvenance};
use crate::{Context, TrainArgs};

/// Models to train: name, learner and hyperparameters.
fn model_plan(ctx: &Context, args: &TrainArgs) -> CliResult<Vec<(String, LearnerKind, Hyperparameters)>> {
    if let Some(path) = &args.manual {
        let manual: BTreeMap<LearnerKind, Hyperparameters> = read_json(path)?;
        if manual.is_empty() {
            return Err(CliError::Usage(format!("{}: no learner given", path.display())));
        }
        return Ok(manual
            .into_iter()
            .map(|(k, hp)| (k.name().to_string(), k, hp))
            .collect());
    }
    let path = args
        .hyperparameters
        .clone()
        .unwrap_or_else(|| ctx.output("best_hyperparameters.json"));
    if !path.exists() {
        return Err(CliError::Data(format!(
            "{} not found: run evolve first or pass --manual",
            path.display()
        )));
    }
    let best: BestHyperparameters = read_json(&path)?;
    let hash = ctx.cfg.hash();
    if best.config_hash != hash {
        return Err(CliError::Usage(format!(
            "config drift: {} was evolved with config {}, current config is {hash}",
            path.display(),
            best.config_hash
        )));
    }
    let mut plan = Vec::new();
    for (kind, list) in best.candidates {
        for (r, c) in list.iter().enumerate() {
            let name = if list.len() == 1 {
                kind.name().to_string()
            } else {
                format!("{}_{}", kind.name(), r + 1)
            };
            plan.push((name, kind, c.hyperparameters.clone()));
        }
    }
    if plan.is_empty() {
        return Err(CliError::Data(format!("{}: no candidates", path.display())));
    }
    Ok(plan)
}

pub fn run(ctx: &Context, args: &TrainArgs) -> CliResult<()> {
    let ds = load_dataset(&ctx.data_path(args.data.as_deref())?)?;
    let cfg = &ctx.cfg;
    let plan = model_plan(ctx, args)?;
    let folds = stratified_kfold(&ds.y, cfg.split.folds, seed::derive(ctx.seed, "folds", &[]))?;
    let smote_k = cfg.smote.enabled.then_some(cfg.smote.k);
    let (bx, by) = match smote_k {
        Some(k) => smote(&ds.x, &ds.y, k, seed::derive(ctx.seed, "train-smote", &[]))?,
        None => (ds.x.clone(), ds.y.clone()),
    };

    let mut oofs = Vec::new();
    let mut fold_of = Vec::new();
    let mut entries = Vec::new();
    for (m, (name, kind, hp)) in plan.iter().enumerate() {
        let oof = out_of_fold(
            *kind,
            hp,
            &ds.x,
            &ds.y,
            &folds,
            smote_k,
            seed::derive(ctx.seed, "oof", &[m as u64]),
        )?;
        let metrics = compute_metrics(&ds.y, &oof.probs.argmax_rows(), N_CLASSES)?;
        log::info!(
            "oof done model={name} weighted_f1={:.6} accuracy={:.6}",
            metrics.weighted_f1,
            metrics.accuracy
        );
        let model = fit(*kind, hp, &bx, &by, seed::derive(ctx.seed, "fit", &[m as u64]))?;
        let file = format!("model_{name}.json");
        write_text(&ctx.output(&file), &model.to_json()?)?;
        entries.push(ModelEntry {
            name: name.clone(),
            kind: *kind,
            file,
            hyperparameters: hp.clone(),
            weight: 0.0,
            oof_metrics: metrics,
        });
        fold_of = oof.fold_of.clone();
        oofs.push(oof.probs);
    }

    let (weights, provenance) = match &args.weights {
        Some(w) => {
            if w.len() != oofs.len() {
                return Err(CliError::Usage(format!(
                    "--weights has {} values for {} models",
                    w.len(),
                    oofs.len()
                )));
            }
            let w = EnsembleWeights::new(w.clone()).map_err(|e| CliError::Usage(format!("--weights: {e}")))?;
            (w, WeightProvenance::Override)
        }
        None => {
            let fit = optimize_weights(&oofs, &ds.y)?;
            (
                fit.weights,
                WeightProvenance::NelderMead {
                    evaluations: fit.evaluations,
                    uniform_objective: fit.uniform_objective,
                },
            )
        }
    };
    for (e, &w) in entries.iter_mut().zip(weights.as_slice()) {
        e.weight = w;
    }
    let (fused, labels) = fuse(&oofs, &weights)?;
    let oof_metrics = compute_metrics(&ds.y, &labels, N_CLASSES)?;

    let mut csv = String::from("id,label,fold");
    for name in entries.iter().map(|e| e.name.as_str()).chain(["ensemble"]) {
        for c in CLASS_NAMES {
            write!(csv, ",{name}_{c}").unwrap();
        }
    }
    csv.push_str(",predicted\n");
    for i in 0..ds.len() {
        write!(csv, "{},{},{}", ds.ids[i], CLASS_NAMES[ds.y[i]], fold_of[i]).unwrap();
        for p in oofs.iter().chain([&fused]) {
            for v in p.row(i) {
                write!(csv, ",{v}").unwrap();
            }
        }
        writeln!(csv, ",{}", CLASS_NAMES[labels[i]]).unwrap();
    }
    write_text(&ctx.output("oof_predictions.csv"), &csv)?;

    let manifest = EnsembleManifest {
        schema_version: SCHEMA_VERSION,
        config_hash: cfg.hash(),
        seed: ctx.seed,
        models: entries,
        weights: weights.as_slice().to_vec(),
        weight_provenance: provenance,
        oof_objective: oof_metrics.weighted_f1,
        oof_metrics,
        test_metrics: None,
    };
    let path: PathBuf = ctx.output("manifest.json");
    write_json(&path, &manifest)?;
    log::info!(
        "train done weights={:?} oof_weighted_f1={:.6} manifest={}",
        manifest.weights,
        manifest.oof_objective,
        path.display()
    );
    Ok(())
}
