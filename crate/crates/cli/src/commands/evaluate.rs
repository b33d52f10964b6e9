use std::fmt::Write as _;
use std::path::Path;

use neatboost::fusion::{fuse, EnsembleWeights, ProbabilityMatrix};
use neatboost::pipeline::{compute_metrics, MetricsReport, CLASS_NAMES};
use neatboost::{N_CLASSES, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

use super::{load_dataset, write_text};
use crate::error::CliResult;
use crate::manifest::{check_drift, load_ensemble, write_json};
use crate::{Context, EvaluateArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub samples: usize,
    /// Base learners first, the fused ensemble last.
    pub models: Vec<ModelReport>,
}

/// Plain-text table: one row per model plus per-class recall and both
/// confusion matrices.
pub fn render_table(r: &EvaluationReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:<12} {:>9} {:>9} {:>9} {:>9}",
        "model", "accuracy", "precision", "recall", "f1"
    )
    .unwrap();
    for m in &r.models {
        let x = &m.metrics;
        writeln!(
            s,
            "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            m.model, x.accuracy, x.weighted_precision, x.weighted_recall, x.weighted_f1
        )
        .unwrap();
    }
    for m in &r.models {
        let x = &m.metrics;
        writeln!(s, "\n{} per-class recall", m.model).unwrap();
        for (c, pc) in x.per_class.iter().enumerate() {
            writeln!(
                s,
                "  {:<7} {:>3}/{:<3} {:.4}",
                CLASS_NAMES[c], x.confusion[c][c], pc.support, pc.recall
            )
            .unwrap();
        }
        writeln!(s, "{} confusion (rows true, columns predicted)", m.model).unwrap();
        writeln!(
            s,
            "  {:<7} {:>7} {:>7} {:>7}",
            "", CLASS_NAMES[0], CLASS_NAMES[1], CLASS_NAMES[2]
        )
        .unwrap();
        for ((name, row), norm) in CLASS_NAMES.iter().zip(&x.confusion).zip(&x.confusion_normalized) {
            writeln!(
                s,
                "  {:<7} {:>7} {:>7} {:>7}   {:.3} {:.3} {:.3}",
                name, row[0], row[1], row[2], norm[0], norm[1], norm[2]
            )
            .unwrap();
        }
    }
    s
}

pub fn run(ctx: &Context, args: &EvaluateArgs) -> CliResult<()> {
    let manifest_path = args.manifest.clone().unwrap_or_else(|| ctx.output("manifest.json"));
    let (mut manifest, models) = load_ensemble(&manifest_path)?;
    check_drift(ctx, &manifest.config_hash, &manifest_path)?;
    let ds = load_dataset(&args.test)?;

    let probs: Vec<ProbabilityMatrix> = models.iter().map(|m| m.predict(&ds.x)).collect::<Result<_, _>>()?;
    let mut reports = Vec::new();
    for (e, p) in manifest.models.iter().zip(&probs) {
        reports.push(ModelReport {
            model: e.name.clone(),
            metrics: compute_metrics(&ds.y, &p.argmax_rows(), N_CLASSES)?,
        });
    }
    let weights = EnsembleWeights::new(manifest.weights.clone())?;
    let (_, labels) = fuse(&probs, &weights)?;
    let ensemble = compute_metrics(&ds.y, &labels, N_CLASSES)?;
    reports.push(ModelReport {
        model: "ensemble".into(),
        metrics: ensemble.clone(),
    });
    let report = EvaluationReport {
        schema_version: SCHEMA_VERSION,
        config_hash: manifest.config_hash.clone(),
        samples: ds.len(),
        models: reports,
    };

    write_json(&ctx.output("evaluation.json"), &report)?;
    let table = render_table(&report);
    write_text(&ctx.output("evaluation.txt"), &table)?;
    print!("{table}");
    for m in &report.models {
        write_text(
            &ctx.output(&format!("confusion_{}.csv", m.model)),
            &m.metrics.confusion_csv(&CLASS_NAMES, false),
        )?;
        write_text(
            &ctx.output(&format!("confusion_{}_normalized.csv", m.model)),
            &m.metrics.confusion_csv(&CLASS_NAMES, true),
        )?;
    }

    // The manifest records test metrics only when it lives in the output directory.
    let manifest_dir = match manifest_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if manifest_dir.canonicalize()? == ctx.out.canonicalize()? {
        manifest.test_metrics = Some(ensemble.clone());
        write_json(&manifest_path, &manifest)?;
    }
    log::info!(
        "evaluate done samples={} accuracy={:.6} weighted_f1={:.6}",
        ds.len(),
        ensemble.accuracy,
        ensemble.weighted_f1
    );
    Ok(())
}
