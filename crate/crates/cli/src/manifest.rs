use std::collections::BTreeMap;
use std::path::Path;

use neatboost::neat::Hyperparameters;
use neatboost::pipeline::MetricsReport;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::learners::LearnerKind;

/// One evolved configuration and its cross-validated fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub fitness: f64,
    pub hyperparameters: Hyperparameters,
}

/// Output of `evolve`: best configurations per population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestHyperparameters {
    pub schema_version: u32,
    pub config_hash: String,
    pub candidates: BTreeMap<LearnerKind, Vec<Candidate>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub kind: LearnerKind,
    /// Model file, relative to the manifest.
    pub file: String,
    pub hyperparameters: Hyperparameters,
    pub weight: f64,
    pub oof_metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum WeightProvenance {
    NelderMead { evaluations: usize, uniform_objective: f64 },
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub models: Vec<ModelEntry>,
    pub weights: Vec<f64>,
    pub weight_provenance: WeightProvenance,
    /// Weighted F1 of the fused out-of-fold predictions.
    pub oof_objective: f64,
    pub oof_metrics: MetricsReport,
    /// Filled in by `evaluate`.
    pub test_metrics: Option<MetricsReport>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let s =
        std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Manifest at `path` with its models, loaded from files next to it.
pub fn load_ensemble(path: &Path) -> CliResult<(EnsembleManifest, Vec<crate::learners::TrainedModel>)> {
    let manifest: EnsembleManifest = read_json(path)?;
    if manifest.schema_version != neatboost::SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "{}: schema_version {} is not supported",
            path.display(),
            manifest.schema_version
        )));
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut models = Vec::with_capacity(manifest.models.len());
    for e in &manifest.models {
        let file = dir.join(&e.file);
        let text =
            std::fs::read_to_string(&file).map_err(|err| CliError::Data(format!("model {}: {err}", file.display())))?;
        models.push(crate::learners::TrainedModel::from_json(e.kind, &text)?);
    }
    Ok((manifest, models))
}

/// Fail when a config file was given and its hash differs from `recorded`.
pub fn check_drift(ctx: &crate::Context, recorded: &str, what: &Path) -> CliResult<()> {
    if ctx.config_given && ctx.cfg.hash() != recorded {
        return Err(CliError::Usage(format!(
            "config drift: {} was built with config {recorded}, current config is {}",
            what.display(),
            ctx.cfg.hash()
        )));
    }
    Ok(())
}
