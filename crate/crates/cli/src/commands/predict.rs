use std::fmt::Write as _;
use std::path::Path;

use neatboost::fusion::{fuse, EnsembleWeights, ProbabilityMatrix};
use neatboost::pipeline::CLASS_NAMES;
use neatboost::{Matrix, N_FEATURES};

use super::write_text;
use crate::error::{CliError, CliResult};
use crate::manifest::{check_drift, load_ensemble};
use crate::{Context, PredictArgs};

/// Ids and features of a table whose label column may be absent.
fn read_features(path: &Path) -> CliResult<(Vec<String>, Matrix)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols: Vec<usize> = (1..=N_FEATURES)
        .map(|j| {
            let name = format!("f{j:02}");
            find(&name).ok_or_else(|| CliError::Data(format!("{}: missing column {name}", path.display())))
        })
        .collect::<CliResult<_>>()?;
    let id_col = find("id");
    let (mut ids, mut data) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        ids.push(
            id_col
                .and_then(|c| rec.get(c))
                .map_or_else(|| i.to_string(), str::to_string),
        );
        for &c in &cols {
            let v = rec.get(c).unwrap_or("").trim();
            let x: f64 = v
                .parse()
                .map_err(|_| CliError::Data(format!("{}: row {}: bad value {v:?}", path.display(), i + 1)))?;
            if !x.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: row {}: non-finite value",
                    path.display(),
                    i + 1
                )));
            }
            data.push(x);
        }
    }
    if ids.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", path.display())));
    }
    Ok((ids.clone(), Matrix::from_vec(ids.len(), N_FEATURES, data)?))
}

pub fn run(ctx: &Context, args: &PredictArgs) -> CliResult<()> {
    let manifest_path = args.manifest.clone().unwrap_or_else(|| ctx.output("manifest.json"));
    let (manifest, models) = load_ensemble(&manifest_path)?;
    check_drift(ctx, &manifest.config_hash, &manifest_path)?;
    let (ids, x) = read_features(&args.data)?;
    let probs: Vec<ProbabilityMatrix> = models.iter().map(|m| m.predict(&x)).collect::<Result<_, _>>()?;
    let (fused, labels) = fuse(&probs, &EnsembleWeights::new(manifest.weights.clone())?)?;
    let mut out = String::from("id,predicted,p_normal,p_wb,p_sm\n");
    for (i, id) in ids.iter().enumerate() {
        let p = fused.row(i);
        writeln!(out, "{id},{},{},{},{}", CLASS_NAMES[labels[i]], p[0], p[1], p[2]).unwrap();
    }
    write_text(&ctx.output("predictions.csv"), &out)?;
    log::info!("predict done rows={}", ids.len());
    Ok(())
}
