pub mod analyze;
pub mod evaluate;
pub mod evolve;
pub mod extract;
pub mod predict;
pub mod split;
pub mod synth;
pub mod train;

use std::path::Path;

use neatboost::pipeline::Dataset;

use crate::error::{CliError, CliResult};

pub(crate) fn load_dataset(path: &Path) -> CliResult<Dataset> {
    Dataset::load(path).map_err(|e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub(crate) fn save_dataset(ds: &Dataset, path: &Path) -> CliResult<()> {
    ds.save(path)?;
    log::info!("wrote table path={} rows={}", path.display(), ds.len());
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
