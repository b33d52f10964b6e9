use std::fmt::Write as _;

use neatboost::analysis::{anova_table, lda_project, rank_features};
use neatboost::gbdt::TreeEnsembleModel;
use neatboost::pipeline::{Dataset, CLASS_NAMES};
use neatboost::SCHEMA_VERSION;
use serde::Serialize;

use super::{load_dataset, write_text};
use crate::error::{CliError, CliResult};
use crate::manifest::write_json;
use crate::{AnalyzeArgs, Context};

#[derive(Serialize)]
struct LdaSummary<'a> {
    schema_version: u32,
    components: usize,
    explained_variance_ratio: &'a [f64],
    /// One row of feature loadings per component.
    axes: Vec<&'a [f64]>,
}

pub fn run(ctx: &Context, args: &AnalyzeArgs) -> CliResult<()> {
    let ds = load_dataset(&ctx.data_path(args.data.as_deref())?)?;
    let present = ds.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(CliError::Data(format!(
            "analysis needs at least 2 classes, found {present}"
        )));
    }

    let mut anova = String::from("feature,F,df1,df2,p\n");
    for a in anova_table(&ds.x, &ds.y)? {
        writeln!(
            anova,
            "{},{},{},{},{}",
            Dataset::feature_name(a.feature),
            a.f,
            a.df_between,
            a.df_within,
            a.p_value
        )
        .unwrap();
    }
    write_text(&ctx.output("anova.csv"), &anova)?;

    let lda = lda_project(&ds.x, &ds.y, args.components)?;
    let k = lda.coordinates.cols();
    let mut coords = String::from("id,label");
    for j in 1..=k {
        write!(coords, ",ld{j}").unwrap();
    }
    coords.push('\n');
    for i in 0..ds.len() {
        write!(coords, "{},{}", ds.ids[i], CLASS_NAMES[ds.y[i]]).unwrap();
        for v in lda.coordinates.row(i) {
            write!(coords, ",{v}").unwrap();
        }
        coords.push('\n');
    }
    write_text(&ctx.output("lda_coordinates.csv"), &coords)?;
    write_json(
        &ctx.output("lda.json"),
        &LdaSummary {
            schema_version: SCHEMA_VERSION,
            components: k,
            explained_variance_ratio: &lda.explained_variance_ratio,
            axes: lda.axes.iter_rows().collect(),
        },
    )?;

    let model = match &args.model {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            Some(TreeEnsembleModel::from_json(&text)?)
        }
        None => None,
    };
    let mut ranking = String::from("rank,feature,name,F,p,gain\n");
    for (r, f) in rank_features(&ds, model.as_ref())?.iter().enumerate() {
        let gain = f.gain.map(|g| g.to_string()).unwrap_or_default();
        writeln!(
            ranking,
            "{},{},{},{},{},{gain}",
            r + 1,
            Dataset::feature_name(f.feature),
            f.name,
            f.f,
            f.p_value
        )
        .unwrap();
    }
    write_text(&ctx.output("feature_ranking.csv"), &ranking)?;
    log::info!("analyze done samples={} components={k}", ds.len());
    Ok(())
}
