use neatboost::pipeline::stratified_split;
use neatboost::seed;

use super::{load_dataset, save_dataset};
use crate::error::CliResult;
use crate::{Context, SplitArgs};

pub fn run(ctx: &Context, args: &SplitArgs) -> CliResult<()> {
    let ds = load_dataset(&ctx.data_path(args.data.as_deref())?)?;
    let s = stratified_split(&ds.y, ctx.cfg.split.fractions, seed::derive(ctx.seed, "split", &[]))?;
    let mut dev = s.train.clone();
    dev.extend_from_slice(&s.val);
    save_dataset(&ds.subset(&s.train), &ctx.output("train.csv"))?;
    save_dataset(&ds.subset(&s.val), &ctx.output("val.csv"))?;
    save_dataset(&ds.subset(&dev), &ctx.output("dev.csv"))?;
    save_dataset(&ds.subset(&s.test), &ctx.output("test.csv"))?;
    log::info!(
        "split done train={} val={} test={}",
        s.train.len(),
        s.val.len(),
        s.test.len()
    );
    Ok(())
}
