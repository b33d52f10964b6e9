use neatboost::pipeline::synthesize_dataset;
use neatboost::seed;

use super::save_dataset;
use crate::error::CliResult;
use crate::Context;

pub fn run(ctx: &Context) -> CliResult<()> {
    let s = &ctx.cfg.synth;
    let ds = synthesize_dataset(s.n_per_class, s.separation, seed::derive(ctx.seed, "synth", &[]))?;
    save_dataset(&ds, &ctx.output("synthetic.csv"))
}
