use std::collections::BTreeMap;

use neatboost::neat::{decode_hyperparameters, evolve, NeatConfig};
use neatboost::pipeline::stratified_kfold;
use neatboost::{seed, SCHEMA_VERSION};

use super::{load_dataset, write_text};
use crate::error::CliResult;
use crate::learners::{out_of_fold, LearnerKind};
use crate::manifest::{write_json, BestHyperparameters, Candidate};
use crate::{Context, EvolveArgs};

pub fn run(ctx: &Context, args: &EvolveArgs) -> CliResult<()> {
    let ds = load_dataset(&ctx.data_path(args.data.as_deref())?)?;
    let cfg = &ctx.cfg;
    let folds = stratified_kfold(&ds.y, cfg.split.folds, seed::derive(ctx.seed, "folds", &[]))?;
    let smote_k = cfg.smote.enabled.then_some(cfg.smote.k);
    let mut candidates = BTreeMap::new();

    for kind in LearnerKind::ALL {
        let (base, spec) = match kind {
            LearnerKind::Gbdt => (&cfg.neat.gbdt, &cfg.ranges.gbdt),
            LearnerKind::Mlp => (&cfg.neat.mlp, &cfg.ranges.mlp),
        };
        let neat_cfg = NeatConfig {
            seed: seed::derive(ctx.seed, &format!("neat-{}", kind.name()), &[]),
            hall_of_fame: base.hall_of_fame.max(cfg.ensemble.top_k),
            ..base.clone()
        };
        let objective = |_: &_, h: &[f64], ec: &neatboost::neat::EvalContext| -> neatboost::Result<f64> {
            let hp = decode_hyperparameters(h, spec)?;
            let oof = out_of_fold(kind, &hp, &ds.x, &ds.y, &folds, smote_k, ec.seed)?;
            log::debug!(
                "fitness learner={} generation={} genome={} f1={:.6}",
                kind.name(),
                ec.generation,
                ec.genome_index,
                oof.mean_score()
            );
            Ok(oof.mean_score())
        };
        let evo = evolve(objective, spec, &neat_cfg)?;
        write_text(
            &ctx.output(&format!("evolution_{}.csv", kind.name())),
            &evo.report.to_csv(),
        )?;
        let mut list = Vec::new();
        for g in evo.hall_of_fame.iter().take(cfg.ensemble.top_k) {
            let h = g.activate(&neat_cfg.inputs)?;
            list.push(Candidate {
                fitness: g.fitness.unwrap_or(0.0),
                hyperparameters: decode_hyperparameters(&h, spec)?,
            });
        }
        log::info!(
            "evolve done learner={} best_fitness={:.6} generations={}",
            kind.name(),
            list[0].fitness,
            evo.report.generations.len()
        );
        candidates.insert(kind, list);
    }

    write_json(
        &ctx.output("best_hyperparameters.json"),
        &BestHyperparameters {
            schema_version: SCHEMA_VERSION,
            config_hash: cfg.hash(),
            candidates,
        },
    )
}
