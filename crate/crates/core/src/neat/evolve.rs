use std::fmt::Display;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::genome::{compatibility_distance, crossover, mutate, Genome, InnovationTracker, MutationRates};
use super::hyper::HyperparameterSpec;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeatConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Constant network input.
    pub inputs: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub compatibility_threshold: f64,
    pub mutation: MutationRates,
    pub crossover_rate: f64,
    /// Fraction of each species allowed to reproduce.
    pub survival_threshold: f64,
    /// Top genomes copied unchanged into the next generation.
    pub elitism: usize,
    pub stagnation_limit: usize,
    /// Number of best genomes kept across the whole run.
    pub hall_of_fame: usize,
    pub seed: u64,
}

impl Default for NeatConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 10,
            inputs: vec![1.0; 4],
            c1: 1.0,
            c2: 1.0,
            c3: 0.4,
            compatibility_threshold: 3.0,
            mutation: MutationRates::default(),
            crossover_rate: 0.75,
            survival_threshold: 0.5,
            elitism: 2,
            stagnation_limit: 15,
            hall_of_fame: 1,
            seed: 0,
        }
    }
}

impl NeatConfig {
    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} not in [0, 1]")))
            }
        };
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Error::InvalidConfig("generations must be at least 1".into()));
        }
        if self.inputs.is_empty() {
            return Err(Error::InvalidConfig("inputs must not be empty".into()));
        }
        rate("weight_mutation", self.mutation.weight_mutation)?;
        rate("weight_replace", self.mutation.weight_replace)?;
        rate("add_node", self.mutation.add_node)?;
        rate("add_connection", self.mutation.add_connection)?;
        rate("crossover_rate", self.crossover_rate)?;
        rate("survival_threshold", self.survival_threshold)?;
        Ok(())
    }
}

/// Identifies one fitness evaluation and carries its derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalContext {
    pub generation: usize,
    pub genome_index: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub species_count: usize,
    pub best_genome: Genome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub generations: Vec<GenerationStats>,
}

impl FitnessReport {
    /// `generation,best_fitness,mean_fitness,species_count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,species_count\n");
        for g in &self.generations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                g.generation, g.best_fitness, g.mean_fitness, g.species_count
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    /// Best genome ever evaluated.
    pub best: Genome,
    pub report: FitnessReport,
    /// The `hall_of_fame` best evaluated genomes, best first.
    pub hall_of_fame: Vec<Genome>,
    /// Population after the final reproduction step.
    pub population: Vec<Genome>,
}

struct Species {
    representative: Genome,
    members: Vec<usize>,
    best_fitness: f64,
    last_improved: usize,
}

fn fitness_of(g: &Genome) -> f64 {
    g.fitness.unwrap_or(0.0)
}

/// Indices sorted by descending fitness, ties by index.
fn ranked(pop: &[Genome], idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_by(|&a, &b| fitness_of(&pop[b]).total_cmp(&fitness_of(&pop[a])).then(a.cmp(&b)));
    v
}

fn evaluate_population<F, E>(
    population: &mut [Genome],
    generation: usize,
    spec: &HyperparameterSpec,
    cfg: &NeatConfig,
    objective: &F,
) -> Vec<usize>
where
    F: Fn(&Genome, &[f64], &EvalContext) -> std::result::Result<f64, E> + Sync,
    E: Display,
{
    let pending: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness.is_none())
        .collect();
    let eval = |i: usize| -> f64 {
        let g = &population[i];
        let ctx = EvalContext {
            generation,
            genome_index: i,
            seed: seed::derive(cfg.seed, "neat-eval", &[generation as u64, i as u64]),
        };
        let h = match g.activate(&cfg.inputs) {
            Ok(h) if h.len() == spec.len() => h,
            Ok(h) => {
                log::warn!(
                    "genome output size mismatch generation={generation} genome={i} outputs={}",
                    h.len()
                );
                return 0.0;
            }
            Err(e) => {
                log::warn!("genome activation failed generation={generation} genome={i} error={e}");
                return 0.0;
            }
        };
        match objective(g, &h, &ctx) {
            Ok(f) if f.is_finite() => f,
            Ok(f) => {
                log::warn!("non-finite fitness generation={generation} genome={i} fitness={f}");
                0.0
            }
            Err(e) => {
                log::warn!("fitness evaluation failed generation={generation} genome={i} error={e}");
                0.0
            }
        }
    };
    #[cfg(feature = "parallel")]
    let scores: Vec<f64> = {
        use rayon::prelude::*;
        pending.par_iter().map(|&i| eval(i)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scores: Vec<f64> = pending.iter().map(|&i| eval(i)).collect();
    for (&i, f) in pending.iter().zip(scores) {
        population[i].fitness = Some(f);
    }
    pending
}

fn speciate(population: &[Genome], species: &mut Vec<Species>, cfg: &NeatConfig, generation: usize) {
    for s in species.iter_mut() {
        s.members.clear();
    }
    for (i, g) in population.iter().enumerate() {
        let home = species.iter().position(|s| {
            compatibility_distance(g, &s.representative, cfg.c1, cfg.c2, cfg.c3) < cfg.compatibility_threshold
        });
        match home {
            Some(k) => species[k].members.push(i),
            None => species.push(Species {
                representative: g.clone(),
                members: vec![i],
                best_fitness: f64::NEG_INFINITY,
                last_improved: generation,
            }),
        }
    }
    species.retain(|s| !s.members.is_empty());
    for s in species.iter_mut() {
        s.representative = population[s.members[0]].clone();
        let best = s
            .members
            .iter()
            .map(|&i| fitness_of(&population[i]))
            .fold(f64::NEG_INFINITY, f64::max);
        if best > s.best_fitness {
            s.best_fitness = best;
            s.last_improved = generation;
        }
    }
}

/// Largest-remainder split of `total` proportional to `weights`.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / weights.len() as f64; weights.len()]
    };
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &k in order.iter().take(total - assigned) {
        counts[k] += 1;
    }
    counts
}

fn reproduce<R: Rng>(
    population: &[Genome],
    species: &[Species],
    cfg: &NeatConfig,
    tracker: &mut InnovationTracker,
    rng: &mut R,
) -> Vec<Genome> {
    let all: Vec<usize> = (0..population.len()).collect();
    let elites = cfg.elitism.min(cfg.population_size);
    let mut next: Vec<Genome> = ranked(population, &all)
        .into_iter()
        .take(elites)
        .map(|i| population[i].clone())
        .collect();
    let remaining = cfg.population_size - next.len();
    if remaining == 0 || species.is_empty() {
        while next.len() < cfg.population_size {
            next.push(population[next.len() % population.len()].clone());
        }
        return next;
    }
    // Explicit fitness sharing: a species' share is the mean of its members.
    let shares: Vec<f64> = species
        .iter()
        .map(|s| {
            let total: f64 = s.members.iter().map(|&i| fitness_of(&population[i]).max(0.0)).sum();
            total / s.members.len() as f64
        })
        .collect();
    let counts = apportion(&shares, remaining);
    for (s, &n) in species.iter().zip(&counts) {
        let members = ranked(population, &s.members);
        let keep = ((members.len() as f64 * cfg.survival_threshold).ceil() as usize).clamp(1, members.len());
        let parents = &members[..keep];
        for _ in 0..n {
            let child = if parents.len() >= 2 && rng.random::<f64>() < cfg.crossover_rate {
                let a = rng.random_range(0..parents.len());
                let b = (a + rng.random_range(1..parents.len())) % parents.len();
                let (a, b) = (a.min(b), a.max(b));
                crossover(&population[parents[a]], &population[parents[b]], rng)
            } else {
                let p = parents[rng.random_range(0..parents.len())];
                let mut c = population[p].clone();
                c.fitness = None;
                c
            };
            let mut child = mutate(&child, &cfg.mutation, tracker, rng);
            child.fitness = None;
            next.push(child);
        }
    }
    next
}

/// Evolve genomes whose outputs, decoded through `spec`, maximise `objective`.
///
/// The objective receives the genome, its normalized output vector and an
/// [`EvalContext`]. Errors and non-finite values score 0. Elites keep their
/// fitness and are not re-evaluated.
pub fn evolve<F, E>(objective: F, spec: &HyperparameterSpec, cfg: &NeatConfig) -> Result<Evolution>
where
    F: Fn(&Genome, &[f64], &EvalContext) -> std::result::Result<f64, E> + Sync,
    E: Display,
{
    cfg.validate()?;
    spec.validate()?;
    if spec.is_empty() {
        return Err(Error::InvalidConfig("hyperparameter spec is empty".into()));
    }
    let (n_in, n_out) = (cfg.inputs.len(), spec.len());
    let mut rng = seed::rng(cfg.seed, "neat", &[]);
    let mut tracker = InnovationTracker::new(n_in, n_out);
    let mut population: Vec<Genome> = (0..cfg.population_size)
        .map(|_| Genome::minimal(n_in, n_out, &mut rng))
        .collect();
    let mut species: Vec<Species> = Vec::new();
    let mut report = FitnessReport::default();
    let mut hall: Vec<Genome> = Vec::new();

    for generation in 0..cfg.generations {
        let fresh = evaluate_population(&mut population, generation, spec, cfg, &objective);
        for &i in &fresh {
            hall.push(population[i].clone());
        }
        // Stable sort keeps the earliest evaluation first among equal fitness.
        hall.sort_by(|a, b| fitness_of(b).total_cmp(&fitness_of(a)));
        hall.truncate(cfg.hall_of_fame.max(1));

        speciate(&population, &mut species, cfg, generation);
        let all: Vec<usize> = (0..population.len()).collect();
        let best_idx = ranked(&population, &all)[0];
        let mean = population.iter().map(fitness_of).sum::<f64>() / population.len() as f64;
        report.generations.push(GenerationStats {
            generation,
            best_fitness: fitness_of(&population[best_idx]),
            mean_fitness: mean,
            species_count: species.len(),
            best_genome: population[best_idx].clone(),
        });
        log::info!(
            "neat generation done generation={generation} best={:.6} mean={mean:.6} species={}",
            fitness_of(&population[best_idx]),
            species.len()
        );

        // Stagnant species stop reproducing, except the one holding the best genome.
        species.retain(|s| generation - s.last_improved < cfg.stagnation_limit || s.members.contains(&best_idx));

        population = reproduce(&population, &species, cfg, &mut tracker, &mut rng);
        tracker.new_generation();
    }

    Ok(Evolution {
        best: hall[0].clone(),
        report,
        hall_of_fame: hall,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::hyper::HyperparameterRange;

    fn surrogate_spec() -> HyperparameterSpec {
        HyperparameterSpec::new(vec![HyperparameterRange::linear("lambda", 0.0, 1.0)]).unwrap()
    }

    fn surrogate(_: &Genome, h: &[f64], _: &EvalContext) -> std::result::Result<f64, String> {
        Ok(1.0 - (h[0] - 0.3).powi(2))
    }

    #[test]
    fn surrogate_converges() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 20,
            generations: 15,
            seed: 3,
            ..NeatConfig::default()
        };
        let evo = evolve(surrogate, &spec, &cfg).unwrap();
        let h = evo.best.activate(&cfg.inputs).unwrap();
        let lambda = spec.entries[0].decode(h[0]);
        assert!((lambda - 0.3).abs() < 0.05, "{lambda}");
        for w in evo.report.generations.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
    }

    #[test]
    fn full_elitism_keeps_population() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 6,
            generations: 1,
            elitism: 6,
            seed: 1,
            ..NeatConfig::default()
        };
        let evo = evolve(surrogate, &spec, &cfg).unwrap();
        let initial: Vec<Genome> = {
            let mut rng = seed::rng(cfg.seed, "neat", &[]);
            (0..6).map(|_| Genome::minimal(4, 1, &mut rng)).collect()
        };
        let mut strip = evo.population.clone();
        strip.iter_mut().for_each(|g| g.fitness = None);
        let mut a: Vec<String> = strip.iter().map(|g| format!("{g:?}")).collect();
        let mut b: Vec<String> = initial.iter().map(|g| format!("{g:?}")).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn same_seed_same_report() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 10,
            generations: 5,
            seed: 42,
            ..NeatConfig::default()
        };
        let a = evolve(surrogate, &spec, &cfg).unwrap();
        let b = evolve(surrogate, &spec, &cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.report.to_csv(), b.report.to_csv());
    }

    #[test]
    fn failing_objective_scores_zero() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 4,
            generations: 2,
            ..NeatConfig::default()
        };
        let evo = evolve(
            |_: &Genome, h: &[f64], _: &EvalContext| {
                if h[0] > 0.5 {
                    Err("boom")
                } else {
                    Ok(f64::NAN)
                }
            },
            &spec,
            &cfg,
        )
        .unwrap();
        assert!(evo.report.generations.iter().all(|g| g.best_fitness == 0.0));
    }

    #[test]
    fn every_genome_stays_valid() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 12,
            generations: 8,
            mutation: MutationRates {
                add_node: 0.5,
                add_connection: 0.5,
                ..MutationRates::default()
            },
            ..NeatConfig::default()
        };
        let evo = evolve(surrogate, &spec, &cfg).unwrap();
        for g in &evo.population {
            g.validate().unwrap();
            let h = g.activate(&cfg.inputs).unwrap();
            assert!(h.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(&[1.0, 1.0, 2.0], 8), vec![2, 2, 4]);
        assert_eq!(apportion(&[0.0, 0.0], 3), vec![2, 1]);
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 4).iter().sum::<usize>(), 4);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = surrogate_spec();
        let cfg = NeatConfig {
            population_size: 1,
            ..NeatConfig::default()
        };
        assert!(evolve(surrogate, &spec, &cfg).is_err());
    }
}
