//! NEAT over small feed-forward networks whose outputs are normalized
//! hyperparameter vectors.

mod evolve;
mod genome;
mod hyper;

pub use evolve::{evolve, EvalContext, Evolution, FitnessReport, GenerationStats, NeatConfig};
pub use genome::{
    compatibility_distance, crossover, mutate, ConnectionGene, Genome, InnovationTracker, MutationRates, NodeGene,
    NodeKind,
};
pub use hyper::{decode_hyperparameters, HyperparameterRange, HyperparameterSpec, Hyperparameters, Scale};
