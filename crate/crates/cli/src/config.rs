use std::path::{Path, PathBuf};

use neatboost::neat::{HyperparameterSpec, NeatConfig};
use neatboost::pipeline::DEFAULT_FRACTIONS;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Input feature table for evolve, train and analyze.
    pub data: Option<PathBuf>,
    /// Every artifact is written below this directory.
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            data: None,
            output: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Train, validation and test shares.
    pub fractions: [f64; 3],
    pub folds: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            fractions: DEFAULT_FRACTIONS,
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    pub enabled: bool,
    pub k: usize,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { enabled: true, k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_per_class: usize,
    pub separation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 100,
            separation: 2.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeatPair {
    pub gbdt: NeatConfig,
    pub mlp: NeatConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangePair {
    pub gbdt: HyperparameterSpec,
    pub mlp: HyperparameterSpec,
}

impl Default for RangePair {
    fn default() -> Self {
        Self {
            gbdt: neatboost::gbdt::search_space(),
            mlp: neatboost::mlp::search_space(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Best genomes per population that enter the fusion.
    pub top_k: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { top_k: 1 }
    }
}

/// Everything a run depends on. Loaded from TOML; command-line flags
/// override file values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub paths: Paths,
    pub split: SplitConfig,
    pub smote: SmoteConfig,
    pub synth: SynthConfig,
    pub neat: NeatPair,
    pub ranges: RangePair,
    pub ensemble: EnsembleConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("config serialization: {e}")))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage("no seed: pass --seed, set `seed` in the config or NEATBOOST_SEED".into()))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.seed()?;
        self.neat.gbdt.validate()?;
        self.neat.mlp.validate()?;
        self.ranges.gbdt.validate()?;
        self.ranges.mlp.validate()?;
        if self.split.folds < 2 {
            return Err(CliError::Usage("split.folds must be at least 2".into()));
        }
        if self.smote.k == 0 {
            return Err(CliError::Usage("smote.k must be at least 1".into()));
        }
        if self.ensemble.top_k == 0 {
            return Err(CliError::Usage("ensemble.top_k must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the settings that shape evolved and trained models.
    /// File locations, split fractions and synthetic-data parameters are
    /// left out so that data preparation flags do not change it.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            seed: Option<u64>,
            folds: usize,
            smote: &'a SmoteConfig,
            neat: &'a NeatPair,
            ranges: &'a RangePair,
            ensemble: &'a EnsembleConfig,
        }
        let h = Hashed {
            seed: self.seed,
            folds: self.split.folds,
            smote: &self.smote,
            neat: &self.neat,
            ranges: &self.ranges,
            ensemble: &self.ensemble,
        };
        let json = serde_json::to_string(&h).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            seed: Some(7),
            ..RunConfig::default()
        };
        let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = toml::from_str("seed = 3\n[neat.gbdt]\npopulation_size = 6\n").unwrap();
        assert_eq!(cfg.neat.gbdt.population_size, 6);
        assert_eq!(cfg.neat.mlp, NeatConfig::default());
        assert_eq!(cfg.split.folds, 5);
        assert!(toml::from_str::<RunConfig>("sed = 3\n").is_err());
    }

    #[test]
    fn hash_tracks_model_settings_only() {
        let a = RunConfig {
            seed: Some(1),
            ..RunConfig::default()
        };
        let mut b = a.clone();
        b.paths.output = PathBuf::from("elsewhere");
        b.synth.separation = 6.0;
        b.split.fractions = [0.6, 0.2, 0.2];
        assert_eq!(a.hash(), b.hash());
        b.split.folds = 3;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(matches!(RunConfig::default().validate(), Err(CliError::Usage(_))));
    }
}
