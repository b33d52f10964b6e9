use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neat::{HyperparameterRange, HyperparameterSpec, Hyperparameters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_size: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub label_smoothing: f64,
    /// Beta(a, a) parameter for Mixup; 0 disables mixing.
    pub mixup_alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_size: 32,
            dropout: 0.1,
            learning_rate: 0.01,
            weight_decay: 1e-4,
            label_smoothing: 0.05,
            mixup_alpha: 0.2,
            epochs: 150,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("mlp: {what}")));
        if self.hidden_size < 1 {
            return bad("hidden_size must be >= 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0,1)");
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return bad("label_smoothing must be in [0,1)");
        }
        if !(self.mixup_alpha >= 0.0) || !self.mixup_alpha.is_finite() {
            return bad("mixup_alpha must be >= 0");
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be >= 0");
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return bad("weight_decay must be >= 0");
        }
        if self.epochs < 1 || self.batch_size < 2 {
            return bad("epochs must be >= 1 and batch_size >= 2");
        }
        Ok(())
    }

    /// Build a config from decoded hyperparameters; missing keys keep
    /// defaults. `epochs` and `batch_size` are accepted besides the
    /// [`search_space`] names.
    pub fn from_hyperparameters(hp: &Hyperparameters, seed: u64) -> Result<Self> {
        let d = Self::default();
        let get = |k: &str, default: f64| hp.get(k).copied().unwrap_or(default);
        let cfg = Self {
            hidden_size: get("hidden_size", d.hidden_size as f64).round() as usize,
            dropout: get("dropout", d.dropout),
            learning_rate: get("learning_rate", d.learning_rate),
            weight_decay: get("weight_decay", d.weight_decay),
            label_smoothing: get("label_smoothing", d.label_smoothing),
            mixup_alpha: get("mixup_alpha", d.mixup_alpha),
            epochs: get("epochs", d.epochs as f64).round() as usize,
            batch_size: get("batch_size", d.batch_size as f64).round() as usize,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The six evolved MLP hyperparameters and their ranges.
pub fn search_space() -> HyperparameterSpec {
    HyperparameterSpec {
        entries: vec![
            HyperparameterRange::int("hidden_size", 8.0, 64.0),
            HyperparameterRange::linear("dropout", 0.0, 0.5),
            HyperparameterRange::log("learning_rate", 5e-4, 5e-2),
            HyperparameterRange::log("weight_decay", 1e-6, 1e-1),
            HyperparameterRange::linear("label_smoothing", 0.0, 0.2),
            HyperparameterRange::linear("mixup_alpha", 0.0, 0.4),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_decode() {
        let spec = search_space();
        let hp = crate::neat::decode_hyperparameters(&vec![0.5; spec.len()], &spec).unwrap();
        let cfg = MlpConfig::from_hyperparameters(&hp, 4).unwrap();
        assert_eq!(cfg.hidden_size, 36);
        assert!((cfg.dropout - 0.25).abs() < 1e-15);
        assert!((cfg.learning_rate - 5e-3).abs() < 1e-12);
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn partial_map_keeps_defaults() {
        let hp: Hyperparameters = [("hidden_size".to_string(), 8.0), ("epochs".to_string(), 20.0)].into();
        let cfg = MlpConfig::from_hyperparameters(&hp, 1).unwrap();
        assert_eq!((cfg.hidden_size, cfg.epochs), (8, 20));
        assert_eq!(cfg.dropout, MlpConfig::default().dropout);
    }

    #[test]
    fn validation() {
        assert!(MlpConfig::default().validate().is_ok());
        for cfg in [
            MlpConfig {
                hidden_size: 0,
                ..MlpConfig::default()
            },
            MlpConfig {
                dropout: 1.0,
                ..MlpConfig::default()
            },
            MlpConfig {
                label_smoothing: -0.1,
                ..MlpConfig::default()
            },
            MlpConfig {
                mixup_alpha: f64::NAN,
                ..MlpConfig::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
