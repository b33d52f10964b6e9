use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterRange {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
    pub integer: bool,
}

impl HyperparameterRange {
    pub fn linear(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            scale: Scale::Linear,
            integer: false,
        }
    }

    pub fn log(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            scale: Scale::Log,
            ..Self::linear(name, lower, upper)
        }
    }

    pub fn int(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            integer: true,
            ..Self::linear(name, lower, upper)
        }
    }

    /// Map a normalized value `h` in `[0, 1]` into this range.
    pub fn decode(&self, h: f64) -> f64 {
        let (l, u) = (self.lower, self.upper);
        let v = match self.scale {
            Scale::Linear => l + h * (u - l),
            Scale::Log => {
                let (ll, lu) = (l.ln(), u.ln());
                (ll + h * (lu - ll)).exp().clamp(l, u)
            }
        };
        if self.integer {
            (v + 0.5).floor().clamp(l, u)
        } else {
            v
        }
    }
}

/// Ordered list of hyperparameter ranges; one genome output per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterSpec {
    pub entries: Vec<HyperparameterRange>,
}

impl HyperparameterSpec {
    pub fn new(entries: Vec<HyperparameterRange>) -> Result<Self> {
        let spec = Self { entries };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(e.lower < e.upper) {
                return Err(Error::InvalidConfig(format!(
                    "{}: lower {} must be below upper {}",
                    e.name, e.lower, e.upper
                )));
            }
            if e.scale == Scale::Log && e.lower <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{}: log scale needs a positive lower bound",
                    e.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Decoded configuration, keyed by hyperparameter name.
pub type Hyperparameters = BTreeMap<String, f64>;

pub fn decode_hyperparameters(h: &[f64], spec: &HyperparameterSpec) -> Result<Hyperparameters> {
    if h.len() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            actual: h.len(),
        });
    }
    if let Some(v) = h.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidData(format!("normalized value {v} outside [0, 1]")));
    }
    Ok(spec
        .entries
        .iter()
        .zip(h)
        .map(|(e, &v)| (e.name.clone(), e.decode(v)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_midpoint_and_endpoints() {
        let r = HyperparameterRange::linear("x", 10.0, 100.0);
        assert_eq!(r.decode(0.5), 55.0);
        assert_eq!(r.decode(0.0), 10.0);
        assert_eq!(r.decode(1.0), 100.0);
    }

    #[test]
    fn log_geometric_midpoint() {
        let r = HyperparameterRange::log("lr", 1e-4, 1e-1);
        assert!((r.decode(0.5) - 10f64.powf(-2.5)).abs() < 1e-15);
        assert!((r.decode(0.5) - 3.162e-3).abs() < 1e-6);
    }

    #[test]
    fn integers_round_half_up_and_clamp() {
        let r = HyperparameterRange::int("n", 3.0, 12.0);
        assert_eq!(r.decode(0.5), 8.0); // 7.5 rounds up
        assert_eq!(r.decode(0.0), 3.0);
        assert_eq!(r.decode(1.0), 12.0);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = HyperparameterSpec::new(vec![HyperparameterRange::linear("a", 0.0, 1.0)]).unwrap();
        assert!(decode_hyperparameters(&[0.1, 0.2], &spec).is_err());
        assert!(HyperparameterSpec::new(vec![HyperparameterRange::log("b", 0.0, 1.0)]).is_err());
        assert!(HyperparameterSpec::new(vec![HyperparameterRange::linear("c", 1.0, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn decoding_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, lo in 1e-6f64..10.0, width in 1e-3f64..100.0) {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            for r in [
                HyperparameterRange::linear("x", lo, lo + width),
                HyperparameterRange::log("x", lo, lo + width),
                HyperparameterRange::int("x", lo.floor(), lo.floor() + width.ceil()),
            ] {
                prop_assert!(r.decode(a) <= r.decode(b));
                prop_assert!(r.decode(a) >= r.lower && r.decode(b) <= r.upper);
            }
        }
    }
}
