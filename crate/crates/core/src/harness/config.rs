//! Experiment configuration, read from JSON with every field optional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Schatten exponent as written in configuration files: a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Finite(f64),
    Named(InfinityTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfinityTag {
    #[serde(rename = "inf")]
    Inf,
}

impl PValue {
    pub fn value(self) -> f64 {
        match self {
            PValue::Finite(p) => p,
            PValue::Named(InfinityTag::Inf) => f64::INFINITY,
        }
    }

    pub fn from_f64(p: f64) -> Self {
        if p.is_infinite() {
            PValue::Named(InfinityTag::Inf)
        } else {
            PValue::Finite(p)
        }
    }
}

/// Function family of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    Abs,
    Identity,
    /// Random piecewise-linear 1-Lipschitz function, redrawn per trial.
    Pwl {
        #[serde(default = "default_max_kinks")]
        max_kinks: usize,
    },
    /// `λ ↦ c·λ² e^{−λ²}` scaled to Lipschitz constant 1.
    SqBump,
    /// Polynomial with the given coefficients, constant term first.
    Poly { coeffs: Vec<f64> },
    /// `u ↦ Σ_j exp(−a_j (u − c_j)²) H_j` with random Hermitian `H_j`.
    GaussMatrix {
        #[serde(default = "default_terms")]
        terms: usize,
    },
    /// Cycles through `abs`, `pwl` and `sq_bump` by trial index.
    Mixed,
}

fn default_max_kinks() -> usize {
    32
}

fn default_terms() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub k_min: i32,
    pub k_max: i32,
    pub per_octave: u32,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            k_min: -20,
            k_max: 20,
            per_octave: 1,
        }
    }
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        crate::doi::dyadic_grid(self.k_min, self.k_max, self.per_octave)
    }
}

/// Caps for the empirical constants. Exceeding one fails the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub bmo: f64,
    pub lipschitz: f64,
    pub logn: f64,
    pub vector: f64,
    pub vector_bmo: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            bmo: 100.0,
            lipschitz: 10.0,
            logn: 5.0,
            vector: 10.0,
            vector_bmo: 100.0,
        }
    }
}

impl Caps {
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "bmo" => &mut self.bmo,
            "lipschitz" => &mut self.lipschitz,
            "logn" => &mut self.logn,
            "vector" => &mut self.vector,
            "vector_bmo" | "vector-bmo" => &mut self.vector_bmo,
            other => return Err(Error::Config(format!("unknown cap {other:?}"))),
        };
        *slot = value;
        Ok(())
    }
}

/// Per-experiment sizes and an optional trial count overriding the global one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl ExperimentSection {
    fn new(sizes: &[usize], trials: Option<usize>) -> Self {
        Self {
            sizes: sizes.to_vec(),
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSection {
    pub sizes: Vec<usize>,
    pub k_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default = "default_terms")]
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSection {
    pub car_draws: usize,
    pub dilation_samples: usize,
    pub markov_draws: usize,
    pub variance_samples: usize,
    pub transference_draws: usize,
    pub quadrature_draws: usize,
}

impl Default for SuiteSection {
    fn default() -> Self {
        Self {
            car_draws: 50,
            dilation_samples: 20,
            markov_draws: 100,
            variance_samples: 20,
            transference_draws: 100,
            quadrature_draws: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub p_grid: Vec<PValue>,
    pub function_family: FunctionSpec,
    pub t_grid: TimeGrid,
    pub caps: Caps,
    pub bmo: ExperimentSection,
    pub lipschitz: ExperimentSection,
    pub logn: ExperimentSection,
    pub vector: VectorSection,
    pub suites: SuiteSection,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = [1.0, 1.5, 2.0, 4.0, 8.0, 16.0, f64::INFINITY];
        Self {
            seed: 20_240_917,
            trials: 100,
            p_grid: p.iter().map(|&x| PValue::from_f64(x)).collect(),
            function_family: FunctionSpec::Mixed,
            t_grid: TimeGrid::default(),
            caps: Caps::default(),
            bmo: ExperimentSection::new(&[2, 4, 8, 16], Some(50)),
            lipschitz: ExperimentSection::new(&[2, 4, 8, 16, 32, 64], None),
            logn: ExperimentSection::new(&[4, 8, 16, 32, 64, 128], Some(40)),
            vector: VectorSection {
                sizes: vec![2, 4, 8],
                k_list: vec![1, 2, 4],
                trials: Some(4),
                terms: 3,
            },
            suites: SuiteSection::default(),
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.p_grid.iter().map(|p| p.value()).collect()
    }

    pub fn trials_for(&self, section: Option<usize>) -> usize {
        section.unwrap_or(self.trials)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        for p in self.p_values() {
            if p.is_nan() || p < 1.0 {
                return Err(Error::InvalidExponent(p));
            }
        }
        let sections = [
            ("bmo", &self.bmo.sizes, self.bmo.trials),
            ("lipschitz", &self.lipschitz.sizes, self.lipschitz.trials),
            ("logn", &self.logn.sizes, self.logn.trials),
            ("vector", &self.vector.sizes, self.vector.trials),
        ];
        for (name, sizes, trials) in sections {
            if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
                return Err(Error::Config(format!("{name}: matrix sizes must be at least 2, got {n}")));
            }
            if trials == Some(0) {
                return Err(Error::Config(format!("{name}: trials must be at least 1")));
            }
        }
        if self.vector.k_list.iter().any(|&k| k == 0 || k > 4) {
            return Err(Error::Config("vector: k_list entries must lie in 1..=4".into()));
        }
        if self.vector.terms == 0 {
            return Err(Error::Config("vector: terms must be at least 1".into()));
        }
        if self.t_grid.k_min > self.t_grid.k_max || self.t_grid.per_octave == 0 {
            return Err(Error::Config("t_grid: need k_min <= k_max and per_octave >= 1".into()));
        }
        let caps = [
            self.caps.bmo,
            self.caps.lipschitz,
            self.caps.logn,
            self.caps.vector,
            self.caps.vector_bmo,
        ];
        if caps.iter().any(|c| c.is_nan()) {
            return Err(Error::Config("caps must be numbers".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
        assert!(cfg.to_json().contains("\"inf\""));
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"seed": 5, "p_grid": [2, "inf"], "function_family": {"kind": "abs"}, "caps": {"bmo": 0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.p_values(), vec![2.0, f64::INFINITY]);
        assert_eq!(cfg.function_family, FunctionSpec::Abs);
        assert_eq!(cfg.caps.bmo, 0.0);
        assert_eq!(cfg.caps.logn, 5.0);
        let pwl = ExperimentConfig::from_json(r#"{"function_family": {"kind": "pwl", "params": {}}}"#).unwrap();
        assert_eq!(pwl.function_family, FunctionSpec::Pwl { max_kinks: 32 });
        let poly =
            ExperimentConfig::from_json(r#"{"function_family": {"kind": "poly", "params": {"coeffs": [0, 0.5]}}}"#)
                .unwrap();
        assert_eq!(poly.function_family, FunctionSpec::Poly { coeffs: vec![0.0, 0.5] });
    }

    #[test]
    fn malformed_configs_are_rejected() {
        for bad in [
            "{",
            r#"{"trials": 0}"#,
            r#"{"p_grid": [0.5]}"#,
            r#"{"p_grid": ["infinity"]}"#,
            r#"{"bmo": {"sizes": [1]}}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"function_family": {"kind": "cubic"}}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
