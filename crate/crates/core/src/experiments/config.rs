//! Experiment configuration: a flat JSON document with fail-fast parsing.
//! Unknown keys are rejected rather than silently accepted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DPolicy {
    /// Every divisor d >= 2 of q - 1.
    All,
    /// Squarefree divisors; others are emitted as skipped rows.
    Squarefree,
    /// Prime divisors; others are emitted as skipped rows.
    Primes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XPolicy {
    /// Fixed cutoffs, used for every q.
    Absolute(Vec<u64>),
    /// Cutoffs floor(q^e) for each exponent e.
    Powers(Vec<f64>),
}

impl XPolicy {
    pub fn cutoffs(&self, q: u64) -> Vec<u64> {
        match self {
            XPolicy::Absolute(xs) => xs.clone(),
            XPolicy::Powers(es) => es
                .iter()
                .map(|&e| ((q as f64).powf(e).floor() as u64).max(1))
                .collect(),
        }
    }
}

/// Named absolute constants that the asymptotic statements leave
/// unspecified. All must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    /// Generic envelope constant: the Erdos-Turan interval bound and the
    /// least-nonone exponent bound.
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    /// Turan-Kubilius second-moment constant.
    pub c_tk: f64,
    /// Halasz-type right-hand-side scale.
    pub halasz_c: f64,
    /// Friable-product constant in the S_delta density lower bound.
    pub c0: f64,
    /// Exponent (> 1) in the large-argument threshold rho(1/delta)^c.
    pub arg_c: f64,
    /// The fiber constant in the weak-equidistribution class.
    pub weak_equi: f64,
    /// Little-c exponent constant in the delta(d, q) formula.
    pub delta_c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 10.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            c_tk: 4.0,
            halasz_c: 1.0,
            c0: 1.0,
            arg_c: 2.0,
            weak_equi: 100.0,
            delta_c: 1.0,
        }
    }
}

impl Constants {
    fn validate(&self) -> Result<()> {
        let all = [
            ("C", self.c),
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("C_TK", self.c_tk),
            ("halasz_C", self.halasz_c),
            ("c0", self.c0),
            ("arg_c", self.arg_c),
            ("weak_equi", self.weak_equi),
            ("delta_c", self.delta_c),
        ];
        for (name, v) in all {
            if !(v > 0.0) {
                return Err(Error::Config(format!("constant {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Explicit prime moduli. Exactly one of q_list / q_range must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<u64>>,
    /// Inclusive range; all primes inside are used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_range: Option<(u64, u64)>,
    pub d_policy: DPolicy,
    pub delta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub k: u32,
    pub x_policy: XPolicy,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// The desk-scale default corpus: primes q with q - 1 highly divisible,
    /// so divisors d can be odd, squarefree and with large P-(d).
    fn default() -> Self {
        ExperimentConfig {
            q_list: Some(vec![211, 421, 631, 1051, 2311, 4621]),
            q_range: None,
            d_policy: DPolicy::Squarefree,
            delta: 0.35,
            eta: 0.5,
            epsilon: 0.25,
            k: 1,
            x_policy: XPolicy::Powers(vec![0.4, 0.55, 0.7]),
            constants: Constants::default(),
            seeds: vec![1, 2, 3, 4],
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.q_list, &self.q_range) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set q_list or q_range, not both".into()))
            }
            (None, None) => return Err(Error::Config("one of q_list / q_range is required".into())),
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0,1), got {}", self.delta)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("eta must be in (0,1), got {}", self.eta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        self.constants.validate()?;
        for q in self.moduli()? {
            if !arith::is_prime(q) || q < 3 {
                return Err(Error::Config(format!("modulus {q} is not an odd prime")));
            }
        }
        if let XPolicy::Powers(es) = &self.x_policy {
            if es.iter().any(|&e| !(0.0 < e && e <= 1.5)) {
                return Err(Error::Config("power exponents must lie in (0, 1.5]".into()));
            }
        }
        Ok(())
    }

    /// The resolved ascending list of prime moduli.
    pub fn moduli(&self) -> Result<Vec<u64>> {
        if let Some(list) = &self.q_list {
            let mut qs = list.clone();
            qs.sort_unstable();
            qs.dedup();
            return Ok(qs);
        }
        let (lo, hi) = self.q_range.ok_or_else(|| {
            Error::Config("one of q_list / q_range is required".into())
        })?;
        if hi < lo {
            return Err(Error::Config(format!("empty q_range ({lo}, {hi})")));
        }
        Ok((lo..=hi).filter(|&n| arith::is_prime(n)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        assert_eq!(config.moduli().unwrap()[0], 211);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let config = ExperimentConfig::default();
        let text = config.to_json();
        let again = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, again);
        assert_eq!(text, again.to_json());
    }

    #[test]
    fn unknown_keys_fail_fast() {
        let mut value: serde_json::Value =
            serde_json::from_str(&ExperimentConfig::default().to_json()).unwrap();
        value["surprise"] = serde_json::json!(1);
        let err = ExperimentConfig::from_json(&value.to_string()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("surprise"));
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::default();
        c.delta = 1.2;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.q_list = Some(vec![10]);
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.q_range = Some((100, 120));
        assert!(c.validate().is_err()); // both selectors set

        let mut c = ExperimentConfig::default();
        c.q_list = None;
        c.q_range = Some((100, 130));
        c.validate().unwrap();
        assert_eq!(c.moduli().unwrap(), vec![101, 103, 107, 109, 113, 127]);
    }
}
