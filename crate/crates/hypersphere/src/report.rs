//! Structured results of the numerical law checks.

use serde::{Deserialize, Serialize};

/// Identifies the quadrature rule a check ran under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDescriptor {
    /// Degree parameter the rule was built for.
    pub n: usize,
    /// Certified polynomial exactness.
    pub exactness: usize,
    /// Deterministic fingerprint of nodes and weights.
    pub fingerprint: String,
}

/// Result of one law verification.
///
/// For ordinary laws `pass` means the residual stayed at or below the
/// threshold. Laws marked `expect_violation` assert the opposite: the check
/// passes only when a witness with residual above the threshold was found,
/// and a failure to find one is reported as a failed (inconclusive) check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub law_id: String,
    pub pass: bool,
    pub expect_violation: bool,
    pub residual_max: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    pub seed: u64,
    pub samples: u64,
    pub rule: RuleDescriptor,
}

impl CheckReport {
    /// Report for a law expected to hold.
    pub fn holds(
        law_id: impl Into<String>,
        residual_max: f64,
        threshold: f64,
        rule: RuleDescriptor,
    ) -> Self {
        CheckReport {
            law_id: law_id.into(),
            pass: residual_max <= threshold,
            expect_violation: false,
            residual_max,
            threshold,
            witness: None,
            seed: 0,
            samples: 0,
            rule,
        }
    }

    /// Report for a law expected to be violated; `residual_max` is the best
    /// witness found and the check passes only if it clears the threshold.
    pub fn violated(
        law_id: impl Into<String>,
        residual_max: f64,
        threshold: f64,
        rule: RuleDescriptor,
    ) -> Self {
        CheckReport {
            law_id: law_id.into(),
            pass: residual_max > threshold,
            expect_violation: true,
            residual_max,
            threshold,
            witness: None,
            seed: 0,
            samples: 0,
            rule,
        }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }
}
