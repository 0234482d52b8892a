//! End-to-end runs of the frequency beam splitter applications.
//!
//! Every runner builds its circuit from [`crate::components`], evolves the
//! input through [`crate::fock`] and summarizes the conditioned output in a
//! [`ScenarioResult`].

mod biexciton;
mod erasure;

pub use biexciton::{
    run_biexciton_fbs, run_biexciton_fbs_prime, BiexcitonConfig, DetectorSettings,
};
pub use erasure::{run_erasure, run_hom, ErasureConfig, ErasureGeometry};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fock::DensityMatrix;

/// One row of a scenario's outcome breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub outcome: String,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinguishability: Option<f64>,
}

impl OutcomeRow {
    fn new(outcome: impl Into<String>, probability: f64) -> Self {
        OutcomeRow {
            outcome: outcome.into(),
            probability,
            fidelity: None,
            concurrence: None,
            distinguishability: None,
        }
    }
}

/// Summary of a scenario run. Quantities that do not apply to a scenario are
/// `None`.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub parameters: BTreeMap<String, f64>,
    pub success_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditioned_state: Option<DensityMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_to_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which_way_distinguishability: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub outcomes: Vec<OutcomeRow>,
    pub warnings: Vec<String>,
}

impl ScenarioResult {
    fn new(scenario: &str) -> Self {
        ScenarioResult {
            scenario: scenario.to_string(),
            parameters: BTreeMap::new(),
            success_probability: 0.0,
            conditioned_state: None,
            target: None,
            fidelity_to_target: None,
            concurrence: None,
            which_way_distinguishability: None,
            metrics: BTreeMap::new(),
            outcomes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Sum of the breakdown probabilities.
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|r| r.probability).sum()
    }
}

fn check_finite(name: &'static str, v: f64) -> crate::Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::param(
            name,
            format!("must be finite, got {v}"),
        ))
    }
}
