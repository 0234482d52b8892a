use std::collections::BTreeSet;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use super::circuit::Circuit;
use super::document::CircuitDocument;
use super::run::compiled_unitary;
use crate::components::Component;
use crate::error::{Error, Result};
use crate::fock::{
    apply_mode_unitary, enumerate_occupations, transition_amplitude_oracle, ModeUnitary,
    Occupation, PureState, ORACLE_MAX_PHOTONS,
};

/// Agreement threshold between simulator and permanent amplitudes.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub unitary: String,
    pub inputs: usize,
    pub amplitudes_compared: usize,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares simulator amplitudes with the permanent formula for every input
/// occupation of `inputs` and every output of the same photon number.
pub fn compare_with_oracle(
    label: &str,
    inputs: &[Occupation],
    u: &ModeUnitary,
    registry: &Arc<crate::fock::ModeRegistry>,
) -> Result<OracleCheck> {
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for input in inputs {
        let photons = input.total();
        let evolved =
            apply_mode_unitary(&PureState::basis(Arc::clone(registry), input.clone())?, u)?;
        for output in enumerate_occupations(registry.len(), photons) {
            let expected = transition_amplitude_oracle(input, &output, u)?;
            worst = worst.max((evolved.amplitude(&output) - expected).norm());
            compared += 1;
        }
    }
    Ok(OracleCheck {
        unitary: label.to_string(),
        inputs: inputs.len(),
        amplitudes_compared: compared,
        max_abs_diff: worst,
    })
}

/// Oracle diff for a herald-free document, plus `random` Haar-random
/// unitaries on the same registry and inputs.
pub fn oracle_report(doc: &CircuitDocument, random: usize, seed: u64) -> Result<OracleReport> {
    let circuit = Circuit::build(doc)?;
    if let Some(i) = circuit
        .components()
        .position(|c| matches!(c, Component::Herald(_)))
    {
        return Err(Error::document(
            format!("components[{i}]"),
            "the oracle needs a herald-free circuit",
        ));
    }
    let inputs: Vec<Occupation> = circuit
        .initial
        .terms()
        .map(|(o, _)| o.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(big) = inputs.iter().find(|o| o.total() > ORACLE_MAX_PHOTONS) {
        return Err(Error::TooManyPhotons {
            found: big.total(),
            max: ORACLE_MAX_PHOTONS,
        });
    }
    let registry = &circuit.registry;
    let mut checks = vec![compare_with_oracle(
        "document",
        &inputs,
        &compiled_unitary(&circuit)?,
        registry,
    )?];
    let mut rng = StdRng::seed_from_u64(seed);
    for k in 0..random {
        let u = ModeUnitary::random(registry.len(), &mut rng);
        checks.push(compare_with_oracle(
            &format!("haar[{k}]"),
            &inputs,
            &u,
            registry,
        )?);
    }
    let max_abs_diff = checks.iter().map(|c| c.max_abs_diff).fold(0.0, f64::max);
    Ok(OracleReport {
        checks,
        max_abs_diff,
        tolerance: ORACLE_TOLERANCE,
        passed: max_abs_diff <= ORACLE_TOLERANCE,
    })
}
