use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_finite, OutcomeRow, ScenarioResult};
use crate::components::{compile_unitary_chain, propagate, AomCoupler, Component};
use crate::error::{Error, Result};
use crate::fock::{
    concurrence, condition_on_detection, enumerate_occupations, fidelity,
    partial_trace_postselected, phased_pair, transition_amplitude_oracle, Factor, Mode,
    ModeRegistry, Occupation, Polarization, PureState, SubsystemSelector,
};

/// How output frequency relates to what the detectors resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErasureGeometry {
    /// Each source enters the AOM along its own direction; the diffracted
    /// beam leaves along the other source's direction. Detectors resolve
    /// direction only.
    #[default]
    DirectionCorrelated,
    /// Both sources share one beam that passes a prism-AOM-prism frequency
    /// beam splitter; detectors must resolve frequency.
    PrismSorted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErasureConfig {
    /// Emission frequency of source 1, Hz.
    pub omega_1: f64,
    /// Emission frequency of source 2, Hz.
    pub omega_2: f64,
    /// AOM interaction angle `η l`.
    pub theta: f64,
    pub frequency_blind: bool,
    pub geometry: ErasureGeometry,
}

impl Default for ErasureConfig {
    fn default() -> Self {
        ErasureConfig {
            omega_1: 3.3e14,
            omega_2: 3.3e14 - 1.0e9,
            theta: FRAC_PI_4,
            frequency_blind: false,
            geometry: ErasureGeometry::DirectionCorrelated,
        }
    }
}

impl ErasureConfig {
    pub fn with_theta(theta: f64) -> Self {
        ErasureConfig {
            theta,
            ..Self::default()
        }
    }

    /// Drive frequency implied by the two sources.
    pub fn modulation_frequency(&self) -> f64 {
        (self.omega_1 - self.omega_2).abs()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("omega_1", self.omega_1), ("omega_2", self.omega_2)] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be a positive frequency, got {f}"),
                ));
            }
        }
        if self.omega_1 == self.omega_2 {
            return Err(Error::param("omega_2", "sources must differ in frequency"));
        }
        check_finite("theta", self.theta)
    }
}

struct Layout {
    registry: Arc<ModeRegistry>,
    /// Mode source 1 / source 2 emits into.
    inputs: [usize; 2],
    /// Detector modes grouped by what counts as one output "direction".
    directions: [Vec<usize>; 2],
    markers: Option<[usize; 2]>,
    circuit: Vec<Component>,
}

impl Layout {
    fn detectors(&self) -> Vec<usize> {
        self.directions.iter().flatten().copied().collect()
    }
}

fn layout(config: &ErasureConfig, markers: bool) -> Result<Layout> {
    config.validate()?;
    let mut reg = ModeRegistry::new();
    let w1 = reg.add_bin("w1", config.omega_1)?;
    let w2 = reg.add_bin("w2", config.omega_2)?;
    let none = Polarization::None;
    let (inputs, directions) = match config.geometry {
        ErasureGeometry::DirectionCorrelated => {
            let d1w1 = reg.add_mode(Mode::new("d1", w1, none))?;
            let d1w2 = reg.add_mode(Mode::new("d1", w2, none))?;
            let d2w1 = reg.add_mode(Mode::new("d2", w1, none))?;
            let d2w2 = reg.add_mode(Mode::new("d2", w2, none))?;
            ([d1w1, d2w2], [vec![d1w1, d1w2], vec![d2w1, d2w2]])
        }
        ErasureGeometry::PrismSorted => {
            let a = reg.add_mode(Mode::new("out", w1, none))?;
            let b = reg.add_mode(Mode::new("out", w2, none))?;
            ([a, b], [vec![a], vec![b]])
        }
    };
    let markers = if markers {
        Some([
            reg.add_mode(Mode::marker("s1"))?,
            reg.add_mode(Mode::marker("s2"))?,
        ])
    } else {
        None
    };
    let aom = AomCoupler::new(
        "fbs",
        vec![(inputs[0], inputs[1])],
        config.theta,
        config.modulation_frequency(),
    );
    Ok(Layout {
        registry: Arc::new(reg),
        inputs,
        directions,
        markers,
        circuit: vec![Component::Aom(aom)],
    })
}

fn one(reg: &ModeRegistry, modes: &[usize]) -> Result<Occupation> {
    let pairs: Vec<(usize, u8)> = modes.iter().map(|&m| (m, 1)).collect();
    Occupation::from_pairs(reg.len(), &pairs)
}

/// Single photon from either of two frequency-mismatched sources, passed
/// through a frequency beam splitter and detected.
///
/// The sources are tracked by marker modes `s1`, `s2`; the input is
/// `(|s1⟩|ω1⟩ + |s2⟩|ω2⟩)/√2`. For every click the source state is reduced
/// to the `{s1, s2}` basis and compared with the closest
/// `(|s1⟩ + e^{iφ}|s2⟩)/√2`. Top-level fields describe the first click
/// outcome (the ω1 direction); the distinguishability is averaged over
/// clicks.
pub fn run_erasure(config: &ErasureConfig) -> Result<ScenarioResult> {
    let lay = layout(config, true)?;
    let reg = &lay.registry;
    let [s1, s2] = lay.markers.expect("requested markers");
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let input = PureState::from_terms(
        Arc::clone(reg),
        [
            (one(reg, &[s1, lay.inputs[0]])?, h),
            (one(reg, &[s2, lay.inputs[1]])?, h),
        ],
    )?;
    let output = propagate(&input, &lay.circuit)?;
    let outcomes = condition_on_detection(&output, &lay.detectors(), config.frequency_blind)?;

    let which = SubsystemSelector::new(vec![Factor::Which(vec![s1, s2])]);
    let pair = SubsystemSelector::new(vec![Factor::Occupied(s1), Factor::Occupied(s2)]);
    let mut result = ScenarioResult::new("erasure");
    result.parameters.insert("theta".into(), config.theta);
    result
        .parameters
        .insert("omega_1_hz".into(), config.omega_1);
    result
        .parameters
        .insert("omega_2_hz".into(), config.omega_2);
    result.parameters.insert(
        "frequency_blind".into(),
        f64::from(u8::from(config.frequency_blind)),
    );

    let mut weighted_d = 0.0;
    let mut clicks = 0.0;
    for outcome in &outcomes {
        let mut row = OutcomeRow::new(outcome.pattern.describe(reg), outcome.probability);
        if outcome.pattern.is_click() {
            let (_, rho) = partial_trace_postselected(&outcome.post_state, &which, false)?;
            let (_, rho_pair) = partial_trace_postselected(&outcome.post_state, &pair, false)?;
            let d = (rho.get(0, 0).re - rho.get(1, 1).re).abs();
            let coherence = rho.get(1, 0);
            let phase = coherence.arg();
            let best = fidelity(&rho, &phased_pair(2, 0, 1, phase))?;
            let c = concurrence(&rho_pair)?;
            row.fidelity = Some(best);
            row.concurrence = Some(c);
            row.distinguishability = Some(d);
            weighted_d += outcome.probability * d;
            clicks += outcome.probability;
            if result.conditioned_state.is_none() {
                let plus_i = fidelity(&rho, &phased_pair(2, 0, 1, std::f64::consts::FRAC_PI_2))?;
                result.metrics.insert("bell_phase".into(), phase);
                result.metrics.insert("fidelity_plus_i".into(), plus_i);
                result
                    .metrics
                    .insert("p_s1_given_click".into(), rho.get(0, 0).re);
                result.target = Some(format!("(|s1⟩ + e^(i·{phase:.6})|s2⟩)/√2"));
                result.fidelity_to_target = Some(best);
                result.concurrence = Some(c);
                result.conditioned_state = Some(rho);
            }
        }
        result.outcomes.push(row);
    }
    result.success_probability = clicks;
    result.which_way_distinguishability = Some(if clicks > 0.0 {
        weighted_d / clicks
    } else {
        1.0
    });
    result.warnings = lay.circuit.iter().flat_map(Component::warnings).collect();
    Ok(result)
}

/// Two photons, one from each source, meeting on the frequency beam splitter.
/// Reports the probability of one photon per output direction, both from the
/// simulator and from the permanent oracle.
pub fn run_hom(config: &ErasureConfig) -> Result<ScenarioResult> {
    if config.frequency_blind && config.geometry == ErasureGeometry::PrismSorted {
        return Err(Error::param(
            "frequency_blind",
            "coincidences between frequency bins need frequency-resolving detectors",
        ));
    }
    let lay = layout(config, false)?;
    let reg = &lay.registry;
    let input = PureState::basis(Arc::clone(reg), one(reg, &lay.inputs)?)?;
    let output = propagate(&input, &lay.circuit)?;

    let in_direction = |occ: &Occupation, d: usize| -> usize {
        lay.directions[d].iter().map(|&m| occ.get(m) as usize).sum()
    };
    let coincident = |occ: &Occupation| in_direction(occ, 0) == 1 && in_direction(occ, 1) == 1;
    let coincidence = output.probability_where(coincident);

    let u = compile_unitary_chain(&lay.circuit, reg)?;
    let input_occ = one(reg, &lay.inputs)?;
    let mut oracle = 0.0;
    for out in enumerate_occupations(reg.len(), 2) {
        if coincident(&out) {
            oracle += transition_amplitude_oracle(&input_occ, &out, &u)?.norm_sqr();
        }
    }

    let mut result = ScenarioResult::new("hom");
    result.parameters.insert("theta".into(), config.theta);
    result
        .parameters
        .insert("omega_1_hz".into(), config.omega_1);
    result
        .parameters
        .insert("omega_2_hz".into(), config.omega_2);
    for outcome in condition_on_detection(&output, &lay.detectors(), config.frequency_blind)? {
        result.outcomes.push(OutcomeRow::new(
            outcome.pattern.describe(reg),
            outcome.probability,
        ));
    }
    result.success_probability = coincidence;
    result.metrics.insert("coincidence".into(), coincidence);
    result.metrics.insert("coincidence_oracle".into(), oracle);
    result.metrics.insert("bunched".into(), 1.0 - coincidence);
    result.warnings = lay.circuit.iter().flat_map(Component::warnings).collect();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn erasure_at_fifty_percent() {
        let r = run_erasure(&ErasureConfig::with_theta(FRAC_PI_4)).unwrap();
        assert!(r.which_way_distinguishability.unwrap() < 1e-12);
        assert!((r.fidelity_to_target.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.metrics["fidelity_plus_i"] - 1.0).abs() < 1e-12);
        let clicks: Vec<_> = r
            .outcomes
            .iter()
            .filter(|o| o.outcome != "no-click")
            .collect();
        assert_eq!(clicks.len(), 2);
        for c in clicks {
            assert!((c.probability - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn erasure_without_coupling_reveals_the_source() {
        let r = run_erasure(&ErasureConfig::with_theta(0.0)).unwrap();
        assert!((r.which_way_distinguishability.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.concurrence.unwrap() < 1e-12);
        let rho = r.conditioned_state.unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erasure_at_pi_over_8() {
        let theta = PI / 8.0;
        let r = run_erasure(&ErasureConfig::with_theta(theta)).unwrap();
        assert!((r.which_way_distinguishability.unwrap() - (PI / 4.0).cos()).abs() < 1e-12);
        let expected = (1.0 + (PI / 4.0).sin()) / 2.0;
        assert!((r.fidelity_to_target.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn blind_detection_after_a_shared_beam_keeps_which_way_mixed() {
        let cfg = ErasureConfig {
            geometry: ErasureGeometry::PrismSorted,
            frequency_blind: true,
            ..ErasureConfig::default()
        };
        let r = run_erasure(&cfg).unwrap();
        // the source is unknown but the state is a mixture: no entanglement
        assert!(r.which_way_distinguishability.unwrap() < 1e-12);
        assert!(r.concurrence.unwrap() < 1e-12);
        let resolved = run_erasure(&ErasureConfig {
            frequency_blind: false,
            ..cfg
        })
        .unwrap();
        assert!((resolved.concurrence.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_dip() {
        let r = run_hom(&ErasureConfig::with_theta(FRAC_PI_4)).unwrap();
        assert!(r.metrics["coincidence"].abs() < 1e-15);
        assert!(r.metrics["coincidence_oracle"].abs() < 1e-15);
        let r = run_hom(&ErasureConfig::with_theta(0.0)).unwrap();
        assert!((r.metrics["coincidence"] - 1.0).abs() < 1e-15);
        let r = run_hom(&ErasureConfig::with_theta(PI / 8.0)).unwrap();
        assert!((r.metrics["coincidence"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let same = ErasureConfig {
            omega_2: 3.3e14,
            ..ErasureConfig::default()
        };
        assert!(run_erasure(&same).is_err());
        let blind_prism = ErasureConfig {
            geometry: ErasureGeometry::PrismSorted,
            frequency_blind: true,
            ..ErasureConfig::default()
        };
        assert!(run_hom(&blind_prism).is_err());
    }
}
