use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Occupation, PostState, PureState};

/// A bucket detector used for heralding: it reports only click / no click.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldDetector {
    pub name: String,
    pub modes: Vec<usize>,
    pub efficiency: f64,
    pub dark_count_probability: f64,
}

impl HeraldDetector {
    pub fn ideal(name: impl Into<String>, modes: Vec<usize>) -> Self {
        HeraldDetector {
            name: name.into(),
            modes,
            efficiency: 1.0,
            dark_count_probability: 0.0,
        }
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidComponent(format!(
                "{}: watches no modes",
                self.name
            )));
        }
        if let Some(&bad) = self.modes.iter().find(|&&m| m >= modes) {
            return Err(Error::UnknownMode(format!("#{bad}")));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidComponent(format!(
                "{}: efficiency {} outside [0, 1]",
                self.name, self.efficiency
            )));
        }
        if !(0.0..1.0).contains(&self.dark_count_probability) {
            return Err(Error::InvalidComponent(format!(
                "{}: dark-count probability {} outside [0, 1)",
                self.name, self.dark_count_probability
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HeraldLabel {
    Click,
    NoClick,
}

#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub label: HeraldLabel,
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub post_state: Option<PostState>,
}

/// Click / no-click statistics of a herald on a pure state.
///
/// `P(click) = 1 - (1 - dark)(1 - efficiency · P(photon present))`. Photons
/// reaching the detector are absorbed whether or not it fires, so post-states
/// are mixtures over the absorbed patterns. With an ideal detector the
/// no-click state is the projection onto an empty watched set.
pub fn herald_outcomes(state: &PureState, detector: &HeraldDetector) -> Result<[HeraldOutcome; 2]> {
    detector.validate(state.registry().len())?;
    let mut by_pattern: BTreeMap<Vec<u8>, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let pattern: Vec<u8> = detector.modes.iter().map(|&m| occ.get(m)).collect();
        *by_pattern
            .entry(pattern)
            .or_default()
            .entry(occ.without(&detector.modes))
            .or_default() += amp;
    }

    let dark = detector.dark_count_probability;
    let fire_if_present = 1.0 - (1.0 - dark) * (1.0 - detector.efficiency);
    let mut click = Vec::new();
    let mut silent = Vec::new();
    for (pattern, terms) in by_pattern {
        let part = state.with_terms(terms);
        let weight = part.norm_sqr();
        let Ok(part) = part.normalized() else {
            continue;
        };
        let p_fire = if pattern.iter().all(|&n| n == 0) {
            dark
        } else {
            fire_if_present
        };
        click.push((weight * p_fire, part.clone()));
        silent.push((weight * (1.0 - p_fire), part));
    }

    let outcome = |label, parts: Vec<(f64, PureState)>| -> Result<HeraldOutcome> {
        let probability: f64 = parts.iter().map(|(w, _)| w).sum();
        let post_state = if probability > 0.0 {
            Some(PostState::from_weighted(parts)?)
        } else {
            None
        };
        Ok(HeraldOutcome {
            label,
            probability,
            post_state,
        })
    };
    Ok([
        outcome(HeraldLabel::Click, click)?,
        outcome(HeraldLabel::NoClick, silent)?,
    ])
}

/// [`herald_outcomes`] over a pure or mixed state: each component is heralded
/// and the results are recombined with the component weights.
pub fn herald_outcomes_mixed(
    state: &PostState,
    detector: &HeraldDetector,
) -> Result<[HeraldOutcome; 2]> {
    let mut click = Vec::new();
    let mut silent = Vec::new();
    for (w, s) in state.components() {
        let [c, n] = herald_outcomes(s, detector)?;
        for (out, acc) in [(c, &mut click), (n, &mut silent)] {
            if let Some(post) = out.post_state {
                for (pw, ps) in post.components() {
                    acc.push((w * out.probability * pw, ps.clone()));
                }
            }
        }
    }
    let finish = |label, parts: Vec<(f64, PureState)>| -> Result<HeraldOutcome> {
        let probability = parts.iter().map(|(w, _)| w).sum();
        let post_state = if probability > 0.0 {
            Some(PostState::from_weighted(parts)?)
        } else {
            None
        };
        Ok(HeraldOutcome {
            label,
            probability,
            post_state,
        })
    };
    Ok([
        finish(HeraldLabel::Click, click)?,
        finish(HeraldLabel::NoClick, silent)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::AomCoupler;
    use crate::fock::{apply_mode_unitary, Mode, ModeRegistry, Polarization};
    use std::sync::Arc;

    fn one_mode() -> (Arc<ModeRegistry>, usize) {
        let mut reg = ModeRegistry::new();
        let w = reg.add_bin("w", 3.0e14).unwrap();
        let m = reg.add_mode(Mode::new("u", w, Polarization::Y)).unwrap();
        reg.add_mode(Mode::marker("tag")).unwrap();
        (Arc::new(reg), m)
    }

    #[test]
    fn present_photon_clicks_on_ideal_detector() {
        let (reg, m) = one_mode();
        let s = PureState::basis(reg, Occupation::from_pairs(2, &[(m, 1)]).unwrap()).unwrap();
        let [click, silent] = herald_outcomes(&s, &HeraldDetector::ideal("U", vec![m])).unwrap();
        assert_eq!(click.probability, 1.0);
        assert_eq!(silent.probability, 0.0);
        assert!(silent.post_state.is_none());
    }

    #[test]
    fn vacuum_clicks_at_the_dark_count_rate() {
        let (reg, m) = one_mode();
        let s = PureState::basis(reg, Occupation::from_pairs(2, &[(1, 1)]).unwrap()).unwrap();
        let det = HeraldDetector {
            dark_count_probability: 0.013,
            ..HeraldDetector::ideal("U", vec![m])
        };
        let [click, silent] = herald_outcomes(&s, &det).unwrap();
        assert!((click.probability - 0.013).abs() < 1e-15);
        assert!((click.probability + silent.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unshifted_light_heralds_failure() {
        // one arm of the heralded shifter: shifted with probability 0.8,
        // otherwise the photon stays in the watched mode
        let mut reg = ModeRegistry::new();
        let w1 = reg.add_bin("w1", 3.3e14).unwrap();
        let w3 = reg.add_bin("w3", 3.3e14 + 8.0e8).unwrap();
        let unshifted = reg
            .add_mode(Mode::new("armA", w3, Polarization::Y))
            .unwrap();
        let shifted = reg
            .add_mode(Mode::new("armA", w1, Polarization::Y))
            .unwrap();
        let reg = Arc::new(reg);
        let theta = 0.8f64.sqrt().asin();
        let u = crate::components::fbs_unitary(
            &AomCoupler::new("aomA", vec![(unshifted, shifted)], theta, 8.0e8),
            &reg,
        )
        .unwrap();
        let s = PureState::basis(
            reg.clone(),
            Occupation::from_pairs(2, &[(unshifted, 1)]).unwrap(),
        )
        .unwrap();
        let out = apply_mode_unitary(&s, &u).unwrap();
        let [click, silent] =
            herald_outcomes(&out, &HeraldDetector::ideal("U", vec![unshifted])).unwrap();
        assert!((silent.probability - 0.8).abs() < 1e-12);
        assert!((click.probability - 0.2).abs() < 1e-12);
        assert!(silent.post_state.unwrap().is_pure());
    }

    #[test]
    fn inefficient_detector_mixes_outcomes() {
        let (reg, m) = one_mode();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::from_terms(
            reg,
            [
                (Occupation::new(vec![1, 0]), Complex64::new(h, 0.0)),
                (Occupation::new(vec![0, 1]), Complex64::new(h, 0.0)),
            ],
        )
        .unwrap();
        let det = HeraldDetector {
            efficiency: 0.6,
            dark_count_probability: 0.1,
            ..HeraldDetector::ideal("U", vec![m])
        };
        let [click, silent] = herald_outcomes(&s, &det).unwrap();
        let expected = 1.0 - (1.0 - 0.1) * (1.0 - 0.6 * 0.5);
        assert!((click.probability - expected).abs() < 1e-12);
        assert!((click.probability + silent.probability - 1.0).abs() < 1e-12);
        assert!(!silent.post_state.unwrap().is_pure());
    }
}
