use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::registry::Polarization;
use super::state::{Occupation, PostState, PureState};
use crate::error::{Error, Result};

/// What a set of detectors reported.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClickPattern {
    NoClick,
    /// Photon counts per detector mode.
    Resolved(Vec<(usize, u8)>),
    /// Photon counts per `(path, polarization)`; the bin is not resolved.
    FrequencyBlind(Vec<(String, Polarization, u8)>),
}

impl ClickPattern {
    pub fn is_click(&self) -> bool {
        !matches!(self, ClickPattern::NoClick)
    }

    pub fn describe(&self, registry: &super::ModeRegistry) -> String {
        match self {
            ClickPattern::NoClick => "no-click".to_string(),
            ClickPattern::Resolved(counts) => counts
                .iter()
                .map(|&(m, n)| format!("{}:{}", registry.label(m), n))
                .collect::<Vec<_>>()
                .join(" "),
            ClickPattern::FrequencyBlind(counts) => counts
                .iter()
                .map(|(p, pol, n)| format!("{}{}:{}", p, pol.suffix(), n))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectionOutcome {
    pub pattern: ClickPattern,
    pub probability: f64,
    /// State of the undetected modes; detected photons are absorbed.
    pub post_state: PostState,
}

/// Conditions `state` on every click pattern of photon-counting detectors
/// watching `detector_modes`.
///
/// The returned outcomes (including no-click) have nonzero probability and
/// sum to one. With `frequency_blind`, patterns that differ only in the bins of
/// the detected photons are merged into one outcome whose post-state is the
/// incoherent mixture of the fine-grained post-states.
pub fn condition_on_detection(
    state: &PureState,
    detector_modes: &[usize],
    frequency_blind: bool,
) -> Result<Vec<DetectionOutcome>> {
    if detector_modes.is_empty() {
        return Err(Error::InvalidComponent("detector watches no modes".into()));
    }
    if state.is_empty() {
        return Err(Error::EmptyState);
    }
    let registry = state.registry();
    let watched: BTreeSet<usize> = detector_modes.iter().copied().collect();
    if let Some(&bad) = watched.iter().find(|&&m| m >= registry.len()) {
        return Err(Error::UnknownMode(format!("#{bad}")));
    }
    let watched: Vec<usize> = watched.into_iter().collect();

    // fine-grained pattern -> post-click terms (unnormalized)
    let mut fine: BTreeMap<Vec<(usize, u8)>, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let pattern: Vec<(usize, u8)> = watched
            .iter()
            .filter(|&&m| occ.get(m) > 0)
            .map(|&m| (m, occ.get(m)))
            .collect();
        *fine
            .entry(pattern)
            .or_default()
            .entry(occ.without(&watched))
            .or_default() += amp;
    }

    let mut grouped: BTreeMap<ClickPattern, Vec<(f64, PureState)>> = BTreeMap::new();
    for (pattern, terms) in fine {
        let unnormalized = state.with_terms(terms);
        let p = unnormalized.norm_sqr();
        let Ok(post) = unnormalized.normalized() else {
            continue;
        };
        let key = if pattern.is_empty() {
            ClickPattern::NoClick
        } else if frequency_blind {
            let mut coarse: BTreeMap<(String, Polarization), u8> = BTreeMap::new();
            for (m, n) in pattern {
                let mode = registry.mode(m).expect("checked above");
                *coarse
                    .entry((mode.path.clone(), mode.polarization))
                    .or_default() += n;
            }
            ClickPattern::FrequencyBlind(
                coarse
                    .into_iter()
                    .map(|((p, pol), n)| (p, pol, n))
                    .collect(),
            )
        } else {
            ClickPattern::Resolved(pattern)
        };
        grouped.entry(key).or_default().push((p, post));
    }

    grouped
        .into_iter()
        .map(|(pattern, parts)| {
            let probability = parts.iter().map(|(p, _)| p).sum();
            Ok(DetectionOutcome {
                pattern,
                probability,
                post_state: PostState::from_weighted(parts)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Mode, ModeRegistry};
    use std::sync::Arc;

    fn registry() -> Arc<ModeRegistry> {
        let mut reg = ModeRegistry::new();
        let w1 = reg.add_bin("w1", 3.0e14).unwrap();
        let w2 = reg.add_bin("w2", 3.0e14 - 1e9).unwrap();
        reg.add_mode(Mode::new("out", w1, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::new("out", w2, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::marker("s1")).unwrap();
        reg.add_mode(Mode::marker("s2")).unwrap();
        Arc::new(reg)
    }

    #[test]
    fn photon_in_detector_mode_clicks_with_certainty() {
        let reg = registry();
        let s = PureState::basis(reg, Occupation::new(vec![1, 0, 0, 0])).unwrap();
        let out = condition_on_detection(&s, &[0], false).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-15);
        let PostState::Pure(post) = &out[0].post_state else {
            panic!("expected a pure post-state")
        };
        assert!((post.amplitude(&Occupation::vacuum(4)).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn blind_detection_merges_incoherently() {
        let reg = registry();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::from_terms(
            reg,
            [
                (Occupation::new(vec![1, 0, 1, 0]), Complex64::new(h, 0.0)),
                (Occupation::new(vec![0, 1, 0, 1]), Complex64::new(h, 0.0)),
            ],
        )
        .unwrap();
        let resolved = condition_on_detection(&s, &[0, 1], false).unwrap();
        assert_eq!(resolved.len(), 2);
        assert!(resolved.iter().all(|o| o.post_state.is_pure()));
        let blind = condition_on_detection(&s, &[0, 1], true).unwrap();
        assert_eq!(blind.len(), 1);
        assert!((blind[0].probability - 1.0).abs() < 1e-12);
        assert!(!blind[0].post_state.is_pure());
    }

    #[test]
    fn errors() {
        let reg = registry();
        let s = PureState::basis(reg, Occupation::new(vec![1, 0, 0, 0])).unwrap();
        assert!(condition_on_detection(&s, &[], false).is_err());
        assert!(matches!(
            condition_on_detection(&s, &[9], false),
            Err(Error::UnknownMode(_))
        ));
    }
}
