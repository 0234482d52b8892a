use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::registry::ModeRegistry;
use crate::error::{Error, Result};

/// Default cap on the total photon number of a state.
pub const DEFAULT_MAX_PHOTONS: usize = 4;

/// Amplitudes with modulus below this are dropped after every evolution step.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

pub(crate) const NORM_TOLERANCE: f64 = 1e-9;

/// Photon count per registered mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn vacuum(modes: usize) -> Self {
        Occupation(vec![0; modes])
    }

    pub fn new(counts: Vec<u8>) -> Self {
        Occupation(counts)
    }

    /// Occupation with the listed `(mode, count)` entries set.
    pub fn from_pairs(modes: usize, pairs: &[(usize, u8)]) -> Result<Self> {
        let mut counts = vec![0u8; modes];
        for &(m, n) in pairs {
            let slot = counts
                .get_mut(m)
                .ok_or_else(|| Error::UnknownMode(format!("#{m}")))?;
            *slot += n;
        }
        Ok(Occupation(counts))
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0.get(mode).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Copy with the given modes emptied.
    pub fn without(&self, modes: &[usize]) -> Self {
        let mut counts = self.0.clone();
        for &m in modes {
            if let Some(c) = counts.get_mut(m) {
                *c = 0;
            }
        }
        Occupation(counts)
    }

    /// Human-readable `|a@w1/x:1, b@w2/x:1⟩` rendering.
    pub fn describe(&self, registry: &ModeRegistry) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| format!("{}:{}", registry.label(i), n))
            .collect();
        format!("|{}⟩", parts.join(", "))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Sparse superposition of Fock basis states over a shared registry.
#[derive(Debug, Clone)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<Occupation, Complex64>,
    max_photons: usize,
    mixed_sectors: bool,
}

impl PureState {
    /// Builds a normalized state from `(occupation, amplitude)` terms.
    ///
    /// Repeated occupations are summed. All terms must share one photon number.
    pub fn from_terms(
        registry: Arc<ModeRegistry>,
        terms: impl IntoIterator<Item = (Occupation, Complex64)>,
    ) -> Result<Self> {
        Self::build(registry, terms, DEFAULT_MAX_PHOTONS, false)
    }

    /// Like [`PureState::from_terms`] but allows terms with different photon
    /// numbers and a custom photon cap.
    pub fn build(
        registry: Arc<ModeRegistry>,
        terms: impl IntoIterator<Item = (Occupation, Complex64)>,
        max_photons: usize,
        mixed_sectors: bool,
    ) -> Result<Self> {
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            *map.entry(occ).or_default() += amp;
        }
        let state = PureState {
            registry,
            terms: map,
            max_photons,
            mixed_sectors,
        };
        state.check_keys()?;
        state.normalized()
    }

    /// A single Fock basis state.
    pub fn basis(registry: Arc<ModeRegistry>, occupation: Occupation) -> Result<Self> {
        Self::from_terms(registry, [(occupation, Complex64::new(1.0, 0.0))])
    }

    fn check_keys(&self) -> Result<()> {
        let n = self.registry.len();
        let mut sector: Option<usize> = None;
        for occ in self.terms.keys() {
            if occ.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: occ.len(),
                });
            }
            let total = occ.total();
            if total > self.max_photons {
                return Err(Error::TooManyPhotons {
                    found: total,
                    max: self.max_photons,
                });
            }
            match sector {
                Some(s) if s != total && !self.mixed_sectors => {
                    return Err(Error::MixedSectors {
                        first: s,
                        second: total,
                    })
                }
                None => sector = Some(total),
                _ => {}
            }
        }
        Ok(())
    }

    /// Same metadata, new terms, no normalization. Small amplitudes are pruned.
    pub(crate) fn with_terms(&self, terms: BTreeMap<Occupation, Complex64>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, a)| a.norm() >= PRUNE_THRESHOLD)
            .collect();
        PureState {
            registry: Arc::clone(&self.registry),
            terms,
            max_photons: self.max_photons,
            mixed_sectors: self.mixed_sectors,
        }
    }

    /// Rescales to unit norm. Fails on an empty or zero-norm state.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if self.terms.is_empty() || norm < PRUNE_THRESHOLD {
            return Err(Error::EmptyState);
        }
        for a in self.terms.values_mut() {
            *a /= norm;
        }
        Ok(self)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn spans_sectors(&self) -> bool {
        self.mixed_sectors
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.terms.get(occupation).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms
            .values()
            .map(|a| a.norm_sqr())
            .fold(0.0, |acc, p| acc + p)
    }

    /// Largest photon number among the terms.
    pub fn photon_number(&self) -> usize {
        self.terms.keys().map(Occupation::total).max().unwrap_or(0)
    }

    /// Total probability of the terms matching `pred`.
    pub fn probability_where(&self, pred: impl Fn(&Occupation) -> bool) -> f64 {
        self.terms
            .iter()
            .filter(|(o, _)| pred(o))
            .map(|(_, a)| a.norm_sqr())
            .fold(0.0, |acc, p| acc + p)
    }

    /// Keeps the terms matching `pred`; returns their weight and the
    /// renormalized remainder (`None` if nothing survives).
    pub fn project(&self, pred: impl Fn(&Occupation) -> bool) -> (f64, Option<PureState>) {
        let kept: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(o, _)| pred(o))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        let state = self.with_terms(kept);
        let p = state.norm_sqr();
        (p, state.normalized().ok())
    }

    /// Maximum modulus difference between the amplitudes of two states.
    pub fn max_amplitude_diff(&self, other: &PureState) -> f64 {
        let mut diff: f64 = 0.0;
        for (o, a) in &self.terms {
            diff = diff.max((a - other.amplitude(o)).norm());
        }
        for (o, b) in &other.terms {
            if !self.terms.contains_key(o) {
                diff = diff.max(b.norm());
            }
        }
        diff
    }
}

/// Incoherent mixture of pure states. Weights sum to one.
#[derive(Debug, Clone)]
pub struct Ensemble {
    components: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Builds a mixture from unnormalized weights; zero weights are dropped.
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::EmptyState);
        }
        let components = components
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, s)| (w / total, s))
            .collect();
        Ok(Ensemble { components })
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }
}

/// State of the undetected remainder after a measurement.
#[derive(Debug, Clone)]
pub enum PostState {
    Pure(PureState),
    Mixed(Ensemble),
}

impl PostState {
    /// Collapses single-component mixtures to a pure state.
    pub fn from_weighted(mut components: Vec<(f64, PureState)>) -> Result<Self> {
        components.retain(|(w, _)| *w > 0.0);
        if components.len() == 1 {
            return Ok(PostState::Pure(components.pop().expect("one component").1));
        }
        Ensemble::new(components).map(PostState::Mixed)
    }

    /// `(weight, state)` view; a pure state is a single unit-weight component.
    pub fn components(&self) -> Vec<(f64, &PureState)> {
        match self {
            PostState::Pure(s) => vec![(1.0, s)],
            PostState::Mixed(e) => e.components.iter().map(|(w, s)| (*w, s)).collect(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, PostState::Pure(_))
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        match self {
            PostState::Pure(s) => s.registry(),
            PostState::Mixed(e) => e.components[0].1.registry(),
        }
    }

    /// Total probability of the occupations matching `pred`.
    pub fn probability_where(&self, pred: impl Fn(&Occupation) -> bool) -> f64 {
        self.components()
            .iter()
            .map(|(w, s)| w * s.probability_where(&pred))
            .fold(0.0, |acc, p| acc + p)
    }
}
