//! Optical elements and their compilation to mode unitaries.

mod aom;
mod herald;
mod loss;
mod routing;

pub use aom::{fbs_unitary, AomCoupler, GAP_TOLERANCE, MODULATION_WARNING_HZ};
pub use herald::{
    herald_outcomes, herald_outcomes_mixed, HeraldDetector, HeraldLabel, HeraldOutcome,
};
pub use loss::{LossChannel, DEFAULT_AOM_ABSORPTION};
pub use routing::{DemuxRoute, FrequencyDemux, PolarizingBeamSplitter, SpatialBeamSplitter};

use crate::error::Result;
use crate::fock::{ModeRegistry, ModeUnitary};

/// Any element that can appear in a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Aom(AomCoupler),
    BeamSplitter(SpatialBeamSplitter),
    Pbs(PolarizingBeamSplitter),
    Demux(FrequencyDemux),
    Loss(LossChannel),
    Herald(HeraldDetector),
}

impl Component {
    pub fn kind(&self) -> &'static str {
        match self {
            Component::Aom(_) => "aom",
            Component::BeamSplitter(_) => "beam_splitter",
            Component::Pbs(_) => "pbs",
            Component::Demux(_) => "demux",
            Component::Loss(_) => "loss",
            Component::Herald(_) => "herald",
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self {
            Component::Aom(a) => a.warnings(),
            _ => Vec::new(),
        }
    }
}

/// What a component turns into.
#[derive(Debug, Clone)]
pub enum Compiled {
    Unitary(ModeUnitary),
    /// Conditioning step, evaluated with [`herald_outcomes`].
    Detection(HeraldDetector),
}

/// Compiles a component against a registry. Loss channels need their
/// environment modes registered beforehand.
pub fn compile_component(component: &Component, registry: &ModeRegistry) -> Result<Compiled> {
    let u = match component {
        Component::Aom(c) => fbs_unitary(c, registry)?,
        Component::BeamSplitter(b) => b.compile(registry)?,
        Component::Pbs(p) => p.compile(registry)?,
        Component::Demux(d) => d.compile(registry)?,
        Component::Loss(l) => l.compile(registry)?,
        Component::Herald(h) => {
            h.validate(registry.len())?;
            return Ok(Compiled::Detection(h.clone()));
        }
    };
    Ok(Compiled::Unitary(u))
}

fn in_component(index: usize, component: &Component, err: crate::Error) -> crate::Error {
    crate::Error::Component {
        index,
        kind: component.kind().to_string(),
        source: Box::new(err),
    }
}

/// Product of the unitaries of a herald-free component list, first element
/// applied first.
pub fn compile_unitary_chain(
    components: &[Component],
    registry: &ModeRegistry,
) -> Result<ModeUnitary> {
    let mut total = ModeUnitary::identity(registry.len());
    for (i, c) in components.iter().enumerate() {
        match compile_component(c, registry).map_err(|e| in_component(i, c, e))? {
            Compiled::Unitary(u) => total = total.then(&u)?,
            Compiled::Detection(_) => {
                return Err(in_component(
                    i,
                    c,
                    crate::Error::InvalidComponent("a herald has no unitary form".into()),
                ))
            }
        }
    }
    Ok(total)
}

/// Applies a herald-free component list to a pure state, one element at a
/// time.
pub fn propagate(
    state: &crate::fock::PureState,
    components: &[Component],
) -> Result<crate::fock::PureState> {
    let registry = std::sync::Arc::clone(state.registry());
    let mut state = state.clone();
    for (i, c) in components.iter().enumerate() {
        match compile_component(c, &registry).map_err(|e| in_component(i, c, e))? {
            Compiled::Unitary(u) => {
                state = crate::fock::apply_mode_unitary(&state, &u)
                    .map_err(|e| in_component(i, c, e))?
            }
            Compiled::Detection(_) => {
                return Err(in_component(
                    i,
                    c,
                    crate::Error::InvalidComponent("heralds must be evaluated separately".into()),
                ))
            }
        }
    }
    Ok(state)
}
