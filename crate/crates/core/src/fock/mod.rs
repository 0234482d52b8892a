//! Fock-space machinery for a handful of photons in a handful of modes.

mod density;
mod detect;
mod evolve;
mod measures;
mod oracle;
mod registry;
mod state;
mod unitary;

pub use density::{
    partial_trace, partial_trace_postselected, Arm, DensityMatrix, Factor, SubsystemSelector,
};
pub use detect::{condition_on_detection, ClickPattern, DetectionOutcome};
pub use evolve::apply_mode_unitary;
pub use measures::{concurrence, fidelity, phased_pair};
pub use oracle::{
    enumerate_occupations, permanent, transition_amplitude_oracle, ORACLE_MAX_PHOTONS,
};
pub use registry::{BinId, FrequencyBin, Mode, ModeRegistry, Polarization};
pub use state::{Ensemble, Occupation, PostState, PureState, DEFAULT_MAX_PHOTONS, PRUNE_THRESHOLD};
pub use unitary::{ModeUnitary, UNITARITY_TOLERANCE};
