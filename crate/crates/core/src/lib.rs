//! Few-photon, frequency-bin linear optics.
//!
//! `freqbeam` simulates small photonic circuits whose modes are labelled by a
//! spatial path, a frequency bin and a polarization. Its central element is the
//! acousto-optic frequency beam splitter: an AOM driven at the difference of two
//! optical frequencies couples the two bins exactly like a spatial beam splitter
//! couples two paths,
//!
//! ```text
//! b_i = a_i cos(θ) + i a_d sin(θ)
//! b_d = a_d cos(θ) + i a_i sin(θ),      θ = η·l
//! ```
//!
//! The crate is organised in layers:
//!
//! - [`fock`]: mode registry, sparse Fock states, multi-photon evolution under a
//!   single-particle unitary, a permanent-based amplitude oracle, click
//!   conditioning, partial traces and two-qubit entanglement measures.
//! - [`components`]: optical elements (AOM coupler, spatial and polarizing beam
//!   splitters, prisms, loss, heralding detectors) compiled to mode unitaries or
//!   detection plans.
//! - [`device`]: closed-form AOM physics (coupling constant, interaction
//!   constant, conversion efficiency, bandwidth error) and a material table.
//! - [`scenarios`]: end-to-end runs of which-way erasure, two-photon
//!   interference between mismatched sources and biexciton polarization
//!   rectification.
//! - [`io`]: JSON circuit documents, document execution, parameter sweeps and
//!   result serialization used by the `freqbeam` binary.

pub mod components;
pub mod device;
pub mod error;
pub mod fock;
pub mod io;
pub mod scenarios;

pub use error::{Error, Result};
pub use fock::{
    apply_mode_unitary, concurrence, condition_on_detection, fidelity, partial_trace,
    transition_amplitude_oracle, DensityMatrix, FrequencyBin, Mode, ModeRegistry, ModeUnitary,
    Occupation, Polarization, PureState,
};

/// Crate version, echoed in result documents.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
