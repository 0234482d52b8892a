//! Serialized form of a circuit. Everything refers to modes by name; see
//! [`parse_mode_ref`] for the syntax.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Polarization;

/// A circuit document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_photons: Option<usize>,
    #[serde(default)]
    pub bins: Vec<BinSpec>,
    pub modes: Vec<String>,
    pub initial_state: Vec<TermSpec>,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub detections: Vec<DetectionSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub label: String,
    pub frequency_hz: f64,
}

/// One Fock term of the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// `[re, im]`.
    pub amplitude: [f64; 2],
    pub occupation: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Aom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        pairs: Vec<[String; 2]>,
        theta: f64,
        modulation_hz: f64,
    },
    BeamSplitter {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        path_a: String,
        path_b: String,
        mixing_angle: f64,
    },
    Pbs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        input: String,
        transmit: String,
        reflect: String,
    },
    Demux {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        routes: Vec<RouteSpec>,
    },
    Loss {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        modes: Vec<String>,
        transmission: f64,
    },
    Herald {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        modes: Vec<String>,
        #[serde(default = "one")]
        efficiency: f64,
        #[serde(default)]
        dark_count_probability: f64,
        #[serde(default)]
        postselect: Postselect,
    },
}

fn one() -> f64 {
    1.0
}

impl ComponentSpec {
    pub fn name(&self) -> Option<&str> {
        match self {
            ComponentSpec::Aom { name, .. }
            | ComponentSpec::BeamSplitter { name, .. }
            | ComponentSpec::Pbs { name, .. }
            | ComponentSpec::Demux { name, .. }
            | ComponentSpec::Loss { name, .. }
            | ComponentSpec::Herald { name, .. } => name.as_deref(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ComponentSpec::Aom { .. } => "aom",
            ComponentSpec::BeamSplitter { .. } => "beam_splitter",
            ComponentSpec::Pbs { .. } => "pbs",
            ComponentSpec::Demux { .. } => "demux",
            ComponentSpec::Loss { .. } => "loss",
            ComponentSpec::Herald { .. } => "herald",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub path: String,
    /// Bin label.
    pub bin: String,
    pub to: String,
}

/// Which herald outcome the run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Postselect {
    #[default]
    NoClick,
    Click,
    /// Keep both outcomes; only the statistics are reported.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub label: String,
    pub modes: Vec<String>,
    #[serde(default)]
    pub frequency_blind: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "is_false")]
    pub state: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub unitary: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub probabilities: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystem: Option<SubsystemSpec>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub concurrence: bool,
    /// Amplitudes `[re, im]` of the target state in the subsystem basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_target: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coincidences: Vec<CoincidenceSpec>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemSpec {
    pub factors: Vec<FactorSpec>,
    /// Drop terms the factors cannot classify instead of failing.
    #[serde(default, skip_serializing_if = "is_false")]
    pub postselect: bool,
    /// Also evaluate the subsystem after every click of this detection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_outcome_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    Polarization {
        #[serde(default)]
        paths: Vec<String>,
        /// Bin labels.
        #[serde(default)]
        bins: Vec<String>,
    },
    Which {
        modes: Vec<String>,
    },
    Occupied {
        mode: String,
    },
}

/// Probability that every group holds at least one photon, given the kept
/// herald outcomes. The run also reports it multiplied by the herald success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoincidenceSpec {
    pub label: String,
    pub groups: Vec<Vec<String>>,
}

/// A parsed mode reference: `path`, `path@bin`, `path/x` or `path@bin/y`.
/// A reference without a bin names a marker mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRef {
    pub path: String,
    pub bin: Option<String>,
    pub polarization: Polarization,
}

pub fn parse_mode_ref(text: &str) -> Result<ModeRef> {
    let bad = |why: &str| Error::UnknownMode(format!("`{text}`: {why}"));
    let (rest, polarization) = match text.rsplit_once('/') {
        Some((rest, "x")) => (rest, Polarization::X),
        Some((rest, "y")) => (rest, Polarization::Y),
        Some(_) => return Err(bad("polarization must be /x or /y")),
        None => (text, Polarization::None),
    };
    let (path, bin) = match rest.split_once('@') {
        Some((p, b)) => (p, Some(b)),
        None => (rest, None),
    };
    if path.is_empty() || path.contains(['@', '/']) {
        return Err(bad("empty or malformed path"));
    }
    if let Some(b) = bin {
        if b.is_empty() || b.contains('@') {
            return Err(bad("empty or malformed bin label"));
        }
    } else if polarization != Polarization::None {
        return Err(bad("marker modes carry no polarization"));
    }
    Ok(ModeRef {
        path: path.to_string(),
        bin: bin.map(str::to_string),
        polarization,
    })
}

/// Parses and validates a JSON circuit document.
///
/// Syntax and schema errors carry the field path plus line and column;
/// semantic errors (unknown modes, AOM frequency gaps, zero-norm states) carry
/// the field path.
pub fn parse_circuit(text: &str) -> Result<CircuitDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: CircuitDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::document(
            if path == "." {
                "(document)".to_string()
            } else {
                path
            },
            format!(
                "line {} column {}: {}",
                inner.line(),
                inner.column(),
                strip_position(&inner.to_string())
            ),
        )
    })?;
    super::circuit::Circuit::build(&doc)?;
    Ok(doc)
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

impl CircuitDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}
