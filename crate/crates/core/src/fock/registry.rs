use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BinId = u32;

/// A monochromatic frequency label.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBin {
    pub id: BinId,
    pub label: String,
    /// Center frequency in Hz.
    pub center_frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
    None,
}

impl Polarization {
    pub fn suffix(self) -> &'static str {
        match self {
            Polarization::X => "/x",
            Polarization::Y => "/y",
            Polarization::None => "",
        }
    }
}

/// A single-particle mode: path, frequency bin and polarization.
///
/// Modes without a bin are bookkeeping modes (emitter markers) that no
/// optical component touches.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub path: String,
    pub bin: Option<BinId>,
    pub polarization: Polarization,
}

impl Mode {
    pub fn new(path: impl Into<String>, bin: BinId, polarization: Polarization) -> Self {
        Mode {
            path: path.into(),
            bin: Some(bin),
            polarization,
        }
    }

    pub fn marker(path: impl Into<String>) -> Self {
        Mode {
            path: path.into(),
            bin: None,
            polarization: Polarization::None,
        }
    }

    /// The same mode moved to another path.
    pub fn on_path(&self, path: &str) -> Self {
        Mode {
            path: path.to_string(),
            ..self.clone()
        }
    }
}

/// Ordered set of modes with stable indices.
#[derive(Debug, Clone, Default)]
pub struct ModeRegistry {
    bins: Vec<FrequencyBin>,
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_bin(&mut self, label: impl Into<String>, center_frequency: f64) -> Result<BinId> {
        let label = label.into();
        if !(center_frequency.is_finite() && center_frequency > 0.0) {
            return Err(Error::InvalidBin(format!(
                "{label}: center frequency must be positive, got {center_frequency}"
            )));
        }
        if self.bins.iter().any(|b| b.label == label) {
            return Err(Error::InvalidBin(format!("{label}: duplicate bin label")));
        }
        let id = self.bins.len() as BinId;
        self.bins.push(FrequencyBin {
            id,
            label,
            center_frequency,
        });
        Ok(id)
    }

    pub fn add_mode(&mut self, mode: Mode) -> Result<usize> {
        if let Some(bin) = mode.bin {
            if self.bin(bin).is_none() {
                return Err(Error::InvalidBin(format!("bin id {bin} is not registered")));
            }
        }
        if mode.path.is_empty() {
            return Err(Error::UnknownMode("empty path label".into()));
        }
        if self.index.contains_key(&mode) {
            return Err(Error::DuplicateMode(self.describe_mode(&mode)));
        }
        let idx = self.modes.len();
        self.index.insert(mode.clone(), idx);
        self.modes.push(mode);
        Ok(idx)
    }

    /// Index of `mode`, registering it first if needed.
    pub fn ensure_mode(&mut self, mode: Mode) -> Result<usize> {
        match self.index.get(&mode) {
            Some(&i) => Ok(i),
            None => self.add_mode(mode),
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, idx: usize) -> Option<&Mode> {
        self.modes.get(idx)
    }

    pub fn bins(&self) -> &[FrequencyBin] {
        &self.bins
    }

    pub fn bin(&self, id: BinId) -> Option<&FrequencyBin> {
        self.bins.get(id as usize)
    }

    pub fn bin_by_label(&self, label: &str) -> Option<&FrequencyBin> {
        self.bins.iter().find(|b| b.label == label)
    }

    pub fn index_of(&self, mode: &Mode) -> Option<usize> {
        self.index.get(mode).copied()
    }

    pub fn require(&self, mode: &Mode) -> Result<usize> {
        self.index_of(mode)
            .ok_or_else(|| Error::UnknownMode(self.describe_mode(mode)))
    }

    /// Center frequency of a registered mode, `None` for marker modes.
    pub fn frequency(&self, idx: usize) -> Option<f64> {
        self.modes
            .get(idx)
            .and_then(|m| m.bin)
            .and_then(|b| self.bin(b))
            .map(|b| b.center_frequency)
    }

    /// `path@bin/pol` label of a mode.
    pub fn describe_mode(&self, mode: &Mode) -> String {
        let bin = match mode.bin {
            Some(id) => match self.bin(id) {
                Some(b) => format!("@{}", b.label),
                None => format!("@#{id}"),
            },
            None => String::new(),
        };
        format!("{}{}{}", mode.path, bin, mode.polarization.suffix())
    }

    pub fn label(&self, idx: usize) -> String {
        match self.modes.get(idx) {
            Some(m) => self.describe_mode(m),
            None => format!("#{idx}"),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    /// Indices of all modes on `path`.
    pub fn modes_on_path<'a>(&'a self, path: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.modes
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.path == path)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for ModeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.labels().join(", "))
    }
}
