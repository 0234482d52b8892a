//! Lossless routing elements: spatial beam splitters, polarizing beam
//! splitters and prisms.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fock::{BinId, ModeRegistry, ModeUnitary, Polarization};

/// Couples modes of equal bin and polarization across two paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialBeamSplitter {
    pub path_a: String,
    pub path_b: String,
    /// π/4 for a 50:50 splitter.
    pub mixing_angle: f64,
}

impl SpatialBeamSplitter {
    pub fn compile(&self, registry: &ModeRegistry) -> Result<ModeUnitary> {
        if self.path_a == self.path_b {
            return Err(Error::InvalidComponent(format!(
                "beam splitter joins path `{}` to itself",
                self.path_a
            )));
        }
        let pairs: Vec<(usize, usize)> = registry
            .modes_on_path(&self.path_a)
            .filter_map(|a| {
                let partner = registry.mode(a)?.on_path(&self.path_b);
                registry.index_of(&partner).map(|b| (a, b))
            })
            .collect();
        if pairs.is_empty() {
            return Err(Error::InvalidComponent(format!(
                "beam splitter `{}`/`{}` has no matching modes",
                self.path_a, self.path_b
            )));
        }
        ModeUnitary::coupled_pairs(registry.len(), &pairs, self.mixing_angle)
    }
}

/// Sends x-polarized light on `input` to `transmit` and y-polarized light to
/// `reflect`. Acts as a swap, so the same element also recombines.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizingBeamSplitter {
    pub input: String,
    pub transmit: String,
    pub reflect: String,
}

impl PolarizingBeamSplitter {
    pub fn compile(&self, registry: &ModeRegistry) -> Result<ModeUnitary> {
        if self.transmit == self.reflect
            || self.input == self.transmit
            || self.input == self.reflect
        {
            return Err(Error::InvalidComponent(format!(
                "PBS paths must be distinct (input `{}`, transmit `{}`, reflect `{}`)",
                self.input, self.transmit, self.reflect
            )));
        }
        let mut swaps = Vec::new();
        for a in registry.modes_on_path(&self.input) {
            let mode = registry.mode(a).expect("index from registry");
            let target = match mode.polarization {
                Polarization::X => &self.transmit,
                Polarization::Y => &self.reflect,
                Polarization::None => continue,
            };
            swaps.push((a, registry.require(&mode.on_path(target))?));
        }
        swap_permutation(registry.len(), &swaps)
    }
}

/// One prism route: light of `bin` on `path` leaves on `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemuxRoute {
    pub path: String,
    pub bin: BinId,
    pub to: String,
}

/// Frequency-sorting prism. Each route swaps `(path, bin, pol)` with
/// `(to, bin, pol)` for every registered polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDemux {
    pub routes: Vec<DemuxRoute>,
}

impl FrequencyDemux {
    pub fn compile(&self, registry: &ModeRegistry) -> Result<ModeUnitary> {
        let mut swaps = Vec::new();
        for route in &self.routes {
            if route.path == route.to {
                return Err(Error::InvalidComponent(format!(
                    "demux route for path `{}` points at itself",
                    route.path
                )));
            }
            let sources: Vec<usize> = registry
                .modes_on_path(&route.path)
                .filter(|&m| registry.mode(m).and_then(|m| m.bin) == Some(route.bin))
                .collect();
            if sources.is_empty() {
                return Err(Error::UnknownMode(format!(
                    "{}@{}",
                    route.path,
                    registry
                        .bin(route.bin)
                        .map_or("?".into(), |b| b.label.clone())
                )));
            }
            for a in sources {
                let target = registry
                    .mode(a)
                    .expect("index from registry")
                    .on_path(&route.to);
                swaps.push((a, registry.require(&target)?));
            }
        }
        swap_permutation(registry.len(), &swaps)
    }

    /// The routes read backwards.
    pub fn inverse(&self) -> FrequencyDemux {
        FrequencyDemux {
            routes: self
                .routes
                .iter()
                .map(|r| DemuxRoute {
                    path: r.to.clone(),
                    bin: r.bin,
                    to: r.path.clone(),
                })
                .collect(),
        }
    }
}

fn swap_permutation(dim: usize, swaps: &[(usize, usize)]) -> Result<ModeUnitary> {
    let mut image: Vec<usize> = (0..dim).collect();
    let mut touched = BTreeSet::new();
    for &(a, b) in swaps {
        for m in [a, b] {
            if !touched.insert(m) {
                return Err(Error::RoutingCollision(format!(
                    "mode #{m} is routed twice"
                )));
            }
        }
        image[a] = b;
        image[b] = a;
    }
    ModeUnitary::permutation(&image)
}
