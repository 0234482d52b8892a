use serde::{Deserialize, Serialize};

use super::CrystalParams;
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/materials.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub refractive_index: f64,
    pub photoelastic_constant: f64,
    /// kg/m³
    pub density: f64,
    /// m/s
    pub sound_speed: f64,
    pub citation: String,
}

impl Material {
    pub fn crystal(&self) -> CrystalParams {
        CrystalParams {
            refractive_index: self.refractive_index,
            photoelastic_constant: self.photoelastic_constant,
            density: self.density,
            sound_speed: self.sound_speed,
        }
    }

    /// Acousto-optic figure of merit `n⁶ p² / (ρ v³)` in s³/kg.
    pub fn figure_of_merit(&self) -> f64 {
        self.crystal().figure_of_merit()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialTable {
    pub version: u32,
    #[serde(default)]
    pub notes: String,
    pub materials: Vec<Material>,
}

impl MaterialTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("bundled material table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: MaterialTable = serde_json::from_str(text).map_err(|e| {
            Error::document(
                format!("materials:{}:{}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        for m in &table.materials {
            m.crystal().validate()?;
        }
        Ok(table)
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                let known: Vec<&str> = self.materials.iter().map(|m| m.name.as_str()).collect();
                Error::param(
                    "material",
                    format!("unknown material `{name}` (known: {})", known.join(", ")),
                )
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_matches_tabulated_figures_of_merit() {
        let table = MaterialTable::builtin();
        assert_eq!(table.version, 1);
        for (name, m2) in [
            ("GaP", 44.6e-15),
            ("TeO2", 34.5e-15),
            ("LiNbO3", 7.0e-15),
            ("fused_silica", 1.51e-15),
        ] {
            let m = table.get(name).unwrap();
            let rel = (m.figure_of_merit() - m2).abs() / m2;
            assert!(rel < 0.01, "{name}: M2 = {:e}", m.figure_of_merit());
        }
        assert!(table.get("gap").is_ok());
        assert!(table.get("unobtainium").is_err());
    }
}
