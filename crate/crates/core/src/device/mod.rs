//! Closed-form acousto-optic device physics.
//!
//! All frequencies here are angular (rad/s). The coupling constant of a
//! Bragg cell driven with acoustic intensity `I` is
//!
//! ```text
//! η = ω / (2√2 c) · √(n⁶ p² I / (ρ v³))
//! ```
//!
//! and the fraction of light shifted after an interaction length `l` is
//! `sin²(η l) = sin²(ω R)` with `R = η l / ω`.

mod materials;

pub use materials::{Material, MaterialTable};

use serde::Serialize;

use crate::error::{Error, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrystalParams {
    pub refractive_index: f64,
    pub photoelastic_constant: f64,
    /// kg/m³
    pub density: f64,
    /// m/s
    pub sound_speed: f64,
}

impl CrystalParams {
    pub fn validate(&self) -> Result<()> {
        positive("refractive_index", self.refractive_index)?;
        positive("photoelastic_constant", self.photoelastic_constant)?;
        positive("density", self.density)?;
        positive("sound_speed", self.sound_speed)
    }

    /// `n⁶ p² / (ρ v³)`, s³/kg.
    pub fn figure_of_merit(&self) -> f64 {
        self.refractive_index.powi(6) * self.photoelastic_constant.powi(2)
            / (self.density * self.sound_speed.powi(3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AomGeometry {
    /// Interaction length, m.
    pub interaction_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcousticDrive {
    /// W/m²
    pub intensity: f64,
    /// Hz
    pub modulation_frequency: f64,
}

impl AcousticDrive {
    pub fn validate(&self) -> Result<()> {
        positive("intensity", self.intensity)?;
        positive("modulation_frequency", self.modulation_frequency)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

/// Coupling constant η in 1/m for light at angular frequency `omega`.
pub fn coupling_eta(crystal: &CrystalParams, drive: &AcousticDrive, omega: f64) -> Result<f64> {
    crystal.validate()?;
    drive.validate()?;
    positive("omega", omega)?;
    Ok(omega / (2.0 * 2f64.sqrt() * SPEED_OF_LIGHT)
        * (crystal.figure_of_merit() * drive.intensity).sqrt())
}

/// Interaction constant `R = η l / ω` in seconds. The optical frequency
/// cancels, so it depends on crystal, drive and geometry only.
pub fn interaction_r(
    crystal: &CrystalParams,
    drive: &AcousticDrive,
    geometry: &AomGeometry,
) -> Result<f64> {
    crystal.validate()?;
    drive.validate()?;
    positive("interaction_length", geometry.interaction_length)?;
    Ok(
        geometry.interaction_length / (2.0 * 2f64.sqrt() * SPEED_OF_LIGHT)
            * (crystal.figure_of_merit() * drive.intensity).sqrt(),
    )
}

/// Fraction of light frequency shifted at interaction angle `theta = η l`.
pub fn conversion_efficiency(theta: f64) -> f64 {
    theta.sin().powi(2)
}

/// Acoustic intensity (W/m²) at which `η l` equals `target_theta`.
pub fn required_intensity(
    target_theta: f64,
    crystal: &CrystalParams,
    geometry: &AomGeometry,
    omega: f64,
) -> Result<f64> {
    if !(target_theta > 0.0 && target_theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::param(
            "target_theta",
            format!("must lie in (0, π/2], got {target_theta}"),
        ));
    }
    crystal.validate()?;
    positive("interaction_length", geometry.interaction_length)?;
    positive("omega", omega)?;
    let eta = target_theta / geometry.interaction_length;
    let root = eta * 2.0 * 2f64.sqrt() * SPEED_OF_LIGHT / omega;
    Ok(root * root / crystal.figure_of_merit())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthRatio {
    /// `sin²((ω+δ)R) / sin²(ωR)`
    pub exact: f64,
    /// `1 + 2 δR cot(ωR)`
    pub first_order: f64,
}

impl BandwidthRatio {
    pub fn error(&self) -> f64 {
        (self.exact - self.first_order).abs()
    }
}

/// Ratio of the shifted fractions at `omega + delta` and `omega`, exactly and
/// to first order in `δR`.
pub fn bandwidth_ratio(omega: f64, delta: f64, r: f64) -> Result<BandwidthRatio> {
    for (name, v) in [("omega", omega), ("delta", delta), ("R", r)] {
        if !v.is_finite() {
            return Err(Error::param(name, format!("must be finite, got {v}")));
        }
    }
    let phase = omega * r;
    let (s, c) = phase.sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::Singular(s));
    }
    let exact = ((omega + delta) * r).sin().powi(2) / (s * s);
    let first_order = 1.0 + 2.0 * delta * r * c / s;
    Ok(BandwidthRatio { exact, first_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn gap() -> CrystalParams {
        MaterialTable::builtin().get("GaP").unwrap().crystal()
    }

    fn drive(intensity: f64) -> AcousticDrive {
        AcousticDrive {
            intensity,
            modulation_frequency: 8.0e8,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn eta_scaling_laws() {
        let c = gap();
        let w = 2.0e15;
        let base = coupling_eta(&c, &drive(1.0e6), w).unwrap();
        assert!(base > 0.0);
        assert!(
            rel(
                coupling_eta(&c, &drive(2.0e6), w).unwrap(),
                base * 2f64.sqrt()
            ) < 1e-15
        );
        assert!(
            rel(
                coupling_eta(&c, &drive(1.0e6), 2.0 * w).unwrap(),
                2.0 * base
            ) < 1e-15
        );
        let n2 = CrystalParams {
            refractive_index: 2.0 * c.refractive_index,
            ..c
        };
        assert!(rel(coupling_eta(&n2, &drive(1.0e6), w).unwrap(), 8.0 * base) < 1e-14);
        let v2 = CrystalParams {
            sound_speed: 2.0 * c.sound_speed,
            ..c
        };
        assert!(
            rel(
                coupling_eta(&v2, &drive(1.0e6), w).unwrap(),
                base * 2f64.powf(-1.5)
            ) < 1e-14
        );
    }

    #[test]
    fn r_is_eta_l_over_omega_and_omega_free() {
        let c = gap();
        let geo = AomGeometry {
            interaction_length: 1.0e-3,
        };
        let r = interaction_r(&c, &drive(1.0e6), &geo).unwrap();
        for w in [1.0e13, 1.0e14, 1.0e15, 1.0e16] {
            let eta = coupling_eta(&c, &drive(1.0e6), w).unwrap();
            assert!(rel(r * w, eta * geo.interaction_length) < 1e-14);
        }
        let r2 = interaction_r(
            &c,
            &drive(1.0e6),
            &AomGeometry {
                interaction_length: 2.0e-3,
            },
        )
        .unwrap();
        assert!(rel(r2, 2.0 * r) < 1e-15);
    }

    #[test]
    fn efficiency_values() {
        assert!((conversion_efficiency(FRAC_PI_4) - 0.5).abs() < 1e-12);
        assert!((conversion_efficiency(FRAC_PI_2) - 1.0).abs() < 1e-12);
        assert_eq!(conversion_efficiency(0.0), 0.0);
    }

    #[test]
    fn intensity_inversion() {
        let c = gap();
        let geo = AomGeometry {
            interaction_length: 1.0e-3,
        };
        let w = 2.0 * PI * 3.3e14;
        let i = required_intensity(FRAC_PI_4, &c, &geo, w).unwrap();
        assert!(i.is_finite() && i > 0.0);
        let theta = coupling_eta(&c, &drive(i), w).unwrap() * geo.interaction_length;
        assert!(rel(theta, FRAC_PI_4) < 1e-12);
        let i4 = required_intensity(FRAC_PI_2, &c, &geo, w).unwrap();
        let i1 = required_intensity(FRAC_PI_2 / 4.0, &c, &geo, w).unwrap();
        assert!(rel(i4, 16.0 * i1) < 1e-12);
        assert!(required_intensity(2.0, &c, &geo, w).is_err());
        assert!(required_intensity(
            0.5,
            &c,
            &AomGeometry {
                interaction_length: 0.0
            },
            w
        )
        .is_err());
    }

    #[test]
    fn bandwidth_ratio_cases() {
        let b = bandwidth_ratio(1.0e15, 0.0, 1.0e-15).unwrap();
        assert_eq!(b.exact, 1.0);
        assert_eq!(b.first_order, 1.0);
        // ωR = 1, δR = 1e-3
        let b = bandwidth_ratio(1.0e15, 1.0e12, 1.0e-15).unwrap();
        assert!(b.error() <= 5.0e-6, "{b:?}");
        assert!(matches!(
            bandwidth_ratio(PI, 0.1, 1.0),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            bandwidth_ratio(0.0, 0.1, 1.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let mut c = gap();
        c.density = 0.0;
        assert!(coupling_eta(&c, &drive(1.0), 1.0).is_err());
        assert!(coupling_eta(&gap(), &drive(-1.0), 1.0).is_err());
        assert!(coupling_eta(&gap(), &drive(1.0), 0.0).is_err());
    }
}
