use crate::error::{Error, Result};
use crate::fock::{ModeRegistry, ModeUnitary};

/// Drive frequencies above this are flagged; AOMs are practical only up to a
/// few GHz.
pub const MODULATION_WARNING_HZ: f64 = 3.0e9;

/// Relative tolerance between a pair's frequency gap and the drive.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// An acousto-optic modulator coupling disjoint mode pairs whose frequency gap
/// equals the drive frequency.
///
/// `theta` is the interaction angle `η·l`: a fraction `sin²θ` of each mode is
/// transferred to its partner.
#[derive(Debug, Clone, PartialEq)]
pub struct AomCoupler {
    pub name: String,
    pub pairs: Vec<(usize, usize)>,
    pub theta: f64,
    /// Drive frequency in Hz.
    pub modulation_frequency: f64,
}

impl AomCoupler {
    pub fn new(
        name: impl Into<String>,
        pairs: Vec<(usize, usize)>,
        theta: f64,
        modulation_frequency: f64,
    ) -> Self {
        AomCoupler {
            name: name.into(),
            pairs,
            theta,
            modulation_frequency,
        }
    }

    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::InvalidComponent(format!(
                "{}: theta is not finite",
                self.name
            )));
        }
        if !(self.modulation_frequency.is_finite() && self.modulation_frequency > 0.0) {
            return Err(Error::InvalidComponent(format!(
                "{}: modulation frequency must be positive, got {}",
                self.name, self.modulation_frequency
            )));
        }
        if self.pairs.is_empty() {
            return Err(Error::InvalidComponent(format!(
                "{}: no coupled pairs",
                self.name
            )));
        }
        let mut used = std::collections::BTreeSet::new();
        for &(a, b) in &self.pairs {
            for m in [a, b] {
                if m >= registry.len() {
                    return Err(Error::UnknownMode(format!("#{m}")));
                }
                if !used.insert(m) {
                    return Err(Error::InvalidComponent(format!(
                        "{}: mode {} appears in more than one pair",
                        self.name,
                        registry.label(m)
                    )));
                }
            }
            let (fa, fb) = match (registry.frequency(a), registry.frequency(b)) {
                (Some(fa), Some(fb)) => (fa, fb),
                _ => {
                    return Err(Error::InvalidComponent(format!(
                        "{}: marker modes cannot be coupled",
                        self.name
                    )))
                }
            };
            let gap = (fa - fb).abs();
            if (gap - self.modulation_frequency).abs() > GAP_TOLERANCE * self.modulation_frequency {
                return Err(Error::FrequencyGap {
                    component: self.name.clone(),
                    first: registry.label(a),
                    second: registry.label(b),
                    first_hz: fa,
                    second_hz: fb,
                    gap_hz: gap,
                    modulation_hz: self.modulation_frequency,
                });
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.modulation_frequency > MODULATION_WARNING_HZ {
            vec![format!(
                "{}: drive at {:.3e} Hz exceeds the {:.0e} Hz practical AOM limit",
                self.name, self.modulation_frequency, MODULATION_WARNING_HZ
            )]
        } else {
            Vec::new()
        }
    }
}

/// Mode unitary of an AOM: identity except for a
/// `[[cos θ, i sin θ], [i sin θ, cos θ]]` block on each coupled pair.
pub fn fbs_unitary(coupler: &AomCoupler, registry: &ModeRegistry) -> Result<ModeUnitary> {
    coupler.validate(registry)?;
    ModeUnitary::coupled_pairs(registry.len(), &coupler.pairs, coupler.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Mode, Polarization};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn registry() -> ModeRegistry {
        let mut reg = ModeRegistry::new();
        let wi = reg.add_bin("wi", 3.0e14 + 1.0e9).unwrap();
        let wd = reg.add_bin("wd", 3.0e14).unwrap();
        let wx = reg.add_bin("wx", 3.0e14 + 5.0e9).unwrap();
        reg.add_mode(Mode::new("a", wi, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::new("a", wd, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::new("a", wx, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::marker("s")).unwrap();
        reg
    }

    #[test]
    fn zero_angle_is_identity() {
        let reg = registry();
        let u = fbs_unitary(&AomCoupler::new("aom", vec![(0, 1)], 0.0, 1.0e9), &reg).unwrap();
        assert_eq!(u, ModeUnitary::identity(4));
    }

    #[test]
    fn fifty_percent_block() {
        let reg = registry();
        let u = fbs_unitary(
            &AomCoupler::new("aom", vec![(0, 1)], FRAC_PI_4, 1.0e9),
            &reg,
        )
        .unwrap();
        assert!((u[(0, 0)] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((u[(1, 0)] - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((u[(0, 1)] - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn angles_add_on_a_shared_pair() {
        let reg = registry();
        for (t1, t2) in [(0.1, 0.2), (0.7, -0.3), (1.2, 2.5)] {
            let u1 = fbs_unitary(&AomCoupler::new("a", vec![(0, 1)], t1, 1.0e9), &reg).unwrap();
            let u2 = fbs_unitary(&AomCoupler::new("b", vec![(0, 1)], t2, 1.0e9), &reg).unwrap();
            let sum =
                fbs_unitary(&AomCoupler::new("c", vec![(0, 1)], t1 + t2, 1.0e9), &reg).unwrap();
            let prod = u1.then(&u2).unwrap();
            assert!((prod.matrix() - sum.matrix()).camax() < 1e-14);
        }
    }

    #[test]
    fn validation_errors() {
        let reg = registry();
        let gap =
            fbs_unitary(&AomCoupler::new("aom1", vec![(0, 1)], 0.3, 2.0e9), &reg).unwrap_err();
        let msg = gap.to_string();
        assert!(matches!(gap, Error::FrequencyGap { .. }));
        assert!(
            msg.contains("aom1") && msg.contains("a@wi") && msg.contains("a@wd"),
            "{msg}"
        );
        assert!(fbs_unitary(
            &AomCoupler::new("o", vec![(0, 1), (1, 2)], 0.3, 1.0e9),
            &reg
        )
        .is_err());
        assert!(fbs_unitary(&AomCoupler::new("m", vec![(0, 3)], 0.3, 1.0e9), &reg).is_err());
        assert!(fbs_unitary(&AomCoupler::new("u", vec![(0, 9)], 0.3, 1.0e9), &reg).is_err());
    }

    #[test]
    fn high_drive_warns() {
        let reg = registry();
        let c = AomCoupler::new("fast", vec![(0, 2)], 0.3, 4.0e9);
        assert!(c.validate(&reg).is_ok());
        assert_eq!(c.warnings().len(), 1);
        assert!(AomCoupler::new("slow", vec![(0, 1)], 0.3, 1.0e9)
            .warnings()
            .is_empty());
    }
}
