use crate::error::{Error, Result};
use crate::fock::{Mode, ModeRegistry, ModeUnitary};

/// Absorption per AOM pass used when none is given.
pub const DEFAULT_AOM_ABSORPTION: f64 = 0.0005;

/// Partial transmission, dilated to a beam splitter onto one environment mode
/// per lossy mode. Environment modes are never watched, so they are traced
/// out by every later measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct LossChannel {
    pub name: String,
    pub modes: Vec<usize>,
    /// Power transmission in `[0, 1]`.
    pub transmission: f64,
}

impl LossChannel {
    pub fn environment_mode(&self, mode: &Mode) -> Mode {
        mode.on_path(&format!("{}~{}", self.name, mode.path))
    }

    /// Registers the environment modes this channel needs.
    pub fn register_environment(&self, registry: &mut ModeRegistry) -> Result<()> {
        for &m in &self.modes {
            let mode = registry
                .mode(m)
                .ok_or_else(|| Error::UnknownMode(format!("#{m}")))?
                .clone();
            registry.ensure_mode(self.environment_mode(&mode))?;
        }
        Ok(())
    }

    pub fn compile(&self, registry: &ModeRegistry) -> Result<ModeUnitary> {
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(Error::InvalidComponent(format!(
                "{}: transmission {} outside [0, 1]",
                self.name, self.transmission
            )));
        }
        let mut pairs = Vec::new();
        for &m in &self.modes {
            let mode = registry
                .mode(m)
                .ok_or_else(|| Error::UnknownMode(format!("#{m}")))?;
            pairs.push((m, registry.require(&self.environment_mode(mode))?));
        }
        let t = self.transmission.sqrt();
        let r = (1.0 - self.transmission).sqrt();
        ModeUnitary::pair_blocks(registry.len(), &pairs, t, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_mode_unitary, Occupation, Polarization, PureState};
    use std::sync::Arc;

    #[test]
    fn survival_probability_is_the_transmission() {
        let mut reg = ModeRegistry::new();
        let w = reg.add_bin("w", 3.0e14).unwrap();
        let m = reg.add_mode(Mode::new("a", w, Polarization::Y)).unwrap();
        let loss = LossChannel {
            name: "aom".into(),
            modes: vec![m],
            transmission: 0.9995,
        };
        assert!(
            loss.compile(&reg).is_err(),
            "environment not registered yet"
        );
        loss.register_environment(&mut reg).unwrap();
        let reg = Arc::new(reg);
        let u = loss.compile(&reg).unwrap();
        assert!(u.deviation() < 1e-12);
        let s =
            PureState::basis(reg.clone(), Occupation::from_pairs(2, &[(m, 1)]).unwrap()).unwrap();
        let out = apply_mode_unitary(&s, &u).unwrap();
        let survived = out.probability_where(|o| o.get(m) == 1);
        assert!((survived - 0.9995).abs() < 1e-12);
        assert_eq!(reg.label(1), "aom~a@w/y");
    }

    #[test]
    fn transmission_bounds() {
        let mut reg = ModeRegistry::new();
        let w = reg.add_bin("w", 3.0e14).unwrap();
        let m = reg.add_mode(Mode::new("a", w, Polarization::None)).unwrap();
        let loss = LossChannel {
            name: "l".into(),
            modes: vec![m],
            transmission: 1.5,
        };
        loss.register_environment(&mut reg).unwrap();
        assert!(loss.compile(&reg).is_err());
    }
}
