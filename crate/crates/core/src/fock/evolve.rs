use std::collections::BTreeMap;

use num_complex::Complex64;

use super::state::{Occupation, PureState};
use super::unitary::ModeUnitary;
use crate::error::{Error, Result};

pub(crate) fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Evolves a multi-photon state under a single-particle mode unitary.
///
/// Each creation operator is substituted `a†_k → Σ_j U[j,k] a†_j` and the
/// product is re-expanded in the Fock basis. Photon number is preserved.
pub fn apply_mode_unitary(state: &PureState, u: &ModeUnitary) -> Result<PureState> {
    let n = state.registry().len();
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.dim(),
        });
    }
    let deviation = u.deviation();
    if deviation > super::unitary::UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary { deviation });
    }
    let photons = state.photon_number();
    if photons > state.max_photons() {
        return Err(Error::TooManyPhotons {
            found: photons,
            max: state.max_photons(),
        });
    }

    // sparse columns: image of each creation operator
    let columns: Vec<Vec<(usize, Complex64)>> = (0..n)
        .map(|k| {
            (0..n)
                .filter_map(|j| {
                    let v = u[(j, k)];
                    (v != Complex64::default()).then_some((j, v))
                })
                .collect()
        })
        .collect();

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, &amp) in state.terms() {
        let norm_in: f64 = occ.counts().iter().map(|&c| factorial(c)).product();
        // coefficients of the monomial Π (a†_j)^{m_j}, without the √(m!) factor
        let mut partial: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        partial.insert(vec![0; n], amp / norm_in.sqrt());
        for (k, &count) in occ.counts().iter().enumerate() {
            for _ in 0..count {
                let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
                for (key, c) in &partial {
                    for &(j, ujk) in &columns[k] {
                        let mut key = key.clone();
                        key[j] += 1;
                        *next.entry(key).or_default() += c * ujk;
                    }
                }
                partial = next;
            }
        }
        for (key, c) in partial {
            let norm_out: f64 = key.iter().map(|&m| factorial(m)).product();
            *out.entry(Occupation::new(key)).or_default() += c * norm_out.sqrt();
        }
    }
    Ok(state.with_terms(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Mode, ModeRegistry, Polarization};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
    use std::sync::Arc;

    fn two_bins() -> Arc<ModeRegistry> {
        let mut reg = ModeRegistry::new();
        let wi = reg.add_bin("wi", 3.0e14 + 1.0e9).unwrap();
        let wd = reg.add_bin("wd", 3.0e14).unwrap();
        reg.add_mode(Mode::new("in", wi, Polarization::None))
            .unwrap();
        reg.add_mode(Mode::new("in", wd, Polarization::None))
            .unwrap();
        Arc::new(reg)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let reg = two_bins();
        let s = PureState::from_terms(
            reg,
            [
                (Occupation::new(vec![2, 0]), Complex64::new(0.6, 0.0)),
                (Occupation::new(vec![1, 1]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let out = apply_mode_unitary(&s, &ModeUnitary::identity(2)).unwrap();
        assert!(out.max_amplitude_diff(&s) < 1e-15);
    }

    #[test]
    fn single_photon_fifty_fifty_map() {
        let reg = two_bins();
        let s = PureState::basis(reg, Occupation::new(vec![1, 0])).unwrap();
        let u = ModeUnitary::coupled_pairs(2, &[(0, 1)], FRAC_PI_4).unwrap();
        let out = apply_mode_unitary(&s, &u).unwrap();
        let a = out.amplitude(&Occupation::new(vec![1, 0]));
        let b = out.amplitude(&Occupation::new(vec![0, 1]));
        assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((b - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn two_photon_bunching_has_no_coincidence_term() {
        let reg = two_bins();
        let s = PureState::basis(reg, Occupation::new(vec![1, 1])).unwrap();
        let u = ModeUnitary::coupled_pairs(2, &[(0, 1)], FRAC_PI_4).unwrap();
        let out = apply_mode_unitary(&s, &u).unwrap();
        let i_over_sqrt2 = Complex64::new(0.0, FRAC_1_SQRT_2);
        assert!((out.amplitude(&Occupation::new(vec![2, 0])) - i_over_sqrt2).norm() < 1e-12);
        assert!((out.amplitude(&Occupation::new(vec![0, 2])) - i_over_sqrt2).norm() < 1e-12);
        assert_eq!(out.len(), 2, "coincidence term must be pruned, got {out:?}");
    }

    #[test]
    fn dimension_mismatch() {
        let reg = two_bins();
        let s = PureState::basis(reg, Occupation::new(vec![1, 0])).unwrap();
        assert!(matches!(
            apply_mode_unitary(&s, &ModeUnitary::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
