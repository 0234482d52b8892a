use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::registry::{BinId, ModeRegistry, Polarization};
use super::state::{Occupation, PostState, PureState, NORM_TOLERANCE};
use crate::error::{Error, Result};

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const PSD_TOLERANCE: f64 = 1e-9;

/// Hermitian, unit-trace, positive semidefinite operator over a labelled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<String>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(labels: Vec<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = labels.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOLERANCE || trace.im.abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        let rho = DensityMatrix { labels, matrix };
        if let Some(&min) = rho.eigenvalues().first() {
            if min < -PSD_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(labels: Vec<String>, amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::EmptyState);
        }
        let v = v / Complex64::new(norm, 0.0);
        DensityMatrix::new(labels, &v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub(crate) fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        let mut st = s.serialize_struct("DensityMatrix", 2)?;
        st.serialize_field("labels", &self.labels)?;
        st.serialize_field("matrix", &rows)?;
        st.end()
    }
}

/// Modes matched by path and/or bin. An empty set matches everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Arm {
    pub paths: BTreeSet<String>,
    pub bins: BTreeSet<BinId>,
}

impl Arm {
    pub fn bins(bins: impl IntoIterator<Item = BinId>) -> Self {
        Arm {
            paths: BTreeSet::new(),
            bins: bins.into_iter().collect(),
        }
    }

    pub fn paths<S: Into<String>>(paths: impl IntoIterator<Item = S>) -> Self {
        Arm {
            paths: paths.into_iter().map(Into::into).collect(),
            bins: BTreeSet::new(),
        }
    }

    fn contains(&self, registry: &ModeRegistry, mode: usize) -> bool {
        let Some(m) = registry.mode(mode) else {
            return false;
        };
        let path_ok = self.paths.is_empty() || self.paths.contains(&m.path);
        let bin_ok = match m.bin {
            Some(b) => self.bins.is_empty() || self.bins.contains(&b),
            None => false,
        };
        path_ok && bin_ok
    }
}

/// One qubit-like factor of a kept subsystem.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Polarization (`x`/`y`) of the single photon found in the arm.
    Polarization(Arm),
    /// Which of the listed modes holds the single excitation.
    Which(Vec<usize>),
    /// Whether a mode holds zero or one excitation.
    Occupied(usize),
}

impl Factor {
    fn labels(&self, registry: &ModeRegistry) -> Vec<String> {
        match self {
            Factor::Polarization(_) => vec!["x".into(), "y".into()],
            Factor::Which(modes) => modes.iter().map(|&m| registry.label(m)).collect(),
            Factor::Occupied(_) => vec!["0".into(), "1".into()],
        }
    }
}

/// Splits every Fock term into a kept basis index and a traced remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemSelector {
    factors: Vec<Factor>,
}

/// Everything about a term that the selector does not keep.
type RestKey = (Occupation, Vec<(usize, String, Option<BinId>)>);

impl SubsystemSelector {
    pub fn new(factors: Vec<Factor>) -> Self {
        SubsystemSelector { factors }
    }

    /// Polarizations of one photon in each arm.
    pub fn polarization_pair(a: Arm, b: Arm) -> Self {
        Self::new(vec![Factor::Polarization(a), Factor::Polarization(b)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Tensor-product basis labels, first factor most significant.
    pub fn labels(&self, registry: &ModeRegistry) -> Vec<String> {
        let mut labels = vec![String::new()];
        for (i, f) in self.factors.iter().enumerate() {
            let sep = if i == 0 || matches!(f, Factor::Polarization(_)) {
                ""
            } else {
                ","
            };
            labels = labels
                .iter()
                .flat_map(|prefix| {
                    f.labels(registry)
                        .into_iter()
                        .map(move |l| format!("{prefix}{sep}{l}"))
                })
                .collect();
        }
        labels
    }

    fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        for f in &self.factors {
            let modes: &[usize] = match f {
                Factor::Polarization(_) => &[],
                Factor::Which(m) => m,
                Factor::Occupied(m) => std::slice::from_ref(m),
            };
            if let Some(&bad) = modes.iter().find(|&&m| m >= registry.len()) {
                return Err(Error::UnknownMode(format!("#{bad}")));
            }
            if matches!(f, Factor::Which(m) if m.is_empty()) {
                return Err(Error::InvalidComponent(
                    "`which` factor lists no modes".into(),
                ));
            }
        }
        Ok(())
    }

    fn classify(&self, registry: &ModeRegistry, occ: &Occupation) -> Result<(usize, RestKey)> {
        let fail = |reason: String| Error::Unclassifiable {
            occupation: occ.describe(registry),
            reason,
        };
        let mut residual = occ.counts().to_vec();
        let mut records = Vec::new();
        let mut index = 0usize;
        for (fi, factor) in self.factors.iter().enumerate() {
            let (local, dim) = match factor {
                Factor::Polarization(arm) => {
                    let present: Vec<usize> = (0..residual.len())
                        .filter(|&m| residual[m] > 0 && arm.contains(registry, m))
                        .collect();
                    let count: usize = present.iter().map(|&m| residual[m] as usize).sum();
                    if count != 1 {
                        return Err(fail(format!("{count} photons in arm {}", fi + 1)));
                    }
                    let m = present[0];
                    let mode = registry.mode(m).expect("index from registry");
                    let local = match mode.polarization {
                        Polarization::X => 0,
                        Polarization::Y => 1,
                        Polarization::None => {
                            return Err(fail(format!(
                                "photon in {} is unpolarized",
                                registry.label(m)
                            )))
                        }
                    };
                    residual[m] = 0;
                    records.push((fi, mode.path.clone(), mode.bin));
                    (local, 2)
                }
                Factor::Which(modes) => {
                    let count: usize = modes.iter().map(|&m| residual[m] as usize).sum();
                    if count != 1 {
                        return Err(fail(format!(
                            "{count} excitations among factor {} modes",
                            fi + 1
                        )));
                    }
                    let local = modes
                        .iter()
                        .position(|&m| residual[m] == 1)
                        .expect("count is one");
                    residual[modes[local]] = 0;
                    (local, modes.len())
                }
                Factor::Occupied(m) => {
                    let n = residual[*m];
                    if n > 1 {
                        return Err(fail(format!("{n} excitations in {}", registry.label(*m))));
                    }
                    residual[*m] = 0;
                    (n as usize, 2)
                }
            };
            index = index * dim + local;
        }
        Ok((index, (Occupation::new(residual), records)))
    }

    fn dim(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Polarization(_) | Factor::Occupied(_) => 2,
                Factor::Which(m) => m.len(),
            })
            .product()
    }
}

/// Reduced density matrix of `state` on the subsystem picked by `keep`.
///
/// Every term must be classifiable; see [`partial_trace_postselected`] for a
/// variant that drops the terms that are not.
pub fn partial_trace(state: &PureState, keep: &SubsystemSelector) -> Result<DensityMatrix> {
    let (rho, kept) = accumulate(&[(1.0, state)], keep, false)?;
    finish(state.registry(), keep, rho, kept)
}

/// Like [`partial_trace`] over a pure or mixed post-measurement state, first
/// discarding terms the selector cannot classify when `postselect` is set.
///
/// Returns the probability of the kept terms alongside the renormalized
/// reduced state.
pub fn partial_trace_postselected(
    state: &PostState,
    keep: &SubsystemSelector,
    postselect: bool,
) -> Result<(f64, DensityMatrix)> {
    let components = state.components();
    let (rho, kept) = accumulate(&components, keep, postselect)?;
    if kept <= 0.0 {
        return Err(Error::Unclassifiable {
            occupation: "(all terms)".into(),
            reason: "no term maps onto the requested subsystem".into(),
        });
    }
    Ok((kept, finish(state.registry(), keep, rho, kept)?))
}

fn accumulate(
    components: &[(f64, &PureState)],
    keep: &SubsystemSelector,
    postselect: bool,
) -> Result<(DMatrix<Complex64>, f64)> {
    let d = keep.dim();
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    let mut kept = 0.0;
    for &(weight, state) in components {
        let registry = state.registry();
        keep.validate(registry)?;
        let mut groups: BTreeMap<RestKey, Vec<Complex64>> = BTreeMap::new();
        for (occ, amp) in state.terms() {
            match keep.classify(registry, occ) {
                Ok((idx, rest)) => {
                    groups
                        .entry(rest)
                        .or_insert_with(|| vec![Complex64::default(); d])[idx] += amp;
                }
                Err(_) if postselect => continue,
                Err(e) => return Err(e),
            }
        }
        for v in groups.values() {
            for i in 0..d {
                for j in 0..d {
                    rho[(i, j)] += v[i] * v[j].conj() * weight;
                }
            }
            kept += weight * v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
    }
    Ok((rho, kept))
}

fn finish(
    registry: &ModeRegistry,
    keep: &SubsystemSelector,
    rho: DMatrix<Complex64>,
    trace: f64,
) -> Result<DensityMatrix> {
    let rho = if trace > 0.0 {
        rho / Complex64::new(trace, 0.0)
    } else {
        rho
    };
    // clean the rounding asymmetry of the outer products
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(keep.labels(registry), rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Mode;
    use std::sync::Arc;

    fn biexciton_registry() -> (Arc<ModeRegistry>, [BinId; 4]) {
        let mut reg = ModeRegistry::new();
        let base = 3.3e14;
        let w1 = reg.add_bin("w1", base).unwrap();
        let w2 = reg.add_bin("w2", base - 1e11).unwrap();
        let w3 = reg.add_bin("w3", base + 8e8).unwrap();
        let w4 = reg.add_bin("w4", base - 1e11 - 8e8).unwrap();
        for w in [w1, w2, w3, w4] {
            for p in [Polarization::X, Polarization::Y] {
                reg.add_mode(Mode::new("out", w, p)).unwrap();
            }
        }
        (Arc::new(reg), [w1, w2, w3, w4])
    }

    fn occ(reg: &ModeRegistry, modes: &[(BinId, Polarization)]) -> Occupation {
        let pairs: Vec<(usize, u8)> = modes
            .iter()
            .map(|&(b, p)| (reg.index_of(&Mode::new("out", b, p)).unwrap(), 1))
            .collect();
        Occupation::from_pairs(reg.len(), &pairs).unwrap()
    }

    #[test]
    fn product_state_traces_to_pure_xx() {
        let (reg, [w1, w2, w3, w4]) = biexciton_registry();
        let s = PureState::basis(
            reg.clone(),
            occ(&reg, &[(w1, Polarization::X), (w2, Polarization::X)]),
        )
        .unwrap();
        let sel = SubsystemSelector::polarization_pair(Arm::bins([w1, w3]), Arm::bins([w2, w4]));
        let rho = partial_trace(&s, &sel).unwrap();
        assert_eq!(rho.labels(), ["xx", "xy", "yx", "yy"]);
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frequency_tagged_branches_lose_coherence() {
        let (reg, [w1, w2, w3, w4]) = biexciton_registry();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let nu = 0.7;
        let s = PureState::from_terms(
            reg.clone(),
            [
                (
                    occ(&reg, &[(w1, Polarization::X), (w2, Polarization::X)]),
                    Complex64::new(h, 0.0),
                ),
                (
                    occ(&reg, &[(w3, Polarization::Y), (w4, Polarization::Y)]),
                    Complex64::from_polar(h, nu),
                ),
            ],
        )
        .unwrap();
        let sel = SubsystemSelector::polarization_pair(Arm::bins([w1, w3]), Arm::bins([w2, w4]));
        let rho = partial_trace(&s, &sel).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.5];
        for (i, &diag) in expected.iter().enumerate() {
            for j in 0..4 {
                let e = if i == j { diag } else { 0.0 };
                assert!((rho.get(i, j) - e).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn two_photons_in_one_arm_is_an_error() {
        let (reg, [w1, w2, w3, w4]) = biexciton_registry();
        let s = PureState::basis(
            reg.clone(),
            occ(&reg, &[(w1, Polarization::X), (w3, Polarization::Y)]),
        )
        .unwrap();
        let sel = SubsystemSelector::polarization_pair(Arm::bins([w1, w3]), Arm::bins([w2, w4]));
        let err = partial_trace(&s, &sel).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Unclassifiable { .. }));
        assert!(
            msg.contains("out@w1/x") && msg.contains("out@w3/y"),
            "{msg}"
        );
    }

    #[test]
    fn density_matrix_validation() {
        let labels = vec!["0".to_string(), "1".to_string()];
        let bad_trace = DMatrix::from_diagonal_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(DensityMatrix::new(labels.clone(), bad_trace).is_err());
        let mut negative = DMatrix::zeros(2, 2);
        negative[(0, 0)] = Complex64::new(1.5, 0.0);
        negative[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(labels.clone(), negative).is_err());
        let mut non_herm = DMatrix::from_diagonal_element(2, 2, Complex64::new(0.5, 0.0));
        non_herm[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(labels, non_herm).is_err());
    }
}
