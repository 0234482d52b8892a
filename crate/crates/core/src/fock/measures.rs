use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::density::DensityMatrix;
use crate::error::{Error, Result};

/// Wootters concurrence of a two-qubit density matrix.
///
/// `C = max(0, λ1 - λ2 - λ3 - λ4)` where the `λ` are the square roots of the
/// eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)` in decreasing order. They are
/// obtained as the singular values of `Wᵀ (σy⊗σy) W` with `ρ = W W†`, which
/// avoids square roots of eigenvalues that are zero up to rounding.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let eig = SymmetricEigen::new(rho.hermitian_part());
    let mut w = eig.eigenvectors.clone();
    for (j, &p) in eig.eigenvalues.iter().enumerate() {
        let scale = Complex64::new(p.max(0.0).sqrt(), 0.0);
        for i in 0..4 {
            w[(i, j)] *= scale;
        }
    }
    // σy⊗σy is real: anti-diagonal (-1, 1, 1, -1)
    let mut spin_flip = DMatrix::<Complex64>::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        spin_flip[(i, 3 - i)] = Complex64::new(s, 0.0);
    }
    let tau = w.transpose() * spin_flip * &w;
    let mut lambdas: Vec<(usize, f64)> =
        tau.singular_values().iter().copied().enumerate().collect();
    // descending, ties by original index
    lambdas.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let c = lambdas[0].1 - lambdas[1..].iter().map(|(_, l)| l).sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩` for a pure target; the target is normalized first.
pub fn fidelity(rho: &DensityMatrix, target: &[Complex64]) -> Result<f64> {
    if target.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: target.len(),
        });
    }
    let norm_sqr: f64 = target.iter().map(|a| a.norm_sqr()).sum();
    if norm_sqr == 0.0 {
        return Err(Error::EmptyState);
    }
    let mut acc = Complex64::default();
    for i in 0..target.len() {
        for j in 0..target.len() {
            acc += target[i].conj() * rho.get(i, j) * target[j];
        }
    }
    Ok((acc.re / norm_sqr).clamp(0.0, 1.0))
}

/// Pure Bell-type target `(|a⟩ + e^{iφ}|b⟩)/√2` in a `dim`-dimensional basis.
pub fn phased_pair(dim: usize, a: usize, b: usize, phase: f64) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); dim];
    v[a] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[b] = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phase);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        ["00", "01", "10", "11"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        for phase in [0.0, 1.0, std::f64::consts::PI] {
            let rho = DensityMatrix::pure(labels(), &phased_pair(4, 0, 3, phase)).unwrap();
            assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-12);
            let rho = DensityMatrix::pure(labels(), &phased_pair(4, 1, 2, phase)).unwrap();
            assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_mixture_has_no_concurrence() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::default(),
            Complex64::default(),
            Complex64::new(0.5, 0.0),
        ]));
        let rho = DensityMatrix::new(labels(), m).unwrap();
        assert!(concurrence(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn x_state_concurrence_is_twice_the_coherence() {
        // ρ = diag(a, 0, 0, 1-a) with coherence z: C = 2|z|
        for (a, z) in [(0.5, 0.25), (0.3, 0.1), (0.5, 0.5)] {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = Complex64::new(a, 0.0);
            m[(3, 3)] = Complex64::new(1.0 - a, 0.0);
            m[(0, 3)] = Complex64::new(0.0, z);
            m[(3, 0)] = Complex64::new(0.0, -z);
            let rho = DensityMatrix::new(labels(), m).unwrap();
            assert!((concurrence(&rho).unwrap() - 2.0 * z).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_bounds() {
        let t = phased_pair(4, 0, 3, 0.0);
        let rho = DensityMatrix::pure(labels(), &t).unwrap();
        assert!((fidelity(&rho, &t).unwrap() - 1.0).abs() < 1e-12);
        let orth = phased_pair(4, 0, 3, std::f64::consts::PI);
        assert!(fidelity(&rho, &orth).unwrap().abs() < 1e-12);
        assert!(fidelity(&rho, &t[..2]).is_err());
    }

    #[test]
    fn wrong_dimension() {
        let rho = DensityMatrix::pure(
            vec!["a".into(), "b".into()],
            &[Complex64::new(1.0, 0.0), Complex64::default()],
        )
        .unwrap();
        assert!(matches!(
            concurrence(&rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
