use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Entrywise tolerance on `U·U† = I`.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Unitary acting on the single-particle mode space.
///
/// Column `k` holds the image of the creation operator of mode `k`:
/// `a†_k → Σ_j U[j,k] a†_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary(DMatrix<Complex64>);

impl ModeUnitary {
    /// Wraps `matrix`, checking that it is square and unitary.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(ModeUnitary(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        ModeUnitary(DMatrix::identity(dim, dim))
    }

    /// Permutation sending mode `k` to `image[k]`.
    pub fn permutation(image: &[usize]) -> Result<Self> {
        let n = image.len();
        let mut m = DMatrix::zeros(n, n);
        let mut seen = vec![false; n];
        for (k, &j) in image.iter().enumerate() {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(Error::RoutingCollision(format!(
                    "mode #{k} is routed onto an occupied or missing target #{j}"
                )));
            }
            m[(j, k)] = Complex64::new(1.0, 0.0);
        }
        Ok(ModeUnitary(m))
    }

    /// Identity except for a `[[cos θ, i sin θ], [i sin θ, cos θ]]` block on
    /// each listed mode pair.
    pub fn coupled_pairs(dim: usize, pairs: &[(usize, usize)], theta: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        Self::pair_blocks(dim, pairs, c, s)
    }

    /// Block `[[t, i r], [i r, t]]` on each pair, with `t² + r² = 1`.
    pub(crate) fn pair_blocks(
        dim: usize,
        pairs: &[(usize, usize)],
        t: f64,
        r: f64,
    ) -> Result<Self> {
        let mut m = DMatrix::identity(dim, dim);
        let mut used = vec![false; dim];
        for &(a, b) in pairs {
            if a >= dim || b >= dim {
                return Err(Error::UnknownMode(format!("#{}", a.max(b))));
            }
            if a == b || used[a] || used[b] {
                return Err(Error::InvalidComponent(format!(
                    "coupled pairs overlap at mode #{}",
                    if used[a] || a == b { a } else { b }
                )));
            }
            used[a] = true;
            used[b] = true;
            let straight = Complex64::new(t, 0.0);
            let cross = Complex64::new(0.0, r);
            m[(a, a)] = straight;
            m[(b, b)] = straight;
            m[(a, b)] = cross;
            m[(b, a)] = cross;
        }
        ModeUnitary::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// `next · self`: apply `self` first, then `next`.
    pub fn then(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: next.dim(),
            });
        }
        Ok(ModeUnitary(&next.0 * &self.0))
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary(self.0.adjoint())
    }

    /// Largest entry of `|U·U† - I|`.
    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }

    /// Haar-distributed unitary from the QR decomposition of a complex
    /// Gaussian matrix, with the phases of `R`'s diagonal folded into `Q`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        ModeUnitary(q)
    }
}

impl Index<(usize, usize)> for ModeUnitary {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let prod = m * m.adjoint();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn rejects_non_unitary() {
        let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(ModeUnitary::new(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn coupled_pair_block_convention() {
        let u = ModeUnitary::coupled_pairs(3, &[(0, 2)], FRAC_PI_4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u[(0, 0)] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((u[(2, 0)] - Complex64::new(0.0, h)).norm() < 1e-15);
        assert_eq!(u[(1, 1)], Complex64::new(1.0, 0.0));
        assert!(ModeUnitary::coupled_pairs(3, &[(0, 1), (1, 2)], 0.3).is_err());
    }

    #[test]
    fn permutation_collisions() {
        assert!(ModeUnitary::permutation(&[1, 0, 2]).is_ok());
        assert!(matches!(
            ModeUnitary::permutation(&[1, 1, 2]),
            Err(Error::RoutingCollision(_))
        ));
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..8 {
            let u = ModeUnitary::random(n, &mut rng);
            assert!(u.deviation() < UNITARITY_TOLERANCE);
        }
    }
}
