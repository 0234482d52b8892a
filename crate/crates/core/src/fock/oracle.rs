//! Transition amplitudes through passive linear optics from the matrix
//! permanent. Shares no code with [`super::apply_mode_unitary`].

use num_complex::Complex64;

use super::evolve::factorial;
use super::state::Occupation;
use super::unitary::ModeUnitary;
use crate::error::{Error, Result};

/// Photon-number ceiling of the oracle.
pub const ORACLE_MAX_PHOTONS: usize = 4;

/// `⟨out| U |in⟩ = per(U[out, in]) / √(Π n_k! Π m_j!)`, where the submatrix
/// repeats row `j` `m_j` times and column `k` `n_k` times.
///
/// Returns zero when photon numbers differ.
pub fn transition_amplitude_oracle(
    input: &Occupation,
    output: &Occupation,
    u: &ModeUnitary,
) -> Result<Complex64> {
    for occ in [input, output] {
        if occ.len() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: occ.len(),
            });
        }
    }
    let n = input.total();
    if n != output.total() {
        return Ok(Complex64::default());
    }
    if n > ORACLE_MAX_PHOTONS {
        return Err(Error::TooManyPhotons {
            found: n,
            max: ORACLE_MAX_PHOTONS,
        });
    }
    let cols = repeated_indices(input);
    let rows = repeated_indices(output);
    let sub: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|&j| cols.iter().map(|&k| u[(j, k)]).collect())
        .collect();
    let norm: f64 = input
        .counts()
        .iter()
        .chain(output.counts())
        .map(|&c| factorial(c))
        .product();
    Ok(permanent(&sub) / norm.sqrt())
}

fn repeated_indices(occ: &Occupation) -> Vec<usize> {
    occ.counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
        .collect()
}

/// Permanent by direct expansion over all permutations.
pub fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    fn expand(m: &[Vec<Complex64>], row: usize, used: &mut [bool]) -> Complex64 {
        if row == m.len() {
            return Complex64::new(1.0, 0.0);
        }
        let mut sum = Complex64::default();
        for col in 0..m.len() {
            if !used[col] {
                used[col] = true;
                sum += m[row][col] * expand(m, row + 1, used);
                used[col] = false;
            }
        }
        sum
    }
    expand(m, 0, &mut vec![false; m.len()])
}

/// All occupation vectors over `modes` modes with exactly `photons` photons,
/// in lexicographic order.
pub fn enumerate_occupations(modes: usize, photons: usize) -> Vec<Occupation> {
    fn fill(slot: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Occupation>) {
        if slot + 1 == cur.len() {
            cur[slot] = left as u8;
            out.push(Occupation::new(cur.clone()));
            return;
        }
        for c in (0..=left).rev() {
            cur[slot] = c as u8;
            fill(slot + 1, left - c, cur, out);
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        return out;
    }
    fill(0, photons, &mut vec![0; modes], &mut out);
    out
}
