//! Seeded generators for fuzz inputs: Gaussian matrices, isometries, pure states.
//!
//! Every generator takes a 64-bit seed feeding a ChaCha stream, so results
//! are reproducible for a given seed on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::complexmat::CMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    CMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

/// Orthonormalize the columns of a Gaussian `rows x cols` matrix (`rows >= cols`).
pub fn isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols, got {rows}x{cols}");
    loop {
        let g = gaussian_matrix(rng, rows, cols);
        if let Some(q) = gram_schmidt(&g) {
            return q;
        }
    }
}

/// Modified Gram-Schmidt on columns; `None` when the columns are numerically dependent.
fn gram_schmidt(m: &CMatrix) -> Option<CMatrix> {
    let (rows, cols) = m.shape();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = m.column(j);
        // two passes keep the result orthonormal to ~1e-15
        for _ in 0..2 {
            for u in &q {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        q.push(v.into_iter().map(|z| z / norm).collect());
    }
    let data = (0..rows).flat_map(|i| q.iter().map(move |col| col[i])).collect();
    Some(CMatrix::new(rows, cols, data).expect("shape"))
}

pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    isometry(rng, n, n)
}

/// Haar-random unit vector.
pub fn pure_state<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random density matrix `G G^dagger / Tr(G G^dagger)` of the given rank.
pub fn mixed_state<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let rho = g.matmul(&g.dagger()).expect("shape");
    let tr = rho.trace().expect("square").re;
    rho.scale(Complex64::new(1.0 / tr, 0.0))
}
