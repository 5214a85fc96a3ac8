#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use qudit_purify::qlinalg::{DensityMatrix, HilbertShape, Ket, Operator, ONE, ZERO};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state from normalized complex Gaussians.
pub fn random_ket(shape: HilbertShape, rng: &mut ChaCha8Rng) -> Ket {
    let amps = Array1::from_shape_fn(shape.total_dim(), |_| gaussian(rng));
    Ket::new(shape, amps).unwrap()
}

/// Full-rank random state `GG†/Tr` with an exactly hermitian matrix.
pub fn random_density(shape: HilbertShape, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let n = shape.total_dim();
    let g = Array2::from_shape_fn((n, n), |_| gaussian(rng));
    let m = g.dot(&g.t().mapv(|z| z.conj()));
    let tr = m.diag().sum().re;
    let m = Array2::from_shape_fn((n, n), |(i, j)| {
        if i <= j {
            m[[i, j]] / tr
        } else {
            m[[j, i]].conj() / tr
        }
    });
    let m = Array2::from_shape_fn((n, n), |(i, j)| if i == j { Complex64::new(m[[i, i]].re, 0.0) } else { m[[i, j]] });
    DensityMatrix::from_matrix(shape, m).unwrap()
}

/// `|i⟩|j⟩ → |i⟩|i ⊕ j⟩`, the additive, non-hermitian alternative to GXOR.
pub fn additive_xor(dim: usize) -> Operator {
    let n = dim * dim;
    let m = Array2::from_shape_fn((n, n), |(r, c)| {
        let (i, j) = (c / dim, c % dim);
        if r == i * dim + (i + j) % dim {
            ONE
        } else {
            ZERO
        }
    });
    Operator::new(HilbertShape::qudits(dim, 2).unwrap(), m).unwrap()
}

/// `(1/D) Σ_i |ii⟩⟨ii|`.
pub fn diagonal_mixture(dim: usize) -> DensityMatrix {
    let n = dim * dim;
    let m = Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c && r % (dim + 1) == 0 {
            Complex64::new(1.0 / dim as f64, 0.0)
        } else {
            ZERO
        }
    });
    DensityMatrix::from_matrix(HilbertShape::qudits(dim, 2).unwrap(), m).unwrap()
}
