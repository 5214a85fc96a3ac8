//! Qudit gates: the hermitian generalized XOR, the discrete Fourier gate,
//! the generalized Bell basis built from them, and the teleportation
//! corrections for that basis.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::qlinalg::{HilbertShape, Ket, Operator, C64, ZERO};

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

fn check_label(value: usize, dim: usize) -> Result<()> {
    if value >= dim {
        return Err(Error::IndexOutOfRange { index: value, bound: dim });
    }
    Ok(())
}

/// `exp(i 2π power / dim)`, reducing the exponent modulo `dim` first.
pub fn root_of_unity(power: i64, dim: usize) -> C64 {
    let reduced = power.rem_euclid(dim as i64) as f64;
    C64::from_polar(1.0, TAU * reduced / dim as f64)
}

/// `(i − j) mod dim`.
pub fn mod_sub(i: usize, j: usize, dim: usize) -> Result<usize> {
    check_dim(dim)?;
    check_label(i, dim)?;
    check_label(j, dim)?;
    Ok((i + dim - j) % dim)
}

/// GXOR on two qudits: `|i⟩|j⟩ → |i⟩|i ⊖ j⟩`.
///
/// A permutation matrix that is its own inverse and its own adjoint.
pub fn gxor(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let shape = HilbertShape::qudits(dim, 2)?;
    Ok(Operator::from_basis_map(shape, |index| {
        let (i, j) = (index / dim, index % dim);
        i * dim + (i + dim - j) % dim
    }))
}

/// Discrete Fourier gate, entry `(k, l) = exp(i2πlk/D)/√D`.
pub fn fourier(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let scale = 1.0 / (dim as f64).sqrt();
    let matrix = Array2::from_shape_fn((dim, dim), |(k, l)| root_of_unity((k * l) as i64, dim) * scale);
    Operator::new(HilbertShape::qudits(dim, 1)?, matrix)
}

/// Label `(l, m)` of the generalized Bell state `|ψ_lm⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    l: usize,
    m: usize,
    dim: usize,
}

impl BellLabel {
    pub fn new(l: usize, m: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_label(l, dim)?;
        check_label(m, dim)?;
        Ok(Self { l, m, dim })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `D²` labels, `l` major.
    pub fn all(dim: usize) -> Result<Vec<BellLabel>> {
        check_dim(dim)?;
        Ok((0..dim * dim).map(|x| BellLabel { l: x / dim, m: x % dim, dim }).collect())
    }
}

/// `|ψ_lm⟩ = GXOR[(F|l⟩) ⊗ |m⟩]`.
pub fn bell_state(label: BellLabel) -> Ket {
    let dim = label.dim;
    let single = HilbertShape::qudits(dim, 1).expect("label dimension validated");
    let fourier_l = Ket::basis(single.clone(), label.l)
        .and_then(|k| k.apply(&fourier(dim)?))
        .expect("label validated");
    let product = fourier_l.tensor(&Ket::basis(single, label.m).expect("label validated"));
    let entangled = product.apply(&gxor(dim).expect("dimension validated")).expect("two-qudit shape");
    Ket::new(entangled.shape().clone(), entangled.amplitudes().clone()).expect("unitary image is nonzero")
}

/// The Bell state `|ψ_00⟩ = Σ_i |ii⟩/√D`.
pub fn bell_00(dim: usize) -> Result<Ket> {
    Ok(bell_state(BellLabel::new(0, 0, dim)?))
}

/// Applies GXOR to a two-qudit ket, mapping `|ψ_lm⟩` back to `(F|l⟩)|m⟩`.
pub fn disentangle(psi: &Ket) -> Result<Ket> {
    let dims = psi.shape().local_dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        let d = dims[0];
        return Err(Error::ShapeMismatch { expected: vec![d, d], found: dims.to_vec() });
    }
    psi.apply(&gxor(dims[0])?)
}

/// Bob's correction `U_lm|n⟩ = exp(−i2πn(l−j)/D) |n−k−m⟩` for a pair
/// prepared in `|ψ_jk⟩` when Alice measures `|ψ_lm⟩`.
pub fn teleport_correction(l: usize, m: usize, j: usize, k: usize, dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    for label in [l, m, j, k] {
        check_label(label, dim)?;
    }
    let mut matrix = Array2::from_elem((dim, dim), ZERO);
    for n in 0..dim {
        let row = (n + 2 * dim - k - m) % dim;
        matrix[[row, n]] = root_of_unity(-((n as i64) * (l as i64 - j as i64)), dim);
    }
    Operator::new(HilbertShape::qudits(dim, 1)?, matrix)
}

/// Outcome-by-outcome verification of qudit teleportation through `|ψ_jk⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportReport {
    /// Minimum over all Bell outcomes of `|⟨χ|recovered⟩|²`.
    pub worst_fidelity: f64,
    /// Born probability of each outcome `(l, m)`, indexed `l * D + m`.
    pub probabilities: Vec<f64>,
}

/// Teleports `chi` through `|ψ_jk⟩` for every one of the `D²` Bell outcomes
/// on the sender's pair and undoes `exp(−i2πjm/D)/D · U_lm` on the receiver.
///
/// The recovered state is not renormalized, so a fidelity of 1 also
/// certifies the `1/D` amplitude factor of each branch.
pub fn teleport_check(chi: &Ket, j: usize, k: usize) -> Result<TeleportReport> {
    let dims = chi.shape().local_dims();
    if dims.len() != 1 {
        return Err(Error::ShapeMismatch { expected: vec![dims[0]], found: dims.to_vec() });
    }
    let dim = dims[0];
    let norm = chi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let resource = bell_state(BellLabel::new(j, k, dim)?);
    let joint = chi.tensor(&resource);
    let amps = joint.amplitudes();
    let mut worst_fidelity = f64::INFINITY;
    let mut probabilities = Vec::with_capacity(dim * dim);
    for label in BellLabel::all(dim)? {
        let bell = bell_state(label);
        let b = bell.amplitudes();
        // receiver's branch: (⟨ψ_lm|_12 ⊗ 1_3)|Ψ⟩
        let branch = Array1::from_shape_fn(dim, |n| {
            (0..dim * dim).map(|ab| b[ab].conj() * amps[ab * dim + n]).sum::<C64>()
        });
        probabilities.push(branch.iter().map(|z| z.norm_sqr()).sum());

        let correction = teleport_correction(label.l, label.m, j, k, dim)?;
        let inverse_factor = root_of_unity((j * label.m) as i64, dim) * dim as f64;
        let recovered = correction.adjoint().matrix().dot(&branch).mapv(|z| z * inverse_factor);
        let overlap: C64 = chi.amplitudes().iter().zip(&recovered).map(|(a, r)| a.conj() * r).sum();
        worst_fidelity = worst_fidelity.min(overlap.norm_sqr());
    }
    Ok(TeleportReport { worst_fidelity, probabilities })
}
