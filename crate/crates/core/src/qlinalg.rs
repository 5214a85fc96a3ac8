//! Dense complex linear algebra over composite Hilbert spaces.
//!
//! Matrices are stored row-major in [`ndarray::Array2`]. Composite basis
//! indices are big-endian: the first subsystem is the most significant digit,
//! so `|i_1 i_2 ... i_n⟩` has linear index `((i_1 d_2 + i_2) d_3 + ...) + i_n`.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for identities that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for quantities that accumulate products.
pub const ACCUM_TOL: f64 = 1e-10;

/// Local dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertShape {
    local_dims: Vec<usize>,
}

impl HilbertShape {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(Error::InvalidSubsystems("shape needs at least one subsystem".into()));
        }
        if let Some(&d) = local_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self { local_dims })
    }

    /// `count` subsystems of dimension `dim` each.
    pub fn qudits(dim: usize, count: usize) -> Result<Self> {
        Self::new(vec![dim; count])
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.local_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn concat(&self, other: &HilbertShape) -> HilbertShape {
        let mut local_dims = self.local_dims.clone();
        local_dims.extend_from_slice(&other.local_dims);
        HilbertShape { local_dims }
    }

    /// Digits of a linear index, one per subsystem.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.local_dims.len()];
        for (slot, &d) in digits.iter_mut().zip(&self.local_dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    pub fn linear_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.local_dims)
            .fold(0, |acc, (&digit, &d)| acc * d + digit)
    }

    fn check_same(&self, other: &HilbertShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.local_dims.clone(),
                found: other.local_dims.clone(),
            });
        }
        Ok(())
    }
}

/// Register of `len` digits in base `base`, big-endian.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    digits: Vec<usize>,
    base: usize,
}

impl MultiIndex {
    pub fn new(digits: Vec<usize>, base: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidDimension(base));
        }
        if let Some(&digit) = digits.iter().find(|&&x| x >= base) {
            return Err(Error::IndexOutOfRange { index: digit, bound: base });
        }
        Ok(Self { digits, base })
    }

    pub fn zero(len: usize, base: usize) -> Result<Self> {
        Self::new(vec![0; len], base)
    }

    pub fn from_linear(mut index: usize, base: usize, len: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidDimension(base));
        }
        let bound = base.pow(len as u32);
        if index >= bound {
            return Err(Error::IndexOutOfRange { index, bound });
        }
        let mut digits = vec![0; len];
        for slot in digits.iter_mut().rev() {
            *slot = index % base;
            index /= base;
        }
        Ok(Self { digits, base })
    }

    pub fn to_linear(&self) -> usize {
        self.digits.iter().fold(0, |acc, &x| acc * self.base + x)
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Componentwise difference modulo the base.
    pub fn mod_sub(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.base, other.base);
        debug_assert_eq!(self.len(), other.len());
        let b = self.base;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(&x, &y)| (x + b - y) % b)
            .collect();
        MultiIndex { digits, base: b }
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    shape: HilbertShape,
    amplitudes: Array1<C64>,
}

impl Ket {
    /// Builds a ket, rescaling the amplitudes to unit norm.
    pub fn new(shape: HilbertShape, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(Error::MatrixSize { side: amplitudes.len(), total: shape.total_dim() });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { shape, amplitudes: amplitudes.mapv(|a| a / norm) })
    }

    /// Wraps amplitudes that are already unit norm, rejecting anything that is not.
    pub fn from_normalized(shape: HilbertShape, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(Error::MatrixSize { side: amplitudes.len(), total: shape.total_dim() });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ACCUM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { shape, amplitudes })
    }

    pub fn basis(shape: HilbertShape, index: usize) -> Result<Self> {
        let total = shape.total_dim();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, bound: total });
        }
        let mut amplitudes = Array1::zeros(total);
        amplitudes[index] = ONE;
        Ok(Self { shape, amplitudes })
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        self.shape.check_same(&other.shape)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let n = other.amplitudes.len();
        let mut amplitudes = Array1::zeros(self.amplitudes.len() * n);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            for (j, &b) in other.amplitudes.iter().enumerate() {
                amplitudes[i * n + j] = a * b;
            }
        }
        Ket { shape: self.shape.concat(&other.shape), amplitudes }
    }

    /// `U|self⟩` for a unitary `U`; the result is not renormalized.
    pub fn apply(&self, op: &Operator) -> Result<Ket> {
        self.shape.check_same(&op.shape)?;
        Ok(Ket { shape: self.shape.clone(), amplitudes: op.matrix.dot(&self.amplitudes) })
    }

    pub fn projector(&self) -> Operator {
        let n = self.amplitudes.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| self.amplitudes[i] * self.amplitudes[j].conj());
        Operator { shape: self.shape.clone(), matrix }
    }
}

/// Square complex matrix acting on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    shape: HilbertShape,
    matrix: Array2<C64>,
}

impl Operator {
    pub fn new(shape: HilbertShape, matrix: Array2<C64>) -> Result<Self> {
        let total = shape.total_dim();
        let (rows, cols) = matrix.dim();
        if rows != total || cols != total {
            return Err(Error::MatrixSize { side: rows.max(cols), total });
        }
        Ok(Self { shape, matrix })
    }

    pub fn identity(shape: HilbertShape) -> Self {
        let n = shape.total_dim();
        Self { shape, matrix: Array2::eye(n) }
    }

    /// Permutation operator sending basis state `j` to `map(j)`.
    ///
    /// `map` must be a bijection on `0..total_dim`.
    pub fn from_basis_map(shape: HilbertShape, map: impl Fn(usize) -> usize) -> Self {
        let n = shape.total_dim();
        let mut matrix = Array2::zeros((n, n));
        for j in 0..n {
            matrix[[map(j), j]] = ONE;
        }
        Self { shape, matrix }
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Operator {
        Operator { shape: self.shape.clone(), matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    /// Entrywise complex conjugate (not the adjoint).
    pub fn conj(&self) -> Operator {
        Operator { shape: self.shape.clone(), matrix: self.matrix.mapv(|z| z.conj()) }
    }

    pub fn matmul(&self, rhs: &Operator) -> Result<Operator> {
        self.shape.check_same(&rhs.shape)?;
        Ok(Operator { shape: self.shape.clone(), matrix: self.matrix.dot(&rhs.matrix) })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// Kronecker product; the shape is the concatenation of both shapes.
    pub fn tensor(&self, rhs: &Operator) -> Operator {
        let (n, m) = (self.dim(), rhs.dim());
        let mut matrix = Array2::zeros((n * m, n * m));
        for ((i, j), &a) in self.matrix.indexed_iter() {
            if a == ZERO {
                continue;
            }
            let mut block = matrix.slice_mut(ndarray::s![i * m..(i + 1) * m, j * m..(j + 1) * m]);
            block.zip_mut_with(&rhs.matrix, |dst, &b| *dst = a * b);
        }
        Operator { shape: self.shape.concat(&rhs.shape), matrix }
    }

    /// Lifts an operator on the listed subsystems of `shape` to the whole space,
    /// acting as the identity elsewhere. `self`'s factors are ordered as `targets`.
    pub fn embed(&self, shape: &HilbertShape, targets: &[usize]) -> Result<Operator> {
        let dims = shape.local_dims();
        let mut seen = vec![false; dims.len()];
        for &t in targets {
            if t >= dims.len() || std::mem::replace(&mut seen[t], true) {
                return Err(Error::InvalidSubsystems(format!("bad target list {targets:?}")));
            }
        }
        let local: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
        if local != self.shape.local_dims() {
            return Err(Error::ShapeMismatch { expected: local, found: self.shape.local_dims().to_vec() });
        }
        let n = shape.total_dim();
        let mut matrix = Array2::zeros((n, n));
        for col in 0..n {
            let col_digits = shape.digits(col);
            let local_col = self.shape.linear_index(&targets.iter().map(|&t| col_digits[t]).collect::<Vec<_>>());
            for local_row in 0..self.dim() {
                let value = self.matrix[[local_row, local_col]];
                if value == ZERO {
                    continue;
                }
                let mut row_digits = col_digits.clone();
                for (&t, digit) in targets.iter().zip(self.shape.digits(local_row)) {
                    row_digits[t] = digit;
                }
                matrix[[shape.linear_index(&row_digits), col]] = value;
            }
        }
        Ok(Operator { shape: shape.clone(), matrix })
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.matrix
            .indexed_iter()
            .map(|((i, j), z)| (z - self.matrix[[j, i]].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Largest entry of `|U†U − 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let product = self.adjoint().matrix.dot(&self.matrix);
        max_deviation_from_identity(&product)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        let squared = self.matrix.dot(&self.matrix);
        self.is_hermitian(tol) && max_abs_diff(&squared, &self.matrix) <= tol
    }
}

/// Unit-trace hermitian operator. Positivity is checked on demand only.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    operator: Operator,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace at the 1e-12 level.
    pub fn new(operator: Operator) -> Result<Self> {
        let deviation = operator.hermiticity_deviation();
        if deviation > EXACT_TOL {
            return Err(Error::NotHermitian(deviation));
        }
        let trace = operator.trace();
        if (trace.re - 1.0).abs() > EXACT_TOL || trace.im.abs() > EXACT_TOL {
            return Err(Error::TraceNotOne(trace.re));
        }
        Ok(Self { operator })
    }

    pub fn from_matrix(shape: HilbertShape, matrix: Array2<C64>) -> Result<Self> {
        Self::new(Operator::new(shape, matrix)?)
    }

    pub fn pure(ket: &Ket) -> Self {
        Self { operator: ket.projector() }
    }

    pub fn maximally_mixed(shape: HilbertShape) -> Self {
        let n = shape.total_dim() as f64;
        let mut operator = Operator::identity(shape);
        operator.matrix.mapv_inplace(|z| z / n);
        Self { operator }
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.operator.matrix
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.operator.shape
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn trace(&self) -> f64 {
        self.operator.trace().re
    }

    /// `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        self.operator.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues of the hermitian matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.operator.matrix)
    }

    /// Positive semidefiniteness: smallest eigenvalue at least `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.eigenvalues().first().is_none_or(|&e| e >= -tol)
    }

    /// Reduced state on the subsystems in `keep`, in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let shape = self.shape();
        let dims = shape.local_dims();
        if keep.is_empty() {
            return Err(Error::InvalidSubsystems("keep set is empty".into()));
        }
        let mut kept = vec![false; dims.len()];
        for &k in keep {
            if k >= dims.len() {
                return Err(Error::InvalidSubsystems(format!("subsystem {k} out of range")));
            }
            kept[k] = true;
        }
        let keep_idx: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).collect();
        let traced_idx: Vec<usize> = (0..dims.len()).filter(|&k| !kept[k]).collect();
        let keep_shape = HilbertShape::new(keep_idx.iter().map(|&k| dims[k]).collect())?;
        if traced_idx.is_empty() {
            return Ok(self.clone());
        }
        let traced_shape = HilbertShape::new(traced_idx.iter().map(|&k| dims[k]).collect())?;

        let compose = |kept_digits: &[usize], traced_digits: &[usize]| {
            let mut digits = vec![0; dims.len()];
            for (&k, &d) in keep_idx.iter().zip(kept_digits) {
                digits[k] = d;
            }
            for (&k, &d) in traced_idx.iter().zip(traced_digits) {
                digits[k] = d;
            }
            shape.linear_index(&digits)
        };

        let n_keep = keep_shape.total_dim();
        let n_traced = traced_shape.total_dim();
        // full_index[a][t]: linear index of (kept a, traced t) in the full space
        let full_index: Vec<Vec<usize>> = (0..n_keep)
            .map(|a| {
                let ad = keep_shape.digits(a);
                (0..n_traced).map(|t| compose(&ad, &traced_shape.digits(t))).collect()
            })
            .collect();
        let m = self.matrix();
        let matrix = Array2::from_shape_fn((n_keep, n_keep), |(a, b)| {
            (0..n_traced).map(|t| m[[full_index[a][t], full_index[b][t]]]).sum()
        });
        Ok(DensityMatrix { operator: Operator { shape: keep_shape, matrix } })
    }

    /// `(PρP / Tr[PρP], Tr[PρP])` for a hermitian projector `P`.
    pub fn project_renormalize(&self, projector: &Operator) -> Result<(DensityMatrix, f64)> {
        self.shape().check_same(projector.shape())?;
        if !projector.is_projector(ACCUM_TOL) {
            let squared = projector.matrix.dot(&projector.matrix);
            return Err(Error::NotProjector(max_abs_diff(&squared, &projector.matrix)));
        }
        let p = &projector.matrix;
        let projected = p.dot(self.matrix()).dot(p);
        let probability = projected.diag().sum().re;
        if probability < 1e-14 {
            return Err(Error::ZeroProbability(probability));
        }
        let matrix = projected.mapv(|z| z / probability);
        Ok((DensityMatrix { operator: Operator { shape: self.shape().clone(), matrix } }, probability))
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn pure_fidelity(&self, psi: &Ket) -> Result<f64> {
        self.shape().check_same(psi.shape())?;
        let a = psi.amplitudes();
        let value: C64 = self.matrix().dot(a).iter().zip(a).map(|(x, y)| y.conj() * x).sum();
        debug_assert!(value.im.abs() < EXACT_TOL * self.dim() as f64);
        Ok(value.re)
    }

    /// `UρU†` for a unitary `U`.
    pub fn conjugate_by(&self, unitary: &Operator) -> Result<DensityMatrix> {
        self.shape().check_same(unitary.shape())?;
        let deviation = unitary.unitarity_deviation();
        if deviation > ACCUM_TOL {
            return Err(Error::NotUnitary(deviation));
        }
        let u = &unitary.matrix;
        let matrix = hermitian_part(u.dot(self.matrix()).dot(&u.t().mapv(|z| z.conj())));
        Ok(DensityMatrix { operator: Operator { shape: self.shape().clone(), matrix } })
    }

    /// `(U_1 ⊗ ... ⊗ U_n) ρ (U_1 ⊗ ... ⊗ U_n)†` with one unitary factor per
    /// subsystem, applied one subsystem at a time.
    pub fn conjugate_by_local(&self, factors: &[Operator]) -> Result<DensityMatrix> {
        let dims = self.shape().local_dims().to_vec();
        if factors.len() != dims.len() {
            return Err(Error::InvalidSubsystems(format!(
                "{} local factors for {} subsystems",
                factors.len(),
                dims.len()
            )));
        }
        let mut matrix = self.matrix().clone();
        for (k, factor) in factors.iter().enumerate() {
            if factor.dim() != dims[k] {
                return Err(Error::ShapeMismatch { expected: vec![dims[k]], found: factor.shape.local_dims().to_vec() });
            }
            let deviation = factor.unitarity_deviation();
            if deviation > ACCUM_TOL {
                return Err(Error::NotUnitary(deviation));
            }
            matrix = apply_local_left(&matrix, &factor.matrix, &dims, k);
            // MU† = (UM†)†
            matrix = apply_local_left(&matrix.t().mapv(|z| z.conj()), &factor.matrix, &dims, k)
                .t()
                .mapv(|z| z.conj());
        }
        Ok(DensityMatrix { operator: Operator { shape: self.shape().clone(), matrix: hermitian_part(matrix) } })
    }

    /// Largest entry of `|self − other|`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(self.matrix(), other.matrix())
    }

    /// Frobenius norm of `self − other`.
    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        self.matrix()
            .iter()
            .zip(other.matrix())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `(M + M†)/2`. Conjugation outputs are passed through this so rounding
/// never leaves an anti-hermitian part for nonlinear maps to amplify.
fn hermitian_part(m: Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| (m[[i, j]] + m[[j, i]].conj()) * 0.5)
}

/// Multiplies `factor` into the row index of `matrix` on subsystem `k`.
fn apply_local_left(matrix: &Array2<C64>, factor: &Array2<C64>, dims: &[usize], k: usize) -> Array2<C64> {
    let d = dims[k];
    let inner: usize = dims[k + 1..].iter().product();
    let outer: usize = dims[..k].iter().product();
    let cols = matrix.ncols();
    // rows factor as (outer, d, inner); view as outer blocks of a (d, inner*cols) slab
    let standard = matrix.as_standard_layout();
    let view = standard
        .view()
        .into_shape_with_order((outer, d, inner * cols))
        .expect("row count factors over local dimensions");
    let mut out = Array2::<C64>::zeros(matrix.dim());
    {
        let mut out_view = out
            .view_mut()
            .into_shape_with_order((outer, d, inner * cols))
            .expect("row count factors over local dimensions");
        for (src, mut dst) in view.axis_iter(Axis(0)).zip(out_view.axis_iter_mut(Axis(0))) {
            dst.assign(&factor.dot(&src));
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_deviation_from_identity(m: &Array2<C64>) -> f64 {
    m.indexed_iter()
        .map(|((i, j), z)| if i == j { (z - ONE).norm() } else { z.norm() })
        .fold(0.0, f64::max)
}

fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let mut values: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}
