//! The nonlinear map induced by GXOR gates and filtering measurements.
//!
//! A control register of `M` qudits is entangled by bitwise GXOR gates with
//! `N` target registers holding copies of the same state. Projecting target
//! `a` onto `|p_a⟩` leaves the control in
//!
//! ```text
//! σ'_IJ ∝ σ_IJ · Π_a σ_{I⊖p_a, J⊖p_a}
//! ```
//!
//! with componentwise subtraction modulo `D`. [`apply_map`] evaluates this
//! index formula directly; [`apply_map_oracle`] builds the full
//! `(1+N)·M`-qudit tensor and runs the gates and projections explicitly.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gates::gxor;
use crate::qlinalg::{DensityMatrix, HilbertShape, Ket, MultiIndex, Operator, C64};

const ZERO_PROBABILITY: f64 = 1e-14;

/// Register size, number of target copies and the projection per target.
#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    dim: usize,
    qudits: usize,
    projections: Vec<MultiIndex>,
}

impl MapConfig {
    /// One projection per target register; `copies` is `projections.len()`.
    pub fn new(dim: usize, qudits: usize, projections: Vec<MultiIndex>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if qudits == 0 {
            return Err(Error::InvalidConfig("register needs at least one qudit".into()));
        }
        if projections.is_empty() {
            return Err(Error::InvalidConfig("at least one target copy is required".into()));
        }
        for p in &projections {
            if p.base() != dim || p.len() != qudits {
                return Err(Error::InvalidConfig(format!(
                    "projection {:?} is not a {qudits}-digit base-{dim} index",
                    p.digits()
                )));
            }
        }
        Ok(Self { dim, qudits, projections })
    }

    /// All targets projected onto `|0...0⟩`.
    pub fn all_zero(dim: usize, qudits: usize, copies: usize) -> Result<Self> {
        let zero = MultiIndex::zero(qudits, dim)?;
        Self::new(dim, qudits, vec![zero; copies])
    }

    /// One target projected onto `|digits⟩`.
    pub fn single(dim: usize, digits: Vec<usize>) -> Result<Self> {
        let qudits = digits.len();
        Self::new(dim, qudits, vec![MultiIndex::new(digits, dim)?])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn copies(&self) -> usize {
        self.projections.len()
    }

    pub fn projections(&self) -> &[MultiIndex] {
        &self.projections
    }

    fn register_shape(&self) -> HilbertShape {
        HilbertShape::qudits(self.dim, self.qudits).expect("dimension validated")
    }

    fn check_state(&self, sigma: &DensityMatrix) -> Result<()> {
        let expected = self.register_shape();
        if sigma.shape() != &expected {
            return Err(Error::ShapeMismatch {
                expected: expected.local_dims().to_vec(),
                found: sigma.shape().local_dims().to_vec(),
            });
        }
        Ok(())
    }
}

/// Post-measurement control state and the probability of the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MapOutcome {
    pub output: DensityMatrix,
    pub success_probability: f64,
}

/// Closed-form map for identical control and target copies.
pub fn apply_map(sigma: &DensityMatrix, cfg: &MapConfig) -> Result<MapOutcome> {
    cfg.check_state(sigma)?;
    let n = sigma.dim();
    let (dim, qudits) = (cfg.dim, cfg.qudits);
    // shifted[a][I] = linear index of I ⊖ p_a
    let shifted: Vec<Vec<usize>> = cfg
        .projections
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| {
                    MultiIndex::from_linear(i, dim, qudits)
                        .expect("index below D^M")
                        .mod_sub(p)
                        .to_linear()
                })
                .collect()
        })
        .collect();
    let s = sigma.matrix();
    let unnormalized = Array2::from_shape_fn((n, n), |(i, j)| {
        shifted.iter().fold(s[[i, j]], |acc, table| acc * s[[table[i], table[j]]])
    });
    normalize(cfg.register_shape(), unnormalized)
}

fn normalize(shape: HilbertShape, mut unnormalized: Array2<C64>) -> Result<MapOutcome> {
    let success_probability = unnormalized.diag().iter().map(|z| z.re).sum::<f64>();
    if success_probability < ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(success_probability));
    }
    unnormalized.mapv_inplace(|z| z / success_probability);
    Ok(MapOutcome {
        output: DensityMatrix::from_matrix(shape, unnormalized)?,
        success_probability,
    })
}

fn oracle_supported(dim: usize, qudits: usize, copies: usize) -> bool {
    match dim {
        2 => qudits <= 2 && copies <= 2,
        3..=5 => qudits == 1 && copies == 1,
        _ => false,
    }
}

/// Brute-force map with identical copies of `sigma` as targets.
pub fn apply_map_oracle(sigma: &DensityMatrix, cfg: &MapConfig) -> Result<MapOutcome> {
    let targets = vec![sigma.clone(); cfg.copies()];
    apply_map_oracle_with_targets(sigma, &targets, cfg)
}

/// Brute-force map with arbitrary target states, one per projection.
///
/// Builds `σ_c ⊗ σ_t1 ⊗ ... ⊗ σ_tN`, applies `GXOR` between control qudit `j`
/// and qudit `j` of every target register, projects each target onto its
/// `|p_a⟩`, traces the targets out and renormalizes.
pub fn apply_map_oracle_with_targets(
    control: &DensityMatrix,
    targets: &[DensityMatrix],
    cfg: &MapConfig,
) -> Result<MapOutcome> {
    let (dim, qudits, copies) = (cfg.dim, cfg.qudits, cfg.copies());
    if !oracle_supported(dim, qudits, copies) {
        return Err(Error::OracleTooLarge { dim, qudits, copies });
    }
    cfg.check_state(control)?;
    if targets.len() != copies {
        return Err(Error::InvalidConfig(format!("{} target states for {copies} projections", targets.len())));
    }
    for t in targets {
        cfg.check_state(t)?;
    }

    let joint = targets
        .iter()
        .fold(control.operator().clone(), |acc, t| acc.tensor(t.operator()));
    let full_shape = joint.shape().clone();
    let mut state = DensityMatrix::new(joint)?;

    let pair_gate = gxor(dim)?;
    for a in 0..copies {
        for j in 0..qudits {
            let gate = pair_gate.embed(&full_shape, &[j, (1 + a) * qudits + j])?;
            state = state.conjugate_by(&gate)?;
        }
    }

    let register = cfg.register_shape();
    let projector = cfg.projections.iter().try_fold(Operator::identity(register.clone()), |acc, p| {
        Ket::basis(register.clone(), p.to_linear()).map(|k| acc.tensor(&k.projector()))
    })?;
    let (projected, probability) = state.project_renormalize(&projector)?;
    let control_only: Vec<usize> = (0..qudits).collect();
    Ok(MapOutcome { output: projected.partial_trace(&control_only)?, success_probability: probability })
}
