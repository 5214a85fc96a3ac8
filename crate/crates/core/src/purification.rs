//! Iterative purification of two-qudit Werner states towards `|ψ_00⟩`.
//!
//! Each step pairs the ensemble into control/target copies, applies the
//! GXOR map with the target pair projected onto some `|ii⟩`, and then either
//! conjugates by the local Fourier twirl `F ⊗ F*` ([`ProtocolKind::GxorTwirl`])
//! or replaces the state by the Werner state of equal fidelity
//! ([`ProtocolKind::HorodeckiBaseline`]).
//!
//! States are propagated as dense `D² × D²` matrices.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{bell_00, fourier};
use crate::nonlinear_map::{apply_map, MapConfig, MapOutcome};
use crate::qlinalg::{DensityMatrix, HilbertShape, Operator, C64, EXACT_TOL};

/// Tolerance for the joint-shift symmetry and equality of projected outcomes.
pub const SHIFT_TOL: f64 = 1e-8;
/// Step budget used when no other is given.
pub const DEFAULT_MAX_STEPS: usize = 500;
const MAX_BISECTIONS: usize = 60;

/// Separable/entangled boundary of the Werner family, `λ_D = 1/(1+D)`.
pub fn separability_lambda(dim: usize) -> f64 {
    1.0 / (1.0 + dim as f64)
}

/// Fidelity at the separability boundary, `1/D`.
pub fn critical_fidelity(dim: usize) -> f64 {
    1.0 / dim as f64
}

/// `F = λ + (1 − λ)/D²`.
pub fn werner_fidelity(lambda: f64, dim: usize) -> f64 {
    let d2 = (dim * dim) as f64;
    lambda + (1.0 - lambda) / d2
}

/// Inverse of [`werner_fidelity`] on `F ∈ [1/D², 1]`.
pub fn lambda_of_fidelity(fidelity: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let floor = 1.0 / (dim * dim) as f64;
    if !(floor - EXACT_TOL..=1.0 + EXACT_TOL).contains(&fidelity) {
        return Err(Error::FidelityOutOfRange { fidelity, min: floor, max: 1.0 });
    }
    Ok(((fidelity - floor) / (1.0 - floor)).clamp(0.0, 1.0))
}

/// Werner state `λ|ψ_00⟩⟨ψ_00| + (1 − λ)·1/D²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerSpec {
    dim: usize,
    lambda: f64,
}

impl WernerSpec {
    /// Accepts `λ ∈ [−1/(D²−1), 1]`; negative values are outside the physical
    /// purification range and reported by [`WernerSpec::is_diagnostic`].
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let min = -1.0 / ((dim * dim) as f64 - 1.0);
        if !(min..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange { lambda, min });
        }
        Ok(Self { dim, lambda })
    }

    pub fn from_fidelity(dim: usize, fidelity: f64) -> Result<Self> {
        Self::new(dim, lambda_of_fidelity(fidelity, dim)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn fidelity(&self) -> f64 {
        werner_fidelity(self.lambda, self.dim)
    }

    pub fn is_diagnostic(&self) -> bool {
        self.lambda < 0.0
    }

    pub fn is_entangled(&self) -> bool {
        self.lambda > separability_lambda(self.dim)
    }
}

pub fn werner(spec: WernerSpec) -> DensityMatrix {
    let d = spec.dim;
    let n = d * d;
    let diag_noise = (1.0 - spec.lambda) / n as f64;
    let bell_weight = spec.lambda / d as f64;
    let matrix = Array2::from_shape_fn((n, n), |(r, c)| {
        let on_bell = r % (d + 1) == 0 && c % (d + 1) == 0;
        let mut value = if on_bell { bell_weight } else { 0.0 };
        if r == c {
            value += diag_noise;
        }
        C64::new(value, 0.0)
    });
    let shape = HilbertShape::qudits(d, 2).expect("dimension validated");
    DensityMatrix::from_matrix(shape, matrix).expect("Werner matrix is hermitian with unit trace")
}

/// Which second step follows the GXOR map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Local Fourier twirl `F ⊗ F*`.
    #[serde(rename = "gxor")]
    GxorTwirl,
    /// Depolarization back to a Werner state.
    #[serde(rename = "horodecki")]
    HorodeckiBaseline,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 2] = [ProtocolKind::GxorTwirl, ProtocolKind::HorodeckiBaseline];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::GxorTwirl => "gxor",
            ProtocolKind::HorodeckiBaseline => "horodecki",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gxor" | "gxor_twirl" | "gxor-twirl" => Ok(ProtocolKind::GxorTwirl),
            "horodecki" | "horodecki_baseline" | "horodecki-baseline" => Ok(ProtocolKind::HorodeckiBaseline),
            other => Err(format!("unknown protocol '{other}' (expected gxor or horodecki)")),
        }
    }
}

/// Which target outcomes count as a successful step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OutcomeAccounting {
    /// Any of the `D` outcomes `|ii⟩`.
    #[default]
    AllDiagonal,
    /// Only `|00⟩`. Applies to the baseline; the twirl protocol always keeps every `|ii⟩`.
    SingleOutcome,
}

fn two_qudit_dim(sigma: &DensityMatrix) -> Result<usize> {
    let dims = sigma.shape().local_dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::ShapeMismatch { expected: vec![dims[0], dims[0]], found: dims.to_vec() });
    }
    Ok(dims[0])
}

/// Conjugation by `F ⊗ F*`; leaves `|ψ_00⟩⟨ψ_00|` invariant.
pub fn twirl_fourier(sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = two_qudit_dim(sigma)?;
    let f = fourier(dim)?;
    sigma.conjugate_by_local(&[f.clone(), f.conj()])
}

/// Werner state with the same `|ψ_00⟩` fidelity as `sigma`.
pub fn depolarize_to_werner(sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = two_qudit_dim(sigma)?;
    let fidelity = sigma.pure_fidelity(&bell_00(dim)?)?;
    Ok(werner(WernerSpec::new(dim, lambda_of_fidelity(fidelity, dim)?)?))
}

/// Largest entry change under `|a⟩|b⟩ → |a+1⟩|b+1⟩` on both sides.
pub fn shift_covariance_deviation(sigma: &DensityMatrix) -> Result<f64> {
    let d = two_qudit_dim(sigma)?;
    let shift = |index: usize| ((index / d + 1) % d) * d + (index % d + 1) % d;
    let m = sigma.matrix();
    Ok(m.indexed_iter()
        .map(|((r, c), z)| (z - m[[shift(r), shift(c)]]).norm())
        .fold(0.0, f64::max))
}

/// State after one protocol step and its success statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: DensityMatrix,
    /// Total probability of the accepted outcomes.
    pub success_probability: f64,
    /// Probability of each target outcome `|ii⟩`, `i = 0..D`.
    pub outcome_probabilities: Vec<f64>,
}

/// Map outcomes for every target projection `|ii⟩`, checked to coincide.
fn diagonal_outcomes(sigma: &DensityMatrix, dim: usize) -> Result<Vec<MapOutcome>> {
    let deviation = shift_covariance_deviation(sigma)?;
    if deviation > SHIFT_TOL {
        return Err(Error::ShiftCovariance(deviation));
    }
    let outcomes = (0..dim)
        .map(|i| apply_map(sigma, &MapConfig::single(dim, vec![i, i])?))
        .collect::<Result<Vec<_>>>()?;
    let first = &outcomes[0];
    for other in &outcomes[1..] {
        let deviation = first
            .output
            .max_abs_diff(&other.output)
            .max((first.success_probability - other.success_probability).abs());
        if deviation > SHIFT_TOL {
            return Err(Error::OutcomeMismatch(deviation));
        }
    }
    Ok(outcomes)
}

pub fn protocol_step(sigma: &DensityMatrix, kind: ProtocolKind) -> Result<StepOutcome> {
    protocol_step_with(sigma, kind, OutcomeAccounting::AllDiagonal)
}

/// One iteration. `accounting` only changes the baseline's success probability.
pub fn protocol_step_with(
    sigma: &DensityMatrix,
    kind: ProtocolKind,
    accounting: OutcomeAccounting,
) -> Result<StepOutcome> {
    let dim = two_qudit_dim(sigma)?;
    let mut outcomes = diagonal_outcomes(sigma, dim)?;
    let outcome_probabilities: Vec<f64> = outcomes.iter().map(|o| o.success_probability).collect();
    let success_probability = match (kind, accounting) {
        (ProtocolKind::HorodeckiBaseline, OutcomeAccounting::SingleOutcome) => outcome_probabilities[0],
        _ => outcome_probabilities.iter().sum(),
    };
    let mapped = outcomes.swap_remove(0).output;
    let state = match kind {
        ProtocolKind::GxorTwirl => twirl_fourier(&mapped)?,
        ProtocolKind::HorodeckiBaseline => depolarize_to_werner(&mapped)?,
    };
    Ok(StepOutcome { state, success_probability, outcome_probabilities })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub fidelity: f64,
    pub success_probability: f64,
    /// `η_n = 2^{−n} Π_{l≤n} p_l`.
    pub cumulative_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub spec: WernerSpec,
    pub kind: ProtocolKind,
    pub target_fidelity: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub steps: usize,
}

impl ProtocolRun {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.records.last().map(|r| r.fidelity)
    }

    pub fn efficiency(&self) -> Option<f64> {
        self.records.last().map(|r| r.cumulative_efficiency)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifyOptions {
    pub target_fidelity: f64,
    pub max_steps: usize,
    pub accounting: OutcomeAccounting,
}

impl PurifyOptions {
    pub fn new(target_fidelity: f64, max_steps: usize) -> Self {
        Self { target_fidelity, max_steps, accounting: OutcomeAccounting::AllDiagonal }
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(Error::FidelityOutOfRange { fidelity: self.target_fidelity, min: 0.0, max: 1.0 });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Unbounded sequence of protocol iterates starting from a Werner state.
///
/// Yields each record together with the state it describes.
pub struct Trajectory {
    kind: ProtocolKind,
    accounting: OutcomeAccounting,
    bell: crate::qlinalg::Ket,
    state: DensityMatrix,
    step: usize,
    efficiency: f64,
    failed: bool,
}

impl Trajectory {
    pub fn new(spec: WernerSpec, kind: ProtocolKind, accounting: OutcomeAccounting) -> Self {
        Self {
            kind,
            accounting,
            bell: bell_00(spec.dim()).expect("dimension validated"),
            state: werner(spec),
            step: 0,
            efficiency: 1.0,
            failed: false,
        }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }
}

impl Iterator for Trajectory {
    type Item = Result<(IterationRecord, DensityMatrix)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let advanced = protocol_step_with(&self.state, self.kind, self.accounting).and_then(|out| {
            let fidelity = out.state.pure_fidelity(&self.bell)?;
            Ok((out, fidelity))
        });
        match advanced {
            Ok((out, fidelity)) => {
                self.step += 1;
                self.efficiency *= out.success_probability / 2.0;
                self.state = out.state;
                let record = IterationRecord {
                    step: self.step,
                    fidelity,
                    success_probability: out.success_probability,
                    cumulative_efficiency: self.efficiency,
                };
                Some(Ok((record, self.state.clone())))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Iterates until the fidelity reaches `target_fidelity` or `max_steps` runs out.
pub fn purify(spec: WernerSpec, kind: ProtocolKind, target_fidelity: f64, max_steps: usize) -> Result<ProtocolRun> {
    purify_with(spec, kind, &PurifyOptions::new(target_fidelity, max_steps))
}

pub fn purify_with(spec: WernerSpec, kind: ProtocolKind, options: &PurifyOptions) -> Result<ProtocolRun> {
    options.validate()?;
    let mut records = Vec::new();
    let mut converged = false;
    for item in Trajectory::new(spec, kind, options.accounting).take(options.max_steps) {
        let (record, _) = item?;
        records.push(record);
        if record.fidelity >= options.target_fidelity {
            converged = true;
            break;
        }
    }
    Ok(ProtocolRun {
        spec,
        kind,
        target_fidelity: options.target_fidelity,
        steps: records.len(),
        records,
        converged,
    })
}

/// Smallest initial Werner fidelity (within `tol`) from which `kind` reaches
/// `target_fidelity`, by bisection on `[1/D, 1]`.
pub fn convergence_radius(
    dim: usize,
    kind: ProtocolKind,
    target_fidelity: f64,
    max_steps: usize,
    tol: f64,
) -> Result<f64> {
    if tol < 1e-5 {
        return Err(Error::InvalidConfig(format!("bisection tolerance {tol:e} is below 1e-5")));
    }
    let converges = |fidelity: f64| -> Result<bool> {
        let spec = WernerSpec::from_fidelity(dim, fidelity)?;
        Ok(purify(spec, kind, target_fidelity, max_steps)?.converged)
    };
    let (mut lo, mut hi) = (critical_fidelity(dim), 1.0);
    if !converges(hi)? {
        return Err(Error::BracketNotConvergent);
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dim: usize,
    pub kind: ProtocolKind,
    pub initial_fidelity: f64,
    pub converged: bool,
    pub steps: usize,
    pub efficiency: f64,
}

/// One run per `(F, kind)`; rows follow the grid, kinds in the given order per point.
pub fn efficiency_sweep(
    dim: usize,
    kinds: &[ProtocolKind],
    grid: &[f64],
    options: &PurifyOptions,
) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(f64, ProtocolKind)> = grid.iter().flat_map(|&f| kinds.iter().map(move |&k| (f, k))).collect();
    jobs.into_par_iter()
        .map(|(initial_fidelity, kind)| {
            let run = purify_with(WernerSpec::from_fidelity(dim, initial_fidelity)?, kind, options)?;
            Ok(SweepRow {
                dim,
                kind,
                initial_fidelity,
                converged: run.converged,
                steps: run.steps,
                efficiency: run.efficiency().unwrap_or(1.0),
            })
        })
        .collect()
}

/// Operator family `{|ψ_00⟩⟨ψ_00|, 1/D², Σ|ii⟩⟨ii|/D}` closed under the
/// Fourier twirl, built with dense conjugation.
pub fn twirl_closed_family(dim: usize) -> Result<Vec<Operator>> {
    let shape = HilbertShape::qudits(dim, 2)?;
    let n = dim * dim;
    let bell = bell_00(dim)?.projector();
    let mixed = DensityMatrix::maximally_mixed(shape.clone()).operator().clone();
    let diagonal = Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c && r % (dim + 1) == 0 {
            C64::new(1.0 / dim as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let diagonal = Operator::new(shape, diagonal)?;
    let f = fourier(dim)?;
    let twirl = f.tensor(&f.conj());
    let twirl_adj = twirl.adjoint();

    let mut family = vec![bell, mixed, diagonal];
    let mut frontier = 0;
    while frontier < family.len() {
        let image = twirl.matmul(&family[frontier])?.matmul(&twirl_adj)?;
        if span_residual(image.matrix(), &family) > 1e-9 {
            family.push(image);
        }
        frontier += 1;
    }
    Ok(family)
}

/// Frobenius norm of the component of `m` orthogonal to `span(family)`.
pub fn span_residual(m: &Array2<C64>, family: &[Operator]) -> f64 {
    let inner = |a: &Array2<C64>, b: &Array2<C64>| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let mut basis: Vec<Array2<C64>> = Vec::new();
    for op in family {
        let mut v = op.matrix().clone();
        for u in &basis {
            let c = inner(u, &v);
            v = &v - &u.mapv(|z| z * c);
        }
        let norm = inner(&v, &v).re.sqrt();
        if norm > 1e-12 {
            basis.push(v.mapv(|z| z / norm));
        }
    }
    let mut residual = m.clone();
    for u in &basis {
        let c = inner(u, &residual);
        residual = &residual - &u.mapv(|z| z * c);
    }
    inner(&residual, &residual).re.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::ACCUM_TOL;
    use approx::assert_abs_diff_eq;

    fn diagonal_mixture(dim: usize) -> DensityMatrix {
        let n = dim * dim;
        let m = Array2::from_shape_fn((n, n), |(r, c)| {
            C64::new(if r == c && r % (dim + 1) == 0 { 1.0 / dim as f64 } else { 0.0 }, 0.0)
        });
        DensityMatrix::from_matrix(HilbertShape::qudits(dim, 2).unwrap(), m).unwrap()
    }

    #[test]
    fn werner_endpoints() {
        let pure = werner(WernerSpec::new(3, 1.0).unwrap());
        let bell = bell_00(3).unwrap();
        assert!(pure.max_abs_diff(&DensityMatrix::pure(&bell)) < EXACT_TOL);
        assert_abs_diff_eq!(pure.pure_fidelity(&bell).unwrap(), 1.0, epsilon = EXACT_TOL);
        let noise = werner(WernerSpec::new(3, 0.0).unwrap());
        let mixed = DensityMatrix::maximally_mixed(HilbertShape::qudits(3, 2).unwrap());
        assert!(noise.max_abs_diff(&mixed) < EXACT_TOL);
        assert_abs_diff_eq!(noise.pure_fidelity(&bell).unwrap(), 1.0 / 9.0, epsilon = EXACT_TOL);
    }

    #[test]
    fn werner_fidelity_formula() {
        for d in 2..8 {
            let bell = bell_00(d).unwrap();
            for lambda in [0.0, 0.25, 0.5, 0.9, 1.0] {
                let rho = werner(WernerSpec::new(d, lambda).unwrap());
                assert_abs_diff_eq!(rho.pure_fidelity(&bell).unwrap(), werner_fidelity(lambda, d), epsilon = EXACT_TOL);
            }
            let edge = WernerSpec::new(d, separability_lambda(d)).unwrap();
            assert_abs_diff_eq!(edge.fidelity(), critical_fidelity(d), epsilon = 1e-15);
            assert!(!edge.is_entangled());
        }
        assert_abs_diff_eq!(werner_fidelity(0.5, 3), 0.5 + 0.5 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn werner_lambda_range() {
        assert!(WernerSpec::new(3, 1.01).is_err());
        assert!(WernerSpec::new(3, -0.2).is_err());
        let diagnostic = WernerSpec::new(3, -0.1).unwrap();
        assert!(diagnostic.is_diagnostic());
        assert!(werner(diagnostic).is_positive_semidefinite(1e-12));
    }

    #[test]
    fn lambda_inversion() {
        assert_abs_diff_eq!(lambda_of_fidelity(1.0, 4).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_of_fidelity(1.0 / 16.0, 4).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_of_fidelity(1.0 / 3.0, 3).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_of_fidelity(1.0 / 3.0, 3).unwrap(), separability_lambda(3), epsilon = 1e-15);
        assert!(lambda_of_fidelity(0.05, 3).is_err());
        assert!(lambda_of_fidelity(1.1, 3).is_err());
        for d in 2..10 {
            for i in 0..=20 {
                let lambda = i as f64 / 20.0;
                let back = lambda_of_fidelity(werner_fidelity(lambda, d), d).unwrap();
                assert!((back - lambda).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn twirl_invariants() {
        for d in 2..10 {
            let bell = DensityMatrix::pure(&bell_00(d).unwrap());
            assert!(twirl_fourier(&bell).unwrap().max_abs_diff(&bell) < EXACT_TOL);
            let mixed = DensityMatrix::maximally_mixed(HilbertShape::qudits(d, 2).unwrap());
            assert!(twirl_fourier(&mixed).unwrap().max_abs_diff(&mixed) < EXACT_TOL);
            let diag = diagonal_mixture(d);
            assert!(twirl_fourier(&diag).unwrap().frobenius_distance(&diag) > 0.01);
        }
    }

    #[test]
    fn twirl_matches_dense_conjugation() {
        let d = 4;
        let f = fourier(d).unwrap();
        let sigma = depolarize_to_werner(&diagonal_mixture(d)).unwrap();
        let probe = apply_map(&sigma, &MapConfig::single(d, vec![1, 1]).unwrap()).unwrap().output;
        let probe = DensityMatrix::from_matrix(
            probe.shape().clone(),
            probe.matrix() * 0.5 + diagonal_mixture(d).matrix() * 0.5,
        )
        .unwrap();
        let dense = probe.conjugate_by(&f.tensor(&f.conj())).unwrap();
        assert!(twirl_fourier(&probe).unwrap().max_abs_diff(&dense) < ACCUM_TOL);
    }

    #[test]
    fn depolarize_fixed_points() {
        let w = werner(WernerSpec::new(4, 0.37).unwrap());
        assert!(depolarize_to_werner(&w).unwrap().max_abs_diff(&w) < EXACT_TOL);
        let bell = DensityMatrix::pure(&bell_00(4).unwrap());
        assert!(depolarize_to_werner(&bell).unwrap().max_abs_diff(&bell) < EXACT_TOL);
    }

    #[test]
    fn depolarize_keeps_fidelity_after_map() {
        let sigma = werner(WernerSpec::from_fidelity(3, 0.7).unwrap());
        let mapped = apply_map(&sigma, &MapConfig::single(3, vec![0, 0]).unwrap()).unwrap().output;
        let bell = bell_00(3).unwrap();
        let out = depolarize_to_werner(&mapped).unwrap();
        assert_abs_diff_eq!(
            out.pure_fidelity(&bell).unwrap(),
            mapped.pure_fidelity(&bell).unwrap(),
            epsilon = EXACT_TOL
        );
    }

    #[test]
    fn depolarize_rejects_low_fidelity() {
        // |01⟩⟨01| has zero overlap with |ψ_00⟩
        let mut m = Array2::zeros((4, 4));
        m[[1, 1]] = C64::new(1.0, 0.0);
        let sigma = DensityMatrix::from_matrix(HilbertShape::qudits(2, 2).unwrap(), m).unwrap();
        assert!(matches!(depolarize_to_werner(&sigma), Err(Error::FidelityOutOfRange { .. })));
    }

    #[test]
    fn step_on_bell_state() {
        for d in 2..6 {
            let bell = DensityMatrix::pure(&bell_00(d).unwrap());
            for kind in ProtocolKind::ALL {
                let out = protocol_step(&bell, kind).unwrap();
                assert!(out.state.max_abs_diff(&bell) < ACCUM_TOL);
                assert_abs_diff_eq!(out.success_probability, 1.0, epsilon = ACCUM_TOL);
                for p in &out.outcome_probabilities {
                    assert_abs_diff_eq!(*p, 1.0 / d as f64, epsilon = ACCUM_TOL);
                }
            }
        }
    }

    #[test]
    fn step_improves_werner_d3() {
        let sigma = werner(WernerSpec::from_fidelity(3, 0.7).unwrap());
        let out = protocol_step(&sigma, ProtocolKind::GxorTwirl).unwrap();
        let f = out.state.pure_fidelity(&bell_00(3).unwrap()).unwrap();
        assert!(f > 0.7, "fidelity {f}");
        assert!(out.success_probability <= 1.0 + ACCUM_TOL);
    }

    #[test]
    fn step_rejects_asymmetric_state() {
        let mut m = Array2::zeros((9, 9));
        m[[0, 0]] = C64::new(1.0, 0.0);
        let sigma = DensityMatrix::from_matrix(HilbertShape::qudits(3, 2).unwrap(), m).unwrap();
        assert!(matches!(protocol_step(&sigma, ProtocolKind::GxorTwirl), Err(Error::ShiftCovariance(_))));
    }

    #[test]
    fn single_outcome_accounting_only_scales_probability() {
        let spec = WernerSpec::from_fidelity(4, 0.6).unwrap();
        let sigma = werner(spec);
        let all = protocol_step_with(&sigma, ProtocolKind::HorodeckiBaseline, OutcomeAccounting::AllDiagonal).unwrap();
        let one = protocol_step_with(&sigma, ProtocolKind::HorodeckiBaseline, OutcomeAccounting::SingleOutcome).unwrap();
        assert!(all.state.max_abs_diff(&one.state) < EXACT_TOL);
        assert_abs_diff_eq!(all.success_probability, 4.0 * one.success_probability, epsilon = 1e-12);
        let gxor = protocol_step_with(&sigma, ProtocolKind::GxorTwirl, OutcomeAccounting::SingleOutcome).unwrap();
        assert_abs_diff_eq!(gxor.success_probability, all.success_probability, epsilon = 1e-12);
    }

    #[test]
    fn purify_pure_input() {
        for kind in ProtocolKind::ALL {
            let run = purify(WernerSpec::new(5, 1.0).unwrap(), kind, 1.0 - 1e-5, 10).unwrap();
            assert!(run.converged);
            assert_eq!(run.steps, 1);
            assert_abs_diff_eq!(run.efficiency().unwrap(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn purify_separable_input_fails() {
        let spec = WernerSpec::from_fidelity(6, 0.15).unwrap();
        for kind in ProtocolKind::ALL {
            let run = purify(spec, kind, 1.0 - 1e-5, 60).unwrap();
            assert!(!run.converged);
            assert_eq!(run.steps, 60);
        }
    }

    #[test]
    fn purify_validates_options() {
        let spec = WernerSpec::from_fidelity(3, 0.8).unwrap();
        assert!(purify(spec, ProtocolKind::GxorTwirl, 1.5, 10).is_err());
        assert!(purify(spec, ProtocolKind::GxorTwirl, 0.99, 0).is_err());
    }

    #[test]
    fn radius_rejects_tiny_tolerance() {
        assert!(convergence_radius(3, ProtocolKind::GxorTwirl, 0.999, 100, 1e-6).is_err());
    }

    #[test]
    fn protocol_names_round_trip() {
        for kind in ProtocolKind::ALL {
            assert_eq!(kind.name().parse::<ProtocolKind>().unwrap(), kind);
        }
        assert!("bennett".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn family_has_four_members() {
        for d in 2..5 {
            assert_eq!(twirl_closed_family(d).unwrap().len(), 4, "D={d}");
        }
    }
}
