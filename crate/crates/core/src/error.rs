use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("local dimension {0} is below 2")]
    InvalidDimension(usize),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("matrix side {side} does not match total dimension {total}")]
    MatrixSize { side: usize, total: usize },

    #[error("index {index} out of range for bound {bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not a projector (max deviation {0:e})")]
    NotProjector(f64),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("outcome has zero probability ({0:e})")]
    ZeroProbability(f64),

    #[error("lambda {lambda} outside the admissible range [{min}, 1]")]
    LambdaOutOfRange { lambda: f64, min: f64 },

    #[error("fidelity {fidelity} outside [{min}, {max}]")]
    FidelityOutOfRange { fidelity: f64, min: f64, max: f64 },

    #[error("map configuration: {0}")]
    InvalidConfig(String),

    #[error("tensor oracle limited to D=2 with M,N <= 2 or D in 3..=5 with M=N=1 (got D={dim}, M={qudits}, N={copies})")]
    OracleTooLarge { dim: usize, qudits: usize, copies: usize },

    #[error("state is not invariant under the joint basis shift (deviation {0:e})")]
    ShiftCovariance(f64),

    #[error("projected outcomes disagree (deviation {0:e})")]
    OutcomeMismatch(f64),

    #[error("protocol does not converge from a pure input; bisection bracket is invalid")]
    BracketNotConvergent,
}
