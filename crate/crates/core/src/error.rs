use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("determinant requires M = N (got N = {n}, M = {m})")]
    NotSquare { n: usize, m: usize },

    #[error("design condition violated (residual {residual:e})")]
    ConditionViolated { residual: f64 },

    #[error("eigendecomposition did not converge")]
    Decomposition,

    #[error("Stokes coupling block is singular")]
    SingularStokes,

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("eta must be nonzero")]
    ZeroEta,

    #[error("pump {0} has zero transition dipole but a nonzero required Rabi amplitude")]
    UndrivablePump(usize),

    #[error("eigenvector tracking lost at t = {time} (overlap {overlap:.3})")]
    TrackingLost { time: f64, overlap: f64 },

    #[error("grid too short: need at least {needed} points, got {got}")]
    GridTooShort { needed: usize, got: usize },

    #[error("step size underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("tolerance not achievable: {0}")]
    Tolerance(String),
}
