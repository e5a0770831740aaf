use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which state invariant broke during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Trace,
    Hermiticity,
    Positivity,
    Norm,
}

impl core::fmt::Display for Invariant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Invariant::Trace => "trace",
            Invariant::Hermiticity => "hermiticity",
            Invariant::Positivity => "positivity",
            Invariant::Norm => "norm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The state is (numerically) parallel to the winner, so no orthogonal
    /// direction is defined.
    #[error("state is parallel to the winner (|overlap| = {overlap_abs})")]
    DegenerateDecomposition { overlap_abs: f64 },

    #[error("{invariant} invariant broken at t = {time}: deviation {deviation:e}")]
    InvariantBroken { time: f64, invariant: Invariant, deviation: f64 },

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,

    #[error("adaptive step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical machinery rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvariantBroken { .. } | Error::NoConvergence | Error::StepSizeUnderflow { .. }
        )
    }
}
