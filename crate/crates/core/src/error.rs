use thiserror::Error;

/// A single violated configuration constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The named field must be strictly positive and finite.
    NonPositiveParameter(&'static str),
    /// The bath must contain at least one mode.
    ZeroModeCount,
    /// A required field was never supplied.
    Missing(&'static str),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonPositiveParameter(field) => {
                write!(f, "{field} must be a finite positive number")
            }
            Violation::ZeroModeCount => write!(f, "mode_count must be at least 1"),
            Violation::Missing(field) => write!(f, "{field} is required"),
        }
    }
}

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("malformed config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("bath mode index must start at 1, got {0}")]
    InvalidModeIndex(usize),

    #[error("argument too close to a cotangent pole (|sin| = {sin_abs:e})")]
    PoleProximity { sin_abs: f64 },

    #[error(
        "no sign change of the secular residual in bracket {k}: \
         f({lo:e}) = {f_lo:e}, f({hi:e}) = {f_hi:e}"
    )]
    BracketFailure {
        k: usize,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root {k} did not converge after {iterations} bisections (residual {residual:e})")]
    ConvergenceFailure {
        k: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("denominator {value:e} is too close to resonance")]
    ResonantDenominator { value: f64 },

    #[error("u = {0} is an integer; the partial-fraction sum is singular")]
    IntegerU(f64),

    #[error("non-positive radicand {radicand:e} for Omega = {omega:e}")]
    NegativeDiscriminant { omega: f64, radicand: f64 },

    #[error("delta = {delta} makes the weak-coupling weight 1 - pi*delta negative")]
    DeltaTooLarge { delta: f64 },

    #[error("negative delta {0}")]
    NegativeDelta(f64),

    #[error("length mismatch: {frequencies} frequencies vs {weights} weights")]
    LengthMismatch { frequencies: usize, weights: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("degenerate bath frequency at index {0}")]
    DegenerateBath(usize),

    #[error("{skipped} near-resonant terms skipped (max residual {max_residual:e})")]
    ResonanceSkip { skipped: usize, max_residual: f64 },

    #[error("non-positive squared normal frequency {0:e}")]
    UnstableMode(f64),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BracketFailure { .. }
                | Error::ConvergenceFailure { .. }
                | Error::NonConvergence { .. }
                | Error::NegativeDiscriminant { .. }
                | Error::ResonantDenominator { .. }
                | Error::ResonanceSkip { .. }
                | Error::UnstableMode(_)
                | Error::PoleProximity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
