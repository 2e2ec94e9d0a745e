//! Normal modes, principal-axis weights and survival probability of a
//! harmonic oscillator coupled to an ohmic bath confined in a cavity of
//! length `L`.
//!
//! The exact spectrum is found by solving the cotangent secular equation
//! bracket by bracket. Small-cavity approximations, the weak and strong
//! coupling series with their lower bounds, and a finite-N matrix oracle
//! are provided to cross-check it.

// `!(x > 0.0)` style comparisons are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ddouble;
pub mod error;
pub mod evolution;
pub mod jacobi;
pub mod oracle;
pub mod spectrum;
pub mod weights;

pub use config::{
    validate_config, ConfigWarning, CouplingRegime, PhysicalConfig, RawConfig, Validated,
};
pub use error::{Error, Result, Violation};
pub use evolution::{
    delta_max_strong, min_strong, min_weak, scan_min, survival_probability, survival_strong_series,
    survival_weak_series, LowerBound, SeriesKind, SurvivalSeries,
};
pub use oracle::{build_system, compare_pipelines, diagonalize, OracleEigen, OracleSystem};
pub use spectrum::{solve_spectrum, SecularConvention, Spectrum};
pub use weights::{t0r_exact, weights_exact, weights_strong, weights_weak, CouplingWeights};
