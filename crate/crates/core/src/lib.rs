//! Bell-CHSH correlators for unitary operators.
//!
//! The crate covers the commuting phase model that fixes the classical
//! bounds, a two-dimensional angular-momentum example, Weyl operators on a
//! two-particle wavefunction in phase space, and the vacuum correlator of a
//! free field in a reduced spectral parametrization. Closed forms come with
//! quadrature oracles, and maximizations use a seeded multistart simplex
//! search.

pub mod angular;
pub mod correlator;
pub mod error;
pub mod gaussian;
pub mod optimizer;
pub mod phase_space;
pub mod quadrature;
pub mod weyl;

pub use num_complex::Complex64;

pub use correlator::{
    chsh_combine, classify, tsirelson_ceiling, ChshResult, Classification, CorrelatorQuad, PhaseSetting,
    BOUND_TOLERANCE, CLASSICAL_BOUND, TSIRELSON_BOUND,
};
pub use error::{ChshError, OptimizationError, QuadratureError};
pub use optimizer::{Bound, MultistartSettings, OptimizationReport, SearchBox};
pub use quadrature::Integral;
