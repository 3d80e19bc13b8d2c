use thiserror::Error;

use crate::quadrature::Integral;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("evaluation budget exhausted (partial value {}, error estimate {})", partial.value, partial.error_estimate)]
    BudgetExhausted { partial: Integral },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChshError {
    #[error("parameter `{name}` is invalid: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("norm squared must be non-negative, got {0}")]
    NegativeNorm(f64),
    #[error("optimizer result {0} exceeds the Tsirelson bound")]
    TsirelsonExceeded(f64),
    #[error(transparent)]
    Optimization(#[from] OptimizationError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizationError {
    #[error("dimension mismatch: bounds have {lower} / {upper} entries for dimension {dimension}")]
    DimensionMismatch {
        dimension: usize,
        lower: usize,
        upper: usize,
    },
    #[error("empty search box in coordinate {index}: [{lower}, {upper}]")]
    EmptyBox {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("budget {budget} is below seed_count * (dimension + 1) = {required}")]
    BudgetTooSmall { budget: usize, required: usize },
    #[error("seed_count must be positive")]
    NoSeeds,
    #[error("grid scan needs at least 2 steps per dimension, got {0}")]
    TooFewSteps(usize),
    #[error("grid scan limited to 5 dimensions, got {0}")]
    DimensionTooLarge(usize),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, ChshError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ChshError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
