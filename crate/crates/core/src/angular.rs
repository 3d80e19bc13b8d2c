//! Two-dimensional orbital angular momentum example.
//!
//! Alice and Bob use `e^{iαL_A}` and `e^{iβL_B}` on the singlet-like state
//! `(|1,-1⟩ - |-1,1⟩)/√2` of zero total angular momentum. The pair
//! correlator is `cos(α - β)` and the CHSH combination reaches 2√2, but every
//! operator involved is diagonal in the `|m_A, m_B⟩` basis, so Alice's two
//! operators commute and the value is not a violation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlator::{classify, ChshResult};
use crate::error::{finite, ChshError, OptimizationError};
use crate::optimizer::{maximize, OptimizationProblem, OptimizationReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSetting {
    alpha: f64,
    alpha_prime: f64,
    beta: f64,
    beta_prime: f64,
}

impl AngularSetting {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Result<Self, ChshError> {
        Ok(Self {
            alpha: finite("alpha", alpha)?,
            alpha_prime: finite("alpha_prime", alpha_prime)?,
            beta: finite("beta", beta)?,
            beta_prime: finite("beta_prime", beta_prime)?,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.alpha_prime, self.beta, self.beta_prime]
    }

    /// The common textbook choice `(0, π/2, π/4, 3π/4)`. It gives 0 for this
    /// combination.
    pub fn textbook() -> Self {
        Self {
            alpha: 0.0,
            alpha_prime: FRAC_PI_2,
            beta: FRAC_PI_4,
            beta_prime: 3.0 * FRAC_PI_4,
        }
    }

    /// `(0, π/2, π/4, -π/4)`: every cosine term equals `±√2/2` with the
    /// sign that adds up to 2√2.
    pub fn maximizing() -> Self {
        Self {
            alpha: 0.0,
            alpha_prime: FRAC_PI_2,
            beta: FRAC_PI_4,
            beta_prime: -FRAC_PI_4,
        }
    }
}

/// `⟨ψ| e^{iαL_A} e^{iβL_B} |ψ⟩ = cos(α - β)`.
pub fn pair_correlator(alpha: f64, beta: f64) -> f64 {
    (alpha - beta).cos()
}

/// Basis `{|1,-1⟩, |-1,1⟩}` with the `(m_A, m_B)` labels.
const BASIS: [(i32, i32); 2] = [(1, -1), (-1, 1)];

fn singlet() -> [Complex64; 2] {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(amp, 0.0), Complex64::new(-amp, 0.0)]
}

/// Same expectation computed on the explicit two-component state vector:
/// both unitaries act diagonally with eigenphases `e^{iαm_A}`, `e^{iβm_B}`.
pub fn pair_correlator_bruteforce(alpha: f64, beta: f64) -> f64 {
    let psi = singlet();
    let mut acted = psi;
    for (amp, &(m_a, m_b)) in acted.iter_mut().zip(BASIS.iter()) {
        *amp *= Complex64::cis(alpha * m_a as f64) * Complex64::cis(beta * m_b as f64);
    }
    let overlap: Complex64 = psi.iter().zip(&acted).map(|(p, a)| p.conj() * a).sum();
    overlap.re
}

/// `cos(α-β) + cos(α'-β) + cos(α-β') - cos(α'-β')`.
pub fn angular_chsh(s: &AngularSetting) -> f64 {
    pair_correlator(s.alpha, s.beta) + pair_correlator(s.alpha_prime, s.beta)
        + pair_correlator(s.alpha, s.beta_prime)
        - pair_correlator(s.alpha_prime, s.beta_prime)
}

/// Classified result; the correlators are real but the operators commute,
/// so the unconstrained (2√2) classical bound applies.
pub fn angular_result(s: &AngularSetting) -> ChshResult {
    classify(Complex64::new(angular_chsh(s), 0.0), false)
}

/// Largest `|[U(θ), U(θ')]|` entry for two diagonal unitaries built from
/// `L` on the `m ∈ {-1, 0, 1}` sector.
fn diagonal_commutator_norm(theta: f64, theta_prime: f64) -> f64 {
    (-1..=1)
        .map(|m| {
            let u = Complex64::cis(theta * m as f64);
            let v = Complex64::cis(theta_prime * m as f64);
            (u * v - v * u).norm()
        })
        .fold(0.0, f64::max)
}

/// A violation needs `[A, A'] ≠ 0` and `[B, B'] ≠ 0`. Both commutators
/// vanish for every setting here, so this is always `false`.
pub fn is_violation(s: &AngularSetting) -> bool {
    let alice = diagonal_commutator_norm(s.alpha, s.alpha_prime);
    let bob = diagonal_commutator_norm(s.beta, s.beta_prime);
    alice > 0.0 && bob > 0.0
}

pub const NON_VIOLATION_RATIONALE: &str =
    "all four unitaries are diagonal in the |m_A, m_B> basis and commute, so [A,A'] = [B,B'] = 0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularMaximum {
    pub setting: AngularSetting,
    pub result: ChshResult,
    pub violation: bool,
    pub report: OptimizationReport,
}

/// Multistart search over `[0, 2π]^4`.
pub fn maximize_angular(seed_count: usize, budget: usize, tolerance: f64, rng_seed: u64) -> Result<AngularMaximum, OptimizationError> {
    let problem = OptimizationProblem::new(vec![0.0; 4], vec![2.0 * PI; 4], |x: &[f64]| {
        match AngularSetting::new(x[0], x[1], x[2], x[3]) {
            Ok(s) => angular_chsh(&s),
            Err(_) => f64::NAN,
        }
    })
    .with_seeds(seed_count)
    .with_budget(budget)
    .with_tolerance(tolerance);
    let report = maximize(&problem, rng_seed)?;
    let p = &report.best_point;
    let setting = AngularSetting::new(p[0], p[1], p[2], p[3]).expect("optimizer points are finite");
    Ok(AngularMaximum {
        setting,
        result: angular_result(&setting),
        violation: is_violation(&setting),
        report,
    })
}
