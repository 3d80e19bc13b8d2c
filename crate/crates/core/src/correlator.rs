//! CHSH combination, classification against classical/Tsirelson bounds, and
//! the commuting unit-modulus (phase) model used to derive the bounds.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, ChshError};
use crate::optimizer::{maximize_from, OptimizationProblem, OptimizationReport};

/// 2√2.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;
/// Bound for dichotomic or real-valued commuting quantities.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// Absolute tolerance for every bound comparison.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Default angular grid step for phase scans.
pub const DEFAULT_GRID_STEP: f64 = PI / 64.0;

/// Expectations of the four operator products `AB`, `A'B`, `AB'`, `A'B'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorQuad {
    pub c_ab: Complex64,
    pub c_apb: Complex64,
    pub c_abp: Complex64,
    pub c_apbp: Complex64,
}

impl CorrelatorQuad {
    pub fn new(c_ab: Complex64, c_apb: Complex64, c_abp: Complex64, c_apbp: Complex64) -> Self {
        Self {
            c_ab,
            c_apb,
            c_abp,
            c_apbp,
        }
    }

    pub fn from_real(c_ab: f64, c_apb: f64, c_abp: f64, c_apbp: f64) -> Self {
        let re = |x| Complex64::new(x, 0.0);
        Self::new(re(c_ab), re(c_apb), re(c_abp), re(c_apbp))
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.c_ab, self.c_apb, self.c_abp, self.c_apbp]
    }

    /// Each entry is the expectation of a product of unitaries, so
    /// `|c| <= 1` up to rounding.
    pub fn is_physical(&self) -> bool {
        self.entries().iter().all(|c| c.norm() <= 1.0 + 1e-12)
    }

    /// All four imaginary parts vanish within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.entries().iter().all(|c| c.im.abs() <= tol)
    }
}

impl std::ops::Add for CorrelatorQuad {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.c_ab + rhs.c_ab,
            self.c_apb + rhs.c_apb,
            self.c_abp + rhs.c_abp,
            self.c_apbp + rhs.c_apbp,
        )
    }
}

/// `(A + A')B + (A - A')B'` expanded over the four expectations.
pub fn chsh_combine(q: &CorrelatorQuad) -> Complex64 {
    q.c_ab + q.c_apb + q.c_abp - q.c_apbp
}

/// Ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// At or below the classical bound.
    WithinClassical,
    /// Above the classical bound by no more than [`BOUND_TOLERANCE`].
    ExceedsClassicalOnly,
    /// Strictly between the classical bound and Tsirelson's bound.
    Violation,
    /// Above 2√2: not attainable by any quantum state.
    ExceedsTsirelson,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WithinClassical => "WithinClassical",
            Self::ExceedsClassicalOnly => "ExceedsClassicalOnly",
            Self::Violation => "Violation",
            Self::ExceedsTsirelson => "ExceedsTsirelson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub value: Complex64,
    pub magnitude: f64,
    pub classification: Classification,
    pub classical_bound_used: f64,
}

impl ChshResult {
    pub fn is_violation(&self) -> bool {
        self.classification == Classification::Violation
    }
}

/// Classifies a CHSH value.
///
/// With `real_constrained` the four correlators are known to be real and
/// the classical bound is 2; otherwise commuting unitaries already reach
/// 2√2, which then serves as the classical bound.
pub fn classify(value: Complex64, real_constrained: bool) -> ChshResult {
    let magnitude = value.norm();
    let bound = if real_constrained {
        CLASSICAL_BOUND
    } else {
        TSIRELSON_BOUND
    };
    let classification = if magnitude > TSIRELSON_BOUND + BOUND_TOLERANCE {
        Classification::ExceedsTsirelson
    } else if magnitude <= bound {
        Classification::WithinClassical
    } else if magnitude <= bound + BOUND_TOLERANCE {
        Classification::ExceedsClassicalOnly
    } else {
        Classification::Violation
    };
    ChshResult {
        value,
        magnitude,
        classification,
        classical_bound_used: bound,
    }
}

/// Hard ceiling `|⟨C⟩| <= 2√2` (within [`BOUND_TOLERANCE`]).
pub fn tsirelson_ceiling(result: &ChshResult) -> bool {
    result.magnitude <= TSIRELSON_BOUND + BOUND_TOLERANCE
}

/// Four commuting phase angles `(α, α', β, β')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSetting {
    alpha: f64,
    alpha_prime: f64,
    beta: f64,
    beta_prime: f64,
}

impl PhaseSetting {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Result<Self, ChshError> {
        Ok(Self {
            alpha: finite("alpha", alpha)?,
            alpha_prime: finite("alpha_prime", alpha_prime)?,
            beta: finite("beta", beta)?,
            beta_prime: finite("beta_prime", beta_prime)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn alpha_prime(&self) -> f64 {
        self.alpha_prime
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn beta_prime(&self) -> f64 {
        self.beta_prime
    }
}

/// `(e^{iα} + e^{iα'}) e^{iβ} + (e^{iα} - e^{iα'}) e^{iβ'}`.
pub fn unitary_phase_chsh(s: &PhaseSetting) -> Complex64 {
    let a = Complex64::cis(s.alpha);
    let ap = Complex64::cis(s.alpha_prime);
    (a + ap) * Complex64::cis(s.beta) + (a - ap) * Complex64::cis(s.beta_prime)
}

/// Triangle-inequality envelope `√2 (√(1 + cos δ) + √(1 - cos δ))` for
/// `|Z|` at fixed `δ = α - α'`.
pub fn unitary_phase_envelope(delta: f64) -> f64 {
    let c = delta.cos();
    SQRT_2 * ((1.0 + c).max(0.0).sqrt() + (1.0 - c).max(0.0).sqrt())
}

/// Exhaustive maximum of `|(a + a')b + (a - a')b'|` over all sixteen
/// assignments in `{-1, +1}^4`.
pub fn dichotomic_classical_max() -> f64 {
    (0u8..16)
        .map(|bits| {
            let sign = |k: u8| if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
            let (a, ap, b, bp) = (sign(0), sign(1), sign(2), sign(3));
            dichotomic_chsh(a, ap, b, bp).abs()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn dichotomic_chsh(a: f64, ap: f64, b: f64, bp: f64) -> f64 {
    (a + ap) * b + (a - ap) * bp
}

/// Best `|Z|` found on a lattice, with the angles achieving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub max_magnitude: f64,
    pub argmax: PhaseSetting,
    pub points_evaluated: u64,
}

fn grid_len(grid_step: f64) -> Result<usize, ChshError> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(ChshError::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            reason: "must be positive and finite",
        });
    }
    // 2π/step is integral for the usual steps; keep rounding noise from adding a point.
    Ok(((2.0 * PI / grid_step - 1e-9).ceil() as usize).max(1))
}

/// Exhaustive scan of `|Z|` over the full lattice `{k·step} ⊂ [0, 2π)^4`.
///
/// Pair sums `e^{iα} ± e^{iα'}` are tabulated once, so the inner loop is
/// two complex multiply-adds per lattice point.
pub fn unitary_phase_grid_max(grid_step: f64) -> Result<PhaseScan, ChshError> {
    let n = grid_len(grid_step)?;
    let phases: Vec<Complex64> = (0..n).map(|k| Complex64::cis(k as f64 * grid_step)).collect();

    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for (i, &ea) in phases.iter().enumerate() {
        for (j, &eap) in phases.iter().enumerate() {
            let sum = ea + eap;
            let diff = ea - eap;
            for (k, &eb) in phases.iter().enumerate() {
                let first = sum * eb;
                for (l, &ebp) in phases.iter().enumerate() {
                    let m = (first + diff * ebp).norm_sqr();
                    if m > best.0 {
                        best = (m, [i, j, k, l]);
                    }
                }
            }
        }
    }

    let [i, j, k, l] = best.1;
    let step = |idx: usize| idx as f64 * grid_step;
    Ok(PhaseScan {
        max_magnitude: best.0.sqrt(),
        argmax: PhaseSetting::new(step(i), step(j), step(k), step(l))?,
        points_evaluated: (n as u64).pow(4),
    })
}

/// Maximum of `|Z|` under the reality constraints: every one of
/// `α+β, α+β', α'+β, α'+β'` is an integer multiple of π.
///
/// The admissible quadruples are generated directly: `α` runs over the
/// lattice and `β = n₁π − α`, `β' = n₂π − α`, `α' = m₁π − β`, with the
/// integers taken mod 2 (only their parity affects the phases). The fourth
/// constraint then holds identically.
pub fn real_constrained_phase_max(grid_step: f64) -> Result<PhaseScan, ChshError> {
    let n = grid_len(grid_step)?;
    let mut best: Option<(f64, PhaseSetting)> = None;
    let mut count = 0u64;
    for k in 0..n {
        let alpha = k as f64 * grid_step;
        for n1 in 0..2 {
            for n2 in 0..2 {
                for m1 in 0..2 {
                    let beta = n1 as f64 * PI - alpha;
                    let beta_prime = n2 as f64 * PI - alpha;
                    let alpha_prime = m1 as f64 * PI - beta;
                    let s = PhaseSetting::new(alpha, alpha_prime, beta, beta_prime)?;
                    let m = unitary_phase_chsh(&s).norm();
                    count += 1;
                    if best.is_none_or(|(b, _)| m > b) {
                        best = Some((m, s));
                    }
                }
            }
        }
    }
    let (max_magnitude, argmax) = best.expect("lattice is non-empty");
    Ok(PhaseScan {
        max_magnitude,
        argmax,
        points_evaluated: count,
    })
}

/// Lattice scan followed by simplex refinement of `|Z|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMaximum {
    pub grid: PhaseScan,
    pub max_magnitude: f64,
    pub argmax: PhaseSetting,
    pub report: OptimizationReport,
}

/// Refines the best lattice point of [`unitary_phase_grid_max`] with
/// Nelder-Mead in `[0, 2π]^4`, also starting from the lattice centre.
pub fn maximize_unitary_phase(grid_step: f64, budget: usize, tolerance: f64) -> Result<PhaseMaximum, ChshError> {
    let grid = unitary_phase_grid_max(grid_step)?;
    let objective = |x: &[f64]| match PhaseSetting::new(x[0], x[1], x[2], x[3]) {
        Ok(s) => unitary_phase_chsh(&s).norm(),
        Err(_) => f64::NAN,
    };
    let problem = OptimizationProblem::new(vec![0.0; 4], vec![2.0 * PI; 4], objective)
        .with_seeds(2)
        .with_budget(budget)
        .with_tolerance(tolerance);
    let g = grid.argmax;
    let starts = vec![vec![g.alpha, g.alpha_prime, g.beta, g.beta_prime], vec![PI; 4]];
    let report = maximize_from(&problem, &starts)?;
    let p = &report.best_point;
    let argmax = PhaseSetting::new(p[0], p[1], p[2], p[3])?;
    let max_magnitude = unitary_phase_chsh(&argmax).norm();
    Ok(PhaseMaximum {
        grid,
        max_magnitude,
        argmax,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn combine_examples() {
        assert_eq!(chsh_combine(&CorrelatorQuad::from_real(1.0, 1.0, 1.0, 1.0)).re, 2.0);
        assert_eq!(chsh_combine(&CorrelatorQuad::from_real(1.0, 1.0, 1.0, -1.0)).re, 4.0);
    }

    #[test]
    fn classify_examples() {
        let c = |v: f64, real| classify(Complex64::new(v, 0.0), real).classification;
        assert_eq!(c(2.5, true), Classification::Violation);
        assert_eq!(c(2.5, false), Classification::WithinClassical);
        assert_eq!(c(3.0, true), Classification::ExceedsTsirelson);
        assert_eq!(c(3.0, false), Classification::ExceedsTsirelson);
        assert_eq!(c(2.0, true), Classification::WithinClassical);
        assert_eq!(c(2.0 + 5e-10, true), Classification::ExceedsClassicalOnly);
        assert_eq!(c(TSIRELSON_BOUND, true), Classification::Violation);
        assert_eq!(c(TSIRELSON_BOUND + 5e-10, false), Classification::ExceedsClassicalOnly);
        let r = classify(Complex64::new(1.5, -2.0), false);
        assert_eq!(r.magnitude, 2.5);
        assert_eq!(r.classical_bound_used, TSIRELSON_BOUND);
    }

    #[test]
    fn phase_chsh_examples() {
        let z = unitary_phase_chsh(&PhaseSetting::new(0.0, 0.0, 0.0, 0.0).unwrap());
        assert!(close(z.re, 2.0, 1e-15) && close(z.im, 0.0, 1e-15));
        let z = unitary_phase_chsh(&PhaseSetting::new(0.0, PI, 0.0, 0.0).unwrap());
        assert!(close(z.norm(), 2.0, 1e-15));
    }

    #[test]
    fn envelope_examples() {
        assert!(close(unitary_phase_envelope(0.0), 2.0, 1e-15));
        assert!(close(unitary_phase_envelope(PI / 2.0), TSIRELSON_BOUND, 1e-15));
        assert!(close(unitary_phase_envelope(PI), 2.0, 1e-15));
    }

    #[test]
    fn dichotomic_enumeration() {
        assert_eq!(dichotomic_classical_max(), 2.0);
        assert_eq!(dichotomic_chsh(1.0, 1.0, 1.0, 1.0), 2.0);
        assert_eq!(dichotomic_chsh(1.0, -1.0, 1.0, 1.0), 2.0);
    }

    #[test]
    fn constrained_family_is_two() {
        for t in [0.0, 0.3, 1.7, -2.2] {
            // α = t, β = −t; α' and β' forced onto the same constraint lattice.
            let s = PhaseSetting::new(t, t + PI, -t, PI - t).unwrap();
            assert!(close(unitary_phase_chsh(&s).norm(), 2.0, 1e-12));
        }
    }

    #[test]
    fn real_constrained_scan_is_two() {
        let scan = real_constrained_phase_max(DEFAULT_GRID_STEP).unwrap();
        assert!(close(scan.max_magnitude, 2.0, 1e-12));
    }

    #[test]
    fn coarse_unconstrained_scan_reaches_tsirelson() {
        // π/2 lattice already contains a maximiser.
        let scan = unitary_phase_grid_max(PI / 2.0).unwrap();
        assert!(close(scan.max_magnitude, TSIRELSON_BOUND, 1e-12));
        assert_eq!(scan.points_evaluated, 256);
    }

    #[test]
    fn rejects_non_finite_angles_and_bad_steps() {
        assert!(PhaseSetting::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(PhaseSetting::new(0.0, f64::INFINITY, 0.0, 0.0).is_err());
        assert!(real_constrained_phase_max(0.0).is_err());
        assert!(unitary_phase_grid_max(-1.0).is_err());
    }
}
