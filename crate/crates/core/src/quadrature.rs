//! Adaptive one-dimensional integration of complex-valued integrands.
//!
//! The rule pair is Gauss 7-point / Kronrod 15-point. Each subinterval carries
//! the Kronrod value and the raw `|K15 - G7|` difference as its error estimate;
//! the interval with the largest estimate is bisected until the summed
//! estimate meets the requested tolerance or the evaluation budget runs out.
//!
//! Infinite intervals are not supported. Callers truncate the domain
//! themselves, since they know the decay scale of their integrand.
#![allow(clippy::excessive_precision)]


use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::QuadratureError;

/// Kronrod abscissae on [-1, 1] (non-negative half), largest first.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_MAX_EVALS: usize = 1 << 20;
const EVALS_PER_PANEL: usize = 15;

/// Integration request for [`integrate`].
pub struct QuadratureSpec<F> {
    pub integrand: F,
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on the summed error estimate.
    pub tol: f64,
    /// Optional relative tolerance; the run stops once the error estimate is
    /// below `max(tol, rel_tol * |value|)`. Zero disables it.
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Number of equal panels the interval is split into before refinement.
    pub initial_panels: usize,
}

impl<F> QuadratureSpec<F>
where
    F: Fn(f64) -> Complex64,
{
    pub fn new(integrand: F, lo: f64, hi: f64, tol: f64) -> Self {
        Self {
            integrand,
            lo,
            hi,
            tol,
            rel_tol: 0.0,
            max_evals: DEFAULT_MAX_EVALS,
            initial_panels: 8,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(QuadratureError::InvalidInterval {
                lo: self.lo,
                hi: self.hi,
            });
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(QuadratureError::InvalidTolerance(self.tol));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(QuadratureError::InvalidTolerance(self.rel_tol));
        }
        Ok(())
    }
}

/// A converged (or partial) integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl Integral {
    /// Whether the error estimate is within `rel_tol` of the magnitude.
    pub fn is_resolved(&self, rel_tol: f64) -> bool {
        self.error_estimate <= rel_tol * self.value.norm()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn checked<F: Fn(f64) -> Complex64>(f: &F, x: f64) -> Result<Complex64, QuadratureError> {
    let v = f(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { x })
    }
}

fn gauss_kronrod<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
) -> Result<Panel, QuadratureError> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let fc = checked(f, centre)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];

    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = checked(f, centre - dx)? + checked(f, centre + dx)?;
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }

    Ok(Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    })
}

/// Adaptive bisection until the summed error estimate meets the tolerance.
///
/// On budget exhaustion the partial result is returned inside
/// [`QuadratureError::BudgetExhausted`] with its honest error estimate.
pub fn integrate<F>(spec: &QuadratureSpec<F>) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    let f = &spec.integrand;
    let panels = spec.initial_panels.max(1);
    let width = (spec.hi - spec.lo) / panels as f64;

    let mut heap = BinaryHeap::with_capacity(64);
    let mut evaluations = 0usize;
    for k in 0..panels {
        let lo = spec.lo + width * k as f64;
        let hi = if k + 1 == panels {
            spec.hi
        } else {
            spec.lo + width * (k + 1) as f64
        };
        heap.push(gauss_kronrod(f, lo, hi)?);
        evaluations += EVALS_PER_PANEL;
    }

    loop {
        // Resum every pass so the running totals carry no cancellation drift.
        let (value, error) = heap
            .iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| {
                (v + p.value, e + p.error)
            });
        let target = spec.tol.max(spec.rel_tol * value.norm());
        let result = Integral {
            value,
            error_estimate: error,
            evaluations,
        };
        if error <= target {
            return Ok(result);
        }
        if evaluations + 2 * EVALS_PER_PANEL > spec.max_evals {
            return Err(QuadratureError::BudgetExhausted { partial: result });
        }

        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            return Err(QuadratureError::BudgetExhausted { partial: result });
        }
        heap.push(gauss_kronrod(f, worst.lo, mid)?);
        heap.push(gauss_kronrod(f, mid, worst.hi)?);
        evaluations += 2 * EVALS_PER_PANEL;
    }
}

/// Product of two independent 1D integrals, for integrands that factor as
/// `f(x) g(y)`. Errors combine as `|I1| e2 + |I2| e1 + e1 e2`.
pub fn integrate_2d_factored<F, G>(
    fx: &QuadratureSpec<F>,
    fy: &QuadratureSpec<G>,
) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let first = integrate(fx)?;
    let second = integrate(fy)?;
    Ok(Integral {
        value: first.value * second.value,
        error_estimate: first.value.norm() * second.error_estimate
            + second.value.norm() * first.error_estimate
            + first.error_estimate * second.error_estimate,
        evaluations: first.evaluations + second.evaluations,
    })
}
