//! Derivative-free box-constrained maximization.
//!
//! [`maximize`] runs one Nelder-Mead simplex per seed point. Seeds come from
//! a Halton sequence with a Cranley-Patterson shift keyed by `rng_seed`, so
//! placement is low-discrepancy and fully reproducible. Seeds are
//! independent and run on the rayon pool; the merge is order-independent.
//!
//! [`grid_scan`] is the exhaustive lattice companion used to check that
//! simplex results are not stuck in local traps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OptimizationError;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Initial simplex edge as a fraction of the box width.
const INITIAL_STEP: f64 = 0.1;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// A box-constrained maximization problem.
pub struct OptimizationProblem<F> {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: F,
    pub seed_count: usize,
    /// Total objective evaluations across all seeds.
    pub budget: usize,
    /// Convergence threshold on simplex diameter and objective spread.
    pub tolerance: f64,
}

impl<F> OptimizationProblem<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, objective: F) -> Self {
        Self {
            lower,
            upper,
            objective,
            seed_count: 16,
            budget: 16 * 4000,
            tolerance: 1e-10,
        }
    }

    pub fn with_seeds(mut self, seed_count: usize) -> Self {
        self.seed_count = seed_count;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    fn validate(&self) -> Result<(), OptimizationError> {
        let dimension = self.lower.len();
        if dimension == 0 || self.upper.len() != dimension {
            return Err(OptimizationError::DimensionMismatch {
                dimension,
                lower: self.lower.len(),
                upper: self.upper.len(),
            });
        }
        for (index, (&lower, &upper)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                return Err(OptimizationError::EmptyBox {
                    index,
                    lower,
                    upper,
                });
            }
        }
        if self.seed_count == 0 {
            return Err(OptimizationError::NoSeeds);
        }
        let required = self.seed_count * (dimension + 1);
        if self.budget < required {
            return Err(OptimizationError::BudgetTooSmall {
                budget: self.budget,
                required,
            });
        }
        Ok(())
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(lo, hi);
        }
    }

    /// NaN objectives rank below every real value.
    fn eval(&self, x: &[f64]) -> f64 {
        let v = (self.objective)(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub start: Vec<f64>,
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub best_point: Vec<f64>,
    /// Objective re-evaluated at `best_point` when the report is built.
    pub best_value: f64,
    pub evaluations_used: usize,
    pub converged: Vec<bool>,
    pub seed_results: Vec<SeedResult>,
}

impl OptimizationReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let base = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    acc
}

/// Seed points in the box: shifted Halton points, one per seed.
pub fn seed_points(lower: &[f64], upper: &[f64], count: usize, rng_seed: u64) -> Vec<Vec<f64>> {
    let dim = lower.len();
    assert!(dim <= PRIMES.len(), "Halton seeding supports up to {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[d]) + shift[d]).fract();
                    lower[d] + u * (upper[d] - lower[d])
                })
                .collect()
        })
        .collect()
}

struct Vertex {
    x: Vec<f64>,
    /// Negated objective: the simplex minimizes.
    cost: f64,
}

fn nelder_mead<F>(p: &OptimizationProblem<F>, start: &[f64], budget: usize) -> SeedResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = start.len();
    let mut evaluations = 0usize;
    let cost = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -p.eval(x)
    };

    let build_simplex = |centre: &[f64], evals: &mut usize| -> Vec<Vertex> {
        let mut simplex = Vec::with_capacity(n + 1);
        simplex.push(Vertex {
            x: centre.to_vec(),
            cost: -p.eval(centre),
        });
        for i in 0..n {
            let mut x = centre.to_vec();
            let h = INITIAL_STEP * (p.upper[i] - p.lower[i]);
            x[i] = if x[i] + h <= p.upper[i] { x[i] + h } else { x[i] - h };
            p.clamp(&mut x);
            simplex.push(Vertex {
                cost: -p.eval(&x),
                x,
            });
        }
        *evals += n + 1;
        simplex
    };

    let mut start = start.to_vec();
    p.clamp(&mut start);
    let mut simplex = build_simplex(&start, &mut evaluations);
    let mut restarted = false;
    let converged = loop {
        simplex.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        let best = &simplex[0];
        let worst = &simplex[n];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(&best.x).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = (worst.cost - best.cost).abs();
        let flat = !worst.cost.is_finite() && !best.cost.is_finite();
        if diameter <= p.tolerance && (spread <= p.tolerance || flat) {
            if restarted || evaluations + n + 1 > budget {
                break true;
            }
            // Rebuild a full-size simplex around the collapsed point, once.
            restarted = true;
            let centre = simplex[0].x.clone();
            simplex = build_simplex(&centre, &mut evaluations);
            continue;
        }
        if evaluations + n + 2 > budget {
            break false;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, towards: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(towards)
                .map(|(c, w)| c + t * (w - c))
                .collect();
            p.clamp(&mut x);
            x
        };

        let worst_x = simplex[n].x.clone();
        let worst_cost = simplex[n].cost;
        let reflected = along(-REFLECT, &worst_x);
        let reflected_cost = cost(&reflected, &mut evaluations);

        if reflected_cost < simplex[0].cost {
            let expanded = along(-REFLECT * EXPAND, &worst_x);
            let expanded_cost = cost(&expanded, &mut evaluations);
            simplex[n] = if expanded_cost < reflected_cost {
                Vertex {
                    x: expanded,
                    cost: expanded_cost,
                }
            } else {
                Vertex {
                    x: reflected,
                    cost: reflected_cost,
                }
            };
            continue;
        }
        if reflected_cost < simplex[n - 1].cost {
            simplex[n] = Vertex {
                x: reflected,
                cost: reflected_cost,
            };
            continue;
        }

        let (contracted, threshold) = if reflected_cost < worst_cost {
            (along(-REFLECT * CONTRACT, &worst_x), reflected_cost)
        } else {
            (along(CONTRACT, &worst_x), worst_cost)
        };
        let contracted_cost = cost(&contracted, &mut evaluations);
        if contracted_cost < threshold {
            simplex[n] = Vertex {
                x: contracted,
                cost: contracted_cost,
            };
            continue;
        }

        let anchor = simplex[0].x.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, a) in v.x.iter_mut().zip(&anchor) {
                *xi = a + SHRINK * (*xi - a);
            }
            p.clamp(&mut v.x);
            v.cost = cost(&v.x, &mut evaluations);
        }
    };

    simplex.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let best = simplex.swap_remove(0);
    SeedResult {
        start,
        value: -best.cost,
        point: best.x,
        evaluations,
        converged,
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Higher value wins; ties go to the lexicographically smallest point.
fn better(a: &SeedResult, b: &SeedResult) -> bool {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => lexicographic(&a.point, &b.point).is_lt(),
    }
}

fn finish<F>(p: &OptimizationProblem<F>, seed_results: Vec<SeedResult>) -> OptimizationReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let best = seed_results
        .iter()
        .fold(None::<&SeedResult>, |acc, r| match acc {
            Some(b) if !better(r, b) => Some(b),
            _ => Some(r),
        })
        .expect("at least one seed result");
    let best_point = best.point.clone();
    OptimizationReport {
        best_value: p.eval(&best_point),
        best_point,
        evaluations_used: seed_results.iter().map(|r| r.evaluations).sum::<usize>() + 1,
        converged: seed_results.iter().map(|r| r.converged).collect(),
        seed_results,
    }
}

/// Multistart Nelder-Mead maximization. Deterministic for a fixed
/// `(problem, rng_seed)`.
pub fn maximize<F>(p: &OptimizationProblem<F>, rng_seed: u64) -> Result<OptimizationReport, OptimizationError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    p.validate()?;
    let starts = seed_points(&p.lower, &p.upper, p.seed_count, rng_seed);
    maximize_from(p, &starts)
}

/// Same as [`maximize`] with caller-chosen start points (one seed each).
pub fn maximize_from<F>(p: &OptimizationProblem<F>, starts: &[Vec<f64>]) -> Result<OptimizationReport, OptimizationError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let p_seeds = OptimizationProblem {
        lower: p.lower.clone(),
        upper: p.upper.clone(),
        objective: &p.objective,
        seed_count: starts.len(),
        budget: p.budget,
        tolerance: p.tolerance,
    };
    p_seeds.validate()?;
    for s in starts {
        if s.len() != p.dimension() {
            return Err(OptimizationError::DimensionMismatch {
                dimension: p.dimension(),
                lower: s.len(),
                upper: s.len(),
            });
        }
    }
    let per_seed = p.budget / starts.len();
    let seed_results: Vec<SeedResult> = starts
        .par_iter()
        .map(|s| nelder_mead(&p_seeds, s, per_seed))
        .collect();
    Ok(finish(&p_seeds, seed_results))
}

/// Exhaustive lattice evaluation with `steps_per_dim` points per
/// coordinate, endpoints included.
pub fn grid_scan<F>(p: &OptimizationProblem<F>, steps_per_dim: usize) -> Result<OptimizationReport, OptimizationError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if steps_per_dim < 2 {
        return Err(OptimizationError::TooFewSteps(steps_per_dim));
    }
    if p.dimension() > 5 {
        return Err(OptimizationError::DimensionTooLarge(p.dimension()));
    }
    p.validate()?;

    let dim = p.dimension();
    let coord = |d: usize, k: usize| {
        if k + 1 == steps_per_dim {
            p.upper[d]
        } else {
            p.lower[d] + (p.upper[d] - p.lower[d]) * k as f64 / (steps_per_dim - 1) as f64
        }
    };
    let total = steps_per_dim.pow(dim as u32);
    let mut x = vec![0.0; dim];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..dim).rev() {
            x[d] = coord(d, rem % steps_per_dim);
            rem /= steps_per_dim;
        }
        let v = p.eval(&x);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x.clone()));
        }
    }
    let (value, point) = best.expect("lattice is non-empty");
    let result = SeedResult {
        start: point.clone(),
        point,
        value,
        evaluations: total,
        converged: true,
    };
    Ok(finish(p, vec![result]))
}

/// One coordinate of a [`SearchBox`]: either searched over an interval or
/// pinned to a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Free { lower: f64, upper: f64 },
    Fixed(f64),
}

/// A box in which some coordinates may be held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub bounds: Vec<Bound>,
}

impl SearchBox {
    pub fn new(bounds: Vec<Bound>) -> Self {
        Self { bounds }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn pin(mut self, index: usize, value: f64) -> Self {
        self.bounds[index] = Bound::Fixed(value);
        self
    }

    pub fn free_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.bounds
            .iter()
            .filter_map(|b| match *b {
                Bound::Free { lower, upper } => Some((lower, upper)),
                Bound::Fixed(_) => None,
            })
            .unzip()
    }

    /// Full point from the free coordinates.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut it = free.iter();
        self.bounds
            .iter()
            .map(|b| match *b {
                Bound::Free { .. } => *it.next().expect("one value per free coordinate"),
                Bound::Fixed(v) => v,
            })
            .collect()
    }

    /// Free coordinates of a full point.
    pub fn project(&self, full: &[f64]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(full)
            .filter(|(b, _)| matches!(b, Bound::Free { .. }))
            .map(|(_, &x)| x)
            .collect()
    }

    pub fn contains(&self, full: &[f64]) -> bool {
        full.len() == self.bounds.len()
            && self.bounds.iter().zip(full).all(|(b, &x)| match *b {
                Bound::Free { lower, upper } => (lower..=upper).contains(&x),
                Bound::Fixed(v) => x == v,
            })
    }
}

/// Budget and seeding knobs shared by the model-level maximizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultistartSettings {
    pub seed_count: usize,
    pub budget: usize,
    pub tolerance: f64,
    pub rng_seed: u64,
}

impl Default for MultistartSettings {
    fn default() -> Self {
        Self {
            seed_count: 64,
            budget: 64 * 4000,
            tolerance: 1e-10,
            rng_seed: 0,
        }
    }
}

/// Maximizes over a [`SearchBox`]; the report holds full-dimensional points.
///
/// `extra_starts` are full points appended after the low-discrepancy seeds.
pub fn maximize_in_box<F>(
    search: &SearchBox,
    objective: F,
    settings: &MultistartSettings,
    extra_starts: &[Vec<f64>],
) -> Result<OptimizationReport, OptimizationError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (lower, upper) = search.free_bounds();
    if lower.is_empty() {
        let point = search.expand(&[]);
        let value = objective(&point);
        return Ok(OptimizationReport {
            best_point: point.clone(),
            best_value: value,
            evaluations_used: 1,
            converged: vec![true],
            seed_results: vec![SeedResult {
                start: point.clone(),
                point,
                value,
                evaluations: 1,
                converged: true,
            }],
        });
    }
    let reduced = |free: &[f64]| objective(&search.expand(free));
    let mut starts = seed_points(&lower, &upper, settings.seed_count, settings.rng_seed);
    starts.extend(extra_starts.iter().map(|s| search.project(s)));
    let problem = OptimizationProblem::new(lower, upper, reduced)
        .with_seeds(starts.len())
        .with_budget(settings.budget.max(starts.len() * 2 * (search.dimension() + 1)))
        .with_tolerance(settings.tolerance);
    let mut report = maximize_from(&problem, &starts)?;
    report.best_point = search.expand(&report.best_point);
    for r in &mut report.seed_results {
        r.start = search.expand(&r.start);
        r.point = search.expand(&r.point);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(x: &[f64]) -> f64 {
        -x.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>()
    }

    #[test]
    fn quadratic_bowl() {
        let p = OptimizationProblem::new(vec![0.0; 2], vec![1.0; 2], bowl).with_seeds(4);
        let r = maximize(&p, 0).unwrap();
        assert!(r.best_value.abs() < 1e-8);
        for x in &r.best_point {
            assert!((x - 0.5).abs() < 1e-4);
        }
        assert!(r.all_converged());
    }

    #[test]
    fn grid_bowl_hits_lattice_centre() {
        let p = OptimizationProblem::new(vec![0.0; 2], vec![1.0; 2], bowl);
        let r = grid_scan(&p, 11).unwrap();
        assert_eq!(r.best_point, vec![0.5, 0.5]);
        assert_eq!(r.evaluations_used, 122);
    }

    #[test]
    fn maximum_on_the_boundary() {
        let p = OptimizationProblem::new(vec![0.0, 0.0], vec![1.0, 2.0], |x: &[f64]| x[0] + x[1])
            .with_seeds(3);
        let r = maximize(&p, 7).unwrap();
        assert!((r.best_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn flat_objective_does_not_panic() {
        let p = OptimizationProblem::new(vec![-1.0; 3], vec![1.0; 3], |_: &[f64]| 1.0)
            .with_seeds(2)
            .with_budget(500);
        let r = maximize(&p, 0).unwrap();
        assert_eq!(r.best_value, 1.0);
    }

    #[test]
    fn nan_objective_is_ranked_lowest() {
        let p = OptimizationProblem::new(vec![-1.0], vec![1.0], |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                -x[0] * x[0]
            }
        })
        .with_seeds(4);
        let r = maximize(&p, 1).unwrap();
        assert!(r.best_value.is_finite());
    }

    #[test]
    fn budget_exhaustion_marks_unconverged() {
        let p = OptimizationProblem::new(vec![-5.0; 4], vec![5.0; 4], |x: &[f64]| {
            -x.iter().map(|v| v * v).sum::<f64>()
        })
        .with_seeds(2)
        .with_budget(20)
        .with_tolerance(1e-14);
        let r = maximize(&p, 0).unwrap();
        assert!(!r.all_converged());
        assert!(r.evaluations_used <= 21);
    }

    #[test]
    fn validation_errors() {
        let f = |_: &[f64]| 0.0;
        let p = OptimizationProblem::new(vec![0.0], vec![0.0], f);
        assert!(matches!(maximize(&p, 0), Err(OptimizationError::EmptyBox { .. })));
        let p = OptimizationProblem::new(vec![0.0, 0.0], vec![1.0], f);
        assert!(matches!(maximize(&p, 0), Err(OptimizationError::DimensionMismatch { .. })));
        let p = OptimizationProblem::new(vec![0.0; 2], vec![1.0; 2], f).with_budget(5);
        assert!(matches!(maximize(&p, 0), Err(OptimizationError::BudgetTooSmall { .. })));
        let p = OptimizationProblem::new(vec![0.0; 6], vec![1.0; 6], f);
        assert!(matches!(grid_scan(&p, 3), Err(OptimizationError::DimensionTooLarge(6))));
        let p = OptimizationProblem::new(vec![0.0; 2], vec![1.0; 2], f);
        assert!(matches!(grid_scan(&p, 1), Err(OptimizationError::TooFewSteps(1))));
    }

    #[test]
    fn halton_seeds_fill_the_box_deterministically() {
        let a = seed_points(&[0.0, -1.0], &[1.0, 1.0], 32, 3);
        let b = seed_points(&[0.0, -1.0], &[1.0, 1.0], 32, 3);
        assert_eq!(a, b);
        assert_ne!(a, seed_points(&[0.0, -1.0], &[1.0, 1.0], 32, 4));
        for p in &a {
            assert!((0.0..1.0).contains(&p[0]) && (-1.0..1.0).contains(&p[1]));
        }
        // Every quarter of the first axis receives seeds.
        for q in 0..4 {
            let lo = q as f64 / 4.0;
            assert!(a.iter().any(|p| p[0] >= lo && p[0] < lo + 0.25));
        }
    }

    #[test]
    fn pinned_coordinates_stay_fixed() {
        let search = SearchBox::new(vec![
            Bound::Free { lower: 0.0, upper: 1.0 },
            Bound::Fixed(0.25),
            Bound::Free { lower: 0.0, upper: 1.0 },
        ]);
        let settings = MultistartSettings {
            seed_count: 4,
            budget: 4000,
            ..Default::default()
        };
        let r = maximize_in_box(&search, bowl, &settings, &[]).unwrap();
        assert_eq!(r.best_point[1], 0.25);
        assert!((r.best_value + 0.0625).abs() < 1e-8);
        assert!(r.seed_results.iter().all(|s| search.contains(&s.point)));
    }
}
