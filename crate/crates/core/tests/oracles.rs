use std::f64::consts::PI;
use std::time::Instant;

use chsh_core::gaussian::{i1_closed, i1_quadrature, i2_closed, i2_quadrature, GaussianIntegralArgs};
use chsh_core::phase_space::{
    correlator, correlator_oracle, normalization_oracle, BellWavefunction, PairTag, PhaseSpaceSetting,
};
use chsh_core::quadrature::{integrate, QuadratureSpec};
use chsh_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm()
}

#[test]
fn gaussian_closed_forms_match_quadrature() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let args = GaussianIntegralArgs::new(
            rng.gen_range(0.05..=5.0),
            rng.gen_range(-10.0..=10.0),
            rng.gen_range(-5.0..=5.0),
            rng.gen_range(0.0..=3.0),
        )
        .unwrap();
        let q1 = i1_quadrature(&args, 1e-11).unwrap();
        let q2 = i2_quadrature(&args, 1e-11).unwrap();
        assert!(rel(q1.value, i1_closed(&args).value) < 1e-8, "I1 at {args:?}");
        assert!(rel(q2.value, i2_closed(&args).value) < 1e-8, "I2 at {args:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn error_estimate_bounds_true_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bounded = 0;
    let total = 120;
    for case in 0..total {
        let tol = 10f64.powi(-rng.gen_range(4..=10));
        let (value, exact) = match case % 3 {
            0 => {
                let k = rng.gen_range(0..=9);
                let hi = rng.gen_range(0.5..3.0);
                let spec = QuadratureSpec::new(move |x: f64| Complex64::new(x.powi(k), 0.0), 0.0, hi, tol);
                (integrate(&spec).unwrap(), hi.powi(k + 1) / (k + 1) as f64)
            }
            1 => {
                let w: f64 = rng.gen_range(0.2..4.0);
                let half = 40.0 / w.sqrt();
                let spec = QuadratureSpec::new(move |x: f64| Complex64::new((-w * x * x).exp(), 0.0), -half, half, tol);
                (integrate(&spec).unwrap(), (PI / w).sqrt())
            }
            _ => {
                let w: f64 = rng.gen_range(0.2..4.0);
                let k: f64 = rng.gen_range(0.0..8.0);
                let half = 40.0 / w.sqrt();
                let spec = QuadratureSpec::new(
                    move |x: f64| Complex64::new((-w * x * x).exp() * (k * x).cos(), 0.0),
                    -half,
                    half,
                    tol,
                );
                (integrate(&spec).unwrap(), (PI / w).sqrt() * (-k * k / (4.0 * w)).exp())
            }
        };
        if (value.value - exact).norm() <= value.error_estimate.max(1e-15 * exact.abs()) {
            bounded += 1;
        }
    }
    assert!(bounded * 100 >= 99 * total, "{bounded}/{total}");
}

fn random_setting(rng: &mut ChaCha8Rng) -> PhaseSpaceSetting {
    PhaseSpaceSetting::new(
        rng.gen_range(-4.0..=4.0),
        rng.gen_range(-4.0..=4.0),
        rng.gen_range(-4.0..=4.0),
        rng.gen_range(-4.0..=4.0),
        rng.gen_range(1e-3..=1.0),
    )
    .unwrap()
}

#[test]
fn phase_space_closed_forms_match_master_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for tag in PairTag::ALL {
        for _ in 0..50 {
            let s = random_setting(&mut rng);
            let oracle = correlator_oracle(&s, tag, 1e-8).unwrap();
            let closed = correlator(&s, tag);
            assert!((oracle.value.re - closed).abs() < 1e-6, "{tag:?} at {s:?}");
            assert!(oracle.value.im.abs() < 1e-6);
        }
    }
}

#[test]
fn wavefunction_is_normalized() {
    for ratio in [1e-3, 0.1, 0.5, 1.0] {
        let w = BellWavefunction::from_ratio(ratio).unwrap();
        let n = normalization_oracle(&w, 1e-9).unwrap();
        assert!((n.value.re - 1.0).abs() < 1e-6, "r = {ratio}");
    }
}

#[test]
fn normalization_by_nested_quadrature_in_original_coordinates() {
    let w = BellWavefunction::new(1.0, 2.0).unwrap();
    let outer = |x1: f64| {
        let inner = QuadratureSpec::new(
            move |x2: f64| Complex64::new(chsh_core::phase_space::psi_value(&w, x1, x2).powi(2), 0.0),
            -30.0,
            30.0,
            1e-12,
        );
        integrate(&inner).unwrap().value
    };
    let total = integrate(&QuadratureSpec::new(outer, -30.0, 30.0, 1e-10)).unwrap();
    assert!((total.value.re - 1.0).abs() < 1e-7);
}
