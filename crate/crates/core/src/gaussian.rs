//! The two standard Gaussian integrals
//!
//! ```text
//! I1(a, b, c)    = ∫ e^{-a x²} e^{-a (x+c)²} e^{i b x} dx
//! I2(a, b, c, d) = ∫ e^{-a x²} e^{-a (x+c)²} e^{i b x} (x² - d²)((x+c)² - d²) dx
//! ```
//!
//! in closed form, plus quadrature oracles that integrate the defining
//! integrands directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, ChshError, QuadratureError};
use crate::quadrature::{integrate, Integral, QuadratureSpec};

/// Magnitudes below this are reported as exact zero with the underflow flag.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianIntegralArgs {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl GaussianIntegralArgs {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, ChshError> {
        let a = finite("a", a)?;
        if a <= 0.0 {
            return Err(ChshError::InvalidParameter {
                name: "a",
                value: a,
                reason: "Gaussian width must be positive",
            });
        }
        let d = finite("d", d)?;
        if d < 0.0 {
            return Err(ChshError::InvalidParameter {
                name: "d",
                value: d,
                reason: "polynomial offset must be non-negative",
            });
        }
        Ok(Self {
            a,
            b: finite("b", b)?,
            c: finite("c", c)?,
            d,
        })
    }

    /// Arguments for `I1`, which ignores `d`.
    pub fn i1(a: f64, b: f64, c: f64) -> Result<Self, ChshError> {
        Self::new(a, b, c, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Same arguments with `b → -b`.
    pub fn mirrored(&self) -> Self {
        Self { b: -self.b, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: Complex64,
    /// Set when the true magnitude is below [`UNDERFLOW_THRESHOLD`]; `value`
    /// is then exactly zero.
    pub underflow: bool,
}

impl ClosedForm {
    fn checked(value: Complex64) -> Self {
        if value.norm() < UNDERFLOW_THRESHOLD {
            Self {
                value: Complex64::new(0.0, 0.0),
                underflow: true,
            }
        } else {
            Self {
                value,
                underflow: false,
            }
        }
    }
}

/// Common Gaussian prefactor `√(π/2a) e^{-b²/8a} e^{-ac²/2} e^{-ibc/2}`.
fn envelope(args: &GaussianIntegralArgs) -> Complex64 {
    let GaussianIntegralArgs { a, b, c, .. } = *args;
    let modulus = (PI / (2.0 * a)).sqrt() * (-b * b / (8.0 * a) - a * c * c / 2.0).exp();
    Complex64::from_polar(modulus, -b * c / 2.0)
}

/// Polynomial factor of `I2`, fully expanded.
pub fn i2_polynomial(args: &GaussianIntegralArgs) -> f64 {
    let GaussianIntegralArgs { a, b, c, d } = *args;
    let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
    3.0 / (16.0 * a2) - d2 / (2.0 * a) + d2 * d2 - 3.0 * b2 / (32.0 * a2 * a)
        + b2 * b2 / (256.0 * a2 * a2)
        + b2 * d2 / (8.0 * a2)
        + b2 * c2 / (32.0 * a2)
        - c2 / (8.0 * a)
        - c2 * d2 / 2.0
        + c2 * c2 / 16.0
}

/// The same polynomial grouped around `s = c²/4 + d²`.
pub fn i2_polynomial_grouped(args: &GaussianIntegralArgs) -> f64 {
    let GaussianIntegralArgs { a, b, c, d } = *args;
    let (a2, b2) = (a * a, b * b);
    let s = c * c / 4.0 + d * d;
    3.0 / (16.0 * a2) - 3.0 * b2 / (32.0 * a2 * a) + b2 * b2 / (256.0 * a2 * a2)
        + s * (b2 / (8.0 * a2) - 1.0 / (2.0 * a))
        + s * s
        - d * d * c * c
}

pub fn i1_closed(args: &GaussianIntegralArgs) -> ClosedForm {
    ClosedForm::checked(envelope(args))
}

pub fn i2_closed(args: &GaussianIntegralArgs) -> ClosedForm {
    ClosedForm::checked(envelope(args) * i2_polynomial(args))
}

/// Integration path for the quadrature oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Contour {
    /// The real line, as written.
    RealAxis,
    /// The parallel line `Im x = b/4a`. The integrand is entire and decays
    /// like a Gaussian in the strip, so the integral is unchanged; on this
    /// line the oscillation cancels and small results keep relative accuracy.
    SaddleShift,
}

fn i1_integrand(args: GaussianIntegralArgs, z: Complex64) -> Complex64 {
    let GaussianIntegralArgs { a, b, c, .. } = args;
    let shifted = z + c;
    (-a * z * z - a * shifted * shifted + Complex64::i() * b * z).exp()
}

fn i2_integrand(args: GaussianIntegralArgs, z: Complex64) -> Complex64 {
    let d2 = args.d * args.d;
    let shifted = z + args.c;
    i1_integrand(args, z) * (z * z - d2) * (shifted * shifted - d2)
}

fn oracle<G>(args: &GaussianIntegralArgs, tol: f64, contour: Contour, integrand: G) -> Result<Integral, QuadratureError>
where
    G: Fn(GaussianIntegralArgs, Complex64) -> Complex64,
{
    if !(tol.is_finite() && tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let GaussianIntegralArgs { a, b, c, d } = *args;
    let half_width = ((10.0 / tol).ln() / a).sqrt() + c.abs() + d.abs() + 10.0;
    let centre = -c / 2.0;
    let lift = match contour {
        Contour::RealAxis => 0.0,
        Contour::SaddleShift => b / (4.0 * a),
    };
    let args = *args;
    let f = move |x: f64| integrand(args, Complex64::new(x, lift));
    let spec = QuadratureSpec::new(f, centre - half_width, centre + half_width, f64::MIN_POSITIVE)
        .with_rel_tol(tol)
        .with_initial_panels(16);
    integrate(&spec)
}

/// `I1` by adaptive quadrature along the saddle contour, to relative `tol`.
pub fn i1_quadrature(args: &GaussianIntegralArgs, tol: f64) -> Result<Integral, QuadratureError> {
    oracle(args, tol, Contour::SaddleShift, i1_integrand)
}

pub fn i2_quadrature(args: &GaussianIntegralArgs, tol: f64) -> Result<Integral, QuadratureError> {
    oracle(args, tol, Contour::SaddleShift, i2_integrand)
}

pub fn i1_quadrature_on(args: &GaussianIntegralArgs, tol: f64, contour: Contour) -> Result<Integral, QuadratureError> {
    oracle(args, tol, contour, i1_integrand)
}

pub fn i2_quadrature_on(args: &GaussianIntegralArgs, tol: f64, contour: Contour) -> Result<Integral, QuadratureError> {
    oracle(args, tol, contour, i2_integrand)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(a: f64, b: f64, c: f64, d: f64) -> GaussianIntegralArgs {
        GaussianIntegralArgs::new(a, b, c, d).unwrap()
    }

    fn rel(x: Complex64, y: Complex64) -> f64 {
        (x - y).norm() / y.norm()
    }

    #[test]
    fn i1_examples() {
        let v = i1_closed(&args(0.5, 0.0, 0.0, 0.0)).value;
        assert!((v.re - PI.sqrt()).abs() < 1e-15 && v.im == 0.0);
        let v = i1_closed(&args(1.0, 0.0, 0.0, 0.0)).value;
        assert!((v.re - (PI / 2.0).sqrt()).abs() < 1e-15);
        // Frozen from an independent real-axis quadrature.
        let v = i1_closed(&args(1.0, 2.0, 1.0, 0.0)).value;
        let expected = Complex64::new(0.249_116_376_116_372_05, -0.387_975_768_501_673_87);
        assert!(rel(v, expected) < 1e-12);
    }

    #[test]
    fn i2_examples() {
        let root = (PI / 2.0).sqrt();
        let v = i2_closed(&args(1.0, 0.0, 0.0, 0.0)).value;
        assert!((v.re - root * 3.0 / 16.0).abs() < 1e-15);
        let v = i2_closed(&args(1.0, 0.0, 0.0, 1.0)).value;
        assert!((v.re - root * (3.0 / 16.0 - 0.5 + 1.0)).abs() < 1e-15);
        // Frozen from an independent real-axis quadrature.
        let v = i2_closed(&args(0.25, 1.0, 2.0, 0.5)).value;
        let expected = Complex64::new(-0.716_209_581_334_569_8, 1.115_430_334_442_312_7);
        assert!(rel(v, expected) < 1e-12);
    }

    #[test]
    fn grouped_and_expanded_polynomials_agree() {
        for &(a, b, c, d) in &[(1.0, 0.0, 0.0, 1.0), (0.25, 1.0, 2.0, 0.5), (0.7, 3.0, -1.2, 2.1), (4.0, -7.5, 3.3, 0.0)] {
            let g = args(a, b, c, d);
            let (x, y) = (i2_polynomial(&g), i2_polynomial_grouped(&g));
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(GaussianIntegralArgs::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(GaussianIntegralArgs::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GaussianIntegralArgs::new(1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(GaussianIntegralArgs::new(1.0, 0.0, 0.0, -0.5).is_err());
    }

    #[test]
    fn underflow_flagged_as_zero() {
        let r = i1_closed(&args(0.01, 20.0, 0.0, 0.0));
        assert!(r.underflow);
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert!(!i1_closed(&args(1.0, 50.0, 0.0, 0.0)).underflow);
    }

    #[test]
    fn quadrature_examples() {
        let q = i1_quadrature(&args(0.5, 0.0, 0.0, 0.0), 1e-10).unwrap();
        assert!((q.value.re - PI.sqrt()).abs() < 1e-10);
        let q = i2_quadrature(&args(0.25, 1.0, 2.0, 0.5), 1e-11).unwrap();
        assert!(rel(q.value, i2_closed(&args(0.25, 1.0, 2.0, 0.5)).value) < 1e-9);
    }

    #[test]
    fn stress_case_is_resolved_on_the_saddle_and_flagged_on_the_real_axis() {
        let g = args(1.0, 50.0, 0.0, 0.0);
        let expected = (PI / 2.0).sqrt() * (-312.5f64).exp();
        let q = i1_quadrature(&g, 1e-8).unwrap();
        assert!((q.value.re - expected).abs() <= 1e-8 * expected);
        match i1_quadrature_on(&g, 1e-8, Contour::RealAxis) {
            Ok(q) => assert!((q.value.re - expected).abs() <= 1e-8 * expected),
            Err(QuadratureError::BudgetExhausted { partial }) => {
                assert!(!partial.is_resolved(1e-8));
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn real_axis_agrees_on_mild_arguments() {
        for &(a, b, c, d) in &[(1.0, 2.0, 1.0, 0.0), (0.3, 1.5, -0.7, 1.2), (2.0, -3.0, 0.4, 0.8)] {
            let g = args(a, b, c, d);
            let q = i2_quadrature_on(&g, 1e-11, Contour::RealAxis).unwrap();
            assert!(rel(q.value, i2_closed(&g).value) < 1e-8);
        }
    }
}
