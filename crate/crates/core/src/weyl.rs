//! Weyl-operator CHSH correlator of a free scalar field in the reduced
//! spectral parametrization.
//!
//! Alice uses `e^{iφ(f)}` and `e^{iφ(f')}`, Bob `e^{iφ(a·jf)}` and
//! `e^{iφ(b·jf')}` with `j` the modular conjugation on test functions. With
//! `f` and `f'` in the eigenvalue-λ² spectral subspace, every vacuum
//! correlator depends only on the Gram data
//! `‖f‖² = η²(1+λ²)`, `⟨f|jf⟩ = 2η²λ` (and likewise for `f'`).

use serde::{Deserialize, Serialize};

use crate::correlator::{classify, ChshResult};
use crate::error::{finite, ChshError};
use crate::optimizer::{maximize_in_box, Bound, MultistartSettings, OptimizationReport, SearchBox};

pub use crate::correlator::tsirelson_ceiling;

/// Reference point `η = 0.001, η' = 0.511, λ = 0.974, a = 0.227, b = 0.892`.
pub const REFERENCE_PARAMETERS: [f64; 5] = [0.001, 0.511, 0.974, 0.227, 0.892];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylSetting {
    eta: f64,
    eta_prime: f64,
    lambda: f64,
    a: f64,
    b: f64,
}

impl WeylSetting {
    /// `η, η' > 0`, `0 <= λ < 1`; `λ = 0` is the decoupled limit.
    pub fn new(eta: f64, eta_prime: f64, lambda: f64, a: f64, b: f64) -> Result<Self, ChshError> {
        for (name, v) in [("eta", eta), ("eta_prime", eta_prime)] {
            if finite(name, v)? <= 0.0 {
                return Err(ChshError::InvalidParameter {
                    name,
                    value: v,
                    reason: "normalization must be positive",
                });
            }
        }
        if !(0.0..1.0).contains(&finite("lambda", lambda)?) {
            return Err(ChshError::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "spectral parameter must lie in [0, 1)",
            });
        }
        Ok(Self {
            eta,
            eta_prime,
            lambda,
            a: finite("a", a)?,
            b: finite("b", b)?,
        })
    }

    /// Coordinates in the order `(η, η', λ, a, b)`.
    pub fn from_slice(x: &[f64]) -> Result<Self, ChshError> {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn reference() -> Self {
        Self::from_slice(&REFERENCE_PARAMETERS).expect("reference parameters are valid")
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.eta, self.eta_prime, self.lambda, self.a, self.b]
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn eta_prime(&self) -> f64 {
        self.eta_prime
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(η, a) ↔ (η', b)`.
    pub fn swapped(&self) -> Self {
        Self {
            eta: self.eta_prime,
            eta_prime: self.eta,
            lambda: self.lambda,
            a: self.b,
            b: self.a,
        }
    }
}

/// Inner products of `f, f', jf, jf'`. The mixed products `⟨f|jf'⟩` and
/// `⟨f'|jf⟩` vanish and are not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionGram {
    pub norm_f_sq: f64,
    pub norm_fp_sq: f64,
    pub cross_f_jf: f64,
    pub cross_fp_jfp: f64,
}

pub fn gram_from_setting(s: &WeylSetting) -> TestFunctionGram {
    let spread = 1.0 + s.lambda * s.lambda;
    TestFunctionGram {
        norm_f_sq: s.eta * s.eta * spread,
        norm_fp_sq: s.eta_prime * s.eta_prime * spread,
        cross_f_jf: 2.0 * s.eta * s.eta * s.lambda,
        cross_fp_jfp: 2.0 * s.eta_prime * s.eta_prime * s.lambda,
    }
}

/// Which of the four combined test functions to take the norm of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeylPair {
    /// `f + a·jf`
    FJf,
    /// `f' + a·jf`
    FpJf,
    /// `f + b·jf'`
    FJfp,
    /// `f' + b·jf'`
    FpJfp,
}

impl WeylPair {
    pub const ALL: [WeylPair; 4] = [WeylPair::FJf, WeylPair::FpJf, WeylPair::FJfp, WeylPair::FpJfp];

    pub fn as_str(&self) -> &'static str {
        match self {
            WeylPair::FJf => "f+a*jf",
            WeylPair::FpJf => "f'+a*jf",
            WeylPair::FJfp => "f+b*jf'",
            WeylPair::FpJfp => "f'+b*jf'",
        }
    }
}

/// `‖u + c·jv‖²` from the Gram data, using `‖jv‖ = ‖v‖`.
pub fn combined_norm_sq(g: &TestFunctionGram, which: WeylPair, coeff: f64) -> f64 {
    let c2 = coeff * coeff;
    match which {
        WeylPair::FJf => (1.0 + c2) * g.norm_f_sq + 2.0 * coeff * g.cross_f_jf,
        WeylPair::FpJf => g.norm_fp_sq + c2 * g.norm_f_sq,
        WeylPair::FJfp => g.norm_f_sq + c2 * g.norm_fp_sq,
        WeylPair::FpJfp => (1.0 + c2) * g.norm_fp_sq + 2.0 * coeff * g.cross_fp_jfp,
    }
}

/// The four squared norms in CHSH order.
pub fn norms(s: &WeylSetting) -> [f64; 4] {
    let g = gram_from_setting(s);
    [
        combined_norm_sq(&g, WeylPair::FJf, s.a),
        combined_norm_sq(&g, WeylPair::FpJf, s.a),
        combined_norm_sq(&g, WeylPair::FJfp, s.b),
        combined_norm_sq(&g, WeylPair::FpJfp, s.b),
    ]
}

/// `⟨0|W(h)|0⟩ = e^{-‖h‖²/2}`.
pub fn weyl_vacuum_expectation(norm_sq: f64) -> Result<f64, ChshError> {
    if norm_sq.is_nan() || norm_sq < 0.0 {
        return Err(ChshError::NegativeNorm(norm_sq));
    }
    Ok((-0.5 * norm_sq).exp())
}

/// The four vacuum correlators, before the sign of the last one is applied.
pub fn terms(s: &WeylSetting) -> [f64; 4] {
    norms(s).map(|n| weyl_vacuum_expectation(n).expect("Gram norms are non-negative"))
}

pub fn chsh_weyl_value(s: &WeylSetting) -> f64 {
    let [t1, t2, t3, t4] = terms(s);
    t1 + t2 + t3 - t4
}

/// All four correlators are real, so the classical bound is 2.
pub fn chsh_weyl(s: &WeylSetting) -> ChshResult {
    classify(chsh_weyl_value(s).into(), true)
}

/// Box in `(η, η', λ, a, b)` order.
pub fn default_weyl_box() -> SearchBox {
    SearchBox::new(vec![
        Bound::Free {
            lower: 1e-9,
            upper: 2.0,
        },
        Bound::Free {
            lower: 1e-9,
            upper: 2.0,
        },
        Bound::Free {
            lower: 1e-9,
            upper: 1.0 - 1e-9,
        },
        Bound::Free {
            lower: -2.0,
            upper: 2.0,
        },
        Bound::Free {
            lower: -2.0,
            upper: 2.0,
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylMaximum {
    pub setting: WeylSetting,
    pub result: ChshResult,
    pub reference_value: f64,
    /// The search found a larger value than the reference point.
    pub exceeds_reference: bool,
    pub degraded: bool,
    pub report: OptimizationReport,
}

/// Multistart maximization of `|⟨C⟩|`. The reference point is added as an
/// extra start when it lies in the box.
pub fn maximize_weyl(search: &SearchBox, settings: &MultistartSettings) -> Result<WeylMaximum, ChshError> {
    let objective = |x: &[f64]| match WeylSetting::from_slice(x) {
        Ok(s) => chsh_weyl_value(&s).abs(),
        Err(_) => f64::NAN,
    };
    let extra: Vec<Vec<f64>> = search
        .contains(&REFERENCE_PARAMETERS)
        .then(|| REFERENCE_PARAMETERS.to_vec())
        .into_iter()
        .collect();
    let report = maximize_in_box(search, objective, settings, &extra)?;
    let setting = WeylSetting::from_slice(&report.best_point)?;
    let result = chsh_weyl(&setting);
    if !tsirelson_ceiling(&result) {
        return Err(ChshError::TsirelsonExceeded(result.magnitude));
    }
    let reference_value = chsh_weyl_value(&WeylSetting::reference());
    Ok(WeylMaximum {
        setting,
        exceeds_reference: result.magnitude > reference_value,
        reference_value,
        result,
        degraded: !report.all_converged(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::Classification;

    #[test]
    fn gram_examples() {
        let g = gram_from_setting(&WeylSetting::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap());
        assert_eq!(g.norm_f_sq, 1.0);
        assert_eq!(g.cross_f_jf, 0.0);
        let g = gram_from_setting(&WeylSetting::new(1.0, 0.511, 1.0 - 1e-12, 0.0, 0.0).unwrap());
        assert!((g.norm_f_sq - 2.0).abs() < 1e-11 && (g.cross_f_jf - 2.0).abs() < 1e-11);
        assert!((g.norm_fp_sq - 0.511 * 0.511 * 2.0).abs() < 1e-11);
        let g = gram_from_setting(&WeylSetting::reference());
        assert!((g.norm_fp_sq - 0.511 * 0.511 * 1.948_676).abs() < 1e-15);
    }

    #[test]
    fn combined_norm_examples() {
        let s = WeylSetting::new(1.0, 0.3, 1.0 - 1e-12, -1.0, 0.0).unwrap();
        let g = gram_from_setting(&s);
        assert!(combined_norm_sq(&g, WeylPair::FJf, -1.0).abs() < 1e-11);
        assert_eq!(combined_norm_sq(&g, WeylPair::FJf, 0.0), g.norm_f_sq);
    }

    #[test]
    fn vacuum_expectation_examples() {
        assert_eq!(weyl_vacuum_expectation(0.0).unwrap(), 1.0);
        assert!((weyl_vacuum_expectation(2.0 * 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(weyl_vacuum_expectation(-1e-3), Err(ChshError::NegativeNorm(_))));
        assert!(weyl_vacuum_expectation(f64::NAN).is_err());
    }

    #[test]
    fn reference_point_decomposition() {
        // Desk oracle, computed independently from the Gram expansion.
        let s = WeylSetting::reference();
        let expected_norms = [2.933_481_325_6e-6, 0.508_840_326_209_325_6, 0.404_867_798_093_748_5, 1.821_162_130_285_748_6];
        for (n, e) in norms(&s).iter().zip(expected_norms) {
            assert!((n - e).abs() < 1e-13);
        }
        let expected_terms = [0.999_998_53, 0.775_365_95, 0.816_740_47, 0.402_290_4];
        for (t, e) in terms(&s).iter().zip(expected_terms) {
            assert!((t - e).abs() < 1e-7);
        }
        let r = chsh_weyl(&s);
        assert!((r.value.re - 2.189_814_555_649_697).abs() < 1e-12);
        assert_eq!(r.classification, Classification::Violation);
        assert!(tsirelson_ceiling(&r));
    }

    #[test]
    fn identity_bob_gives_two_exponential() {
        let s = WeylSetting::new(0.7, 1.3, 0.4, 0.0, 0.0).unwrap();
        let expected = 2.0 * (-0.5 * 0.49 * 1.16f64).exp();
        assert!((chsh_weyl_value(&s) - expected).abs() < 1e-15);
    }

    #[test]
    fn swap_permutes_norms() {
        let s = WeylSetting::new(0.3, 1.1, 0.6, -0.4, 1.7).unwrap();
        let n = norms(&s);
        let m = norms(&s.swapped());
        assert_eq!([m[3], m[2], m[1], m[0]], n);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(WeylSetting::new(0.0, 1.0, 0.5, 0.0, 0.0).is_err());
        assert!(WeylSetting::new(1.0, -1.0, 0.5, 0.0, 0.0).is_err());
        assert!(WeylSetting::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(WeylSetting::new(1.0, 1.0, -0.1, 0.0, 0.0).is_err());
        assert!(WeylSetting::new(1.0, 1.0, 0.5, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn ceiling_examples() {
        assert!(tsirelson_ceiling(&classify(2.189.into(), true)));
        assert!(tsirelson_ceiling(&classify(crate::correlator::TSIRELSON_BOUND.into(), true)));
        assert!(!tsirelson_ceiling(&classify(2.9.into(), true)));
    }
}
