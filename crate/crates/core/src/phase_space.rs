//! CHSH for phase-space Weyl operators on Bell's two-particle wavefunction.
//!
//! Alice measures `A = e^{iαX₁}` or `A' = e^{iα'P₁}`, Bob `B = e^{iβX₂}` or
//! `B' = e^{iβ'P₂}`. The momentum exponentials translate the wavefunction,
//! so every correlator is an overlap integral that factors in the rotated
//! coordinates `x∓ = (x₁ ∓ x₂)/√2` into one `I1` and one `I2`.
//!
//! Settings are dimensionless: `α = a/σ₊`, `β = b/σ₊`, `α' = a'σ₋`,
//! `β' = b'σ₋`, and only the ratio `r = σ₋/σ₊` remains. Internally σ₋ = 1.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlator::{chsh_combine, classify, tsirelson_ceiling, ChshResult, CorrelatorQuad};
use crate::error::{finite, ChshError, QuadratureError};
use crate::gaussian::{i1_closed, i2_closed, GaussianIntegralArgs};
use crate::optimizer::{maximize_in_box, Bound, MultistartSettings, OptimizationReport, SearchBox};
use crate::quadrature::{integrate_2d_factored, Integral, QuadratureSpec};

/// Bell's wavefunction
/// `N ((x₁-x₂)² - 8σ₋²) e^{-(x₁-x₂)²/8σ₋²} e^{-(x₁+x₂)²/8σ₊²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellWavefunction {
    sigma_minus: f64,
    sigma_plus: f64,
    norm: f64,
}

impl BellWavefunction {
    pub fn new(sigma_minus: f64, sigma_plus: f64) -> Result<Self, ChshError> {
        for (name, v) in [("sigma_minus", sigma_minus), ("sigma_plus", sigma_plus)] {
            if finite(name, v)? <= 0.0 {
                return Err(ChshError::InvalidParameter {
                    name,
                    value: v,
                    reason: "width must be positive",
                });
            }
        }
        // 4N² (2πσ₋σ₊)(11σ₋⁴) = 1
        let norm = (4.0 * 2.0 * PI * sigma_minus * sigma_plus * 11.0 * sigma_minus.powi(4))
            .recip()
            .sqrt();
        Ok(Self {
            sigma_minus,
            sigma_plus,
            norm,
        })
    }

    /// σ₋ = 1, σ₊ = 1/r.
    pub fn from_ratio(ratio: f64) -> Result<Self, ChshError> {
        Self::new(1.0, positive_ratio(ratio)?.recip())
    }

    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }
    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `N² · 4 · 2πσ₋σ₊ · 11σ₋⁴`, which should be 1.
    pub fn normalization_identity(&self) -> f64 {
        self.norm * self.norm * 4.0 * 2.0 * PI * self.sigma_minus * self.sigma_plus * 11.0 * self.sigma_minus.powi(4)
    }
}

fn positive_ratio(ratio: f64) -> Result<f64, ChshError> {
    if finite("ratio", ratio)? > 0.0 {
        Ok(ratio)
    } else {
        Err(ChshError::InvalidParameter {
            name: "ratio",
            value: ratio,
            reason: "width ratio must be positive",
        })
    }
}

pub fn psi_value(w: &BellWavefunction, x1: f64, x2: f64) -> f64 {
    let rel = x1 - x2;
    let com = x1 + x2;
    let s2m = w.sigma_minus * w.sigma_minus;
    let s2p = w.sigma_plus * w.sigma_plus;
    w.norm * (rel * rel - 8.0 * s2m) * (-rel * rel / (8.0 * s2m)).exp() * (-com * com / (8.0 * s2p)).exp()
}

/// Dimensionless setting `(a, a', b, b')` and width ratio `r = σ₋/σ₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceSetting {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
    pub ratio: f64,
}

impl PhaseSpaceSetting {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64, ratio: f64) -> Result<Self, ChshError> {
        Ok(Self {
            a: finite("a", a)?,
            a_prime: finite("a_prime", a_prime)?,
            b: finite("b", b)?,
            b_prime: finite("b_prime", b_prime)?,
            ratio: positive_ratio(ratio)?,
        })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self, ChshError> {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.a_prime, self.b, self.b_prime, self.ratio]
    }

    /// Exchange of Alice and Bob: `a ↔ b`, `a' ↔ b'`.
    pub fn exchanged(&self) -> Self {
        Self {
            a: self.b,
            a_prime: self.b_prime,
            b: self.a,
            b_prime: self.a_prime,
            ratio: self.ratio,
        }
    }

    /// Physical `(α, β, α', β')` for σ₋ = 1.
    pub fn physical(&self) -> PhysicalAngles {
        PhysicalAngles {
            alpha: self.a * self.ratio,
            beta: self.b * self.ratio,
            alpha_prime: self.a_prime,
            beta_prime: self.b_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalAngles {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairTag {
    AB,
    APB,
    ABP,
    APBP,
}

impl PairTag {
    pub const ALL: [PairTag; 4] = [PairTag::AB, PairTag::APB, PairTag::ABP, PairTag::APBP];

    pub fn as_str(&self) -> &'static str {
        match self {
            PairTag::AB => "AB",
            PairTag::APB => "A'B",
            PairTag::ABP => "AB'",
            PairTag::APBP => "A'B'",
        }
    }

    /// The physical angles that are switched on for this pair.
    pub fn angles(&self, s: &PhaseSpaceSetting) -> PhysicalAngles {
        let p = s.physical();
        let (alpha, beta, alpha_prime, beta_prime) = match self {
            PairTag::AB => (p.alpha, p.beta, 0.0, 0.0),
            PairTag::APB => (0.0, p.beta, p.alpha_prime, 0.0),
            PairTag::ABP => (p.alpha, 0.0, 0.0, p.beta_prime),
            PairTag::APBP => (0.0, 0.0, p.alpha_prime, p.beta_prime),
        };
        PhysicalAngles {
            alpha,
            beta,
            alpha_prime,
            beta_prime,
        }
    }
}

/// `⟨AB⟩ = e^{-(a+b)²/4} e^{-(a-b)²r²/4} (1 + (a-b)²r²/11 + (a-b)⁴r⁴/44)`.
pub fn corr_ab(s: &PhaseSpaceSetting) -> f64 {
    let sum = s.a + s.b;
    let diff2 = (s.a - s.b).powi(2) * s.ratio * s.ratio;
    (-sum * sum / 4.0 - diff2 / 4.0).exp() * (1.0 + diff2 / 11.0 + diff2 * diff2 / 44.0)
}

/// `⟨A'B⟩ = e^{-b²(1+r²)/4} e^{-a'²(1+r²)/16}
///   (1 + b²r²/11 + b⁴r⁴/44 + b²r²a'²/88 - 5a'²/44 + a'⁴/704)`.
pub fn corr_apb(s: &PhaseSpaceSetting) -> f64 {
    let r2 = s.ratio * s.ratio;
    let b2 = s.b * s.b;
    let ap2 = s.a_prime * s.a_prime;
    let br2 = b2 * r2;
    (-b2 * (1.0 + r2) / 4.0 - ap2 * (1.0 + r2) / 16.0).exp()
        * (1.0 + br2 / 11.0 + br2 * br2 / 44.0 + br2 * ap2 / 88.0 - 5.0 * ap2 / 44.0 + ap2 * ap2 / 704.0)
}

/// `⟨AB'⟩`, the Alice/Bob mirror image of [`corr_apb`].
pub fn corr_abp(s: &PhaseSpaceSetting) -> f64 {
    corr_apb(&s.exchanged())
}

/// `⟨A'B'⟩ = e^{-(a'+b')²r²/16} e^{-(a'-b')²/16} (1 - 5(a'-b')²/44 + (a'-b')⁴/704)`.
pub fn corr_apbp(s: &PhaseSpaceSetting) -> f64 {
    let sum = s.a_prime + s.b_prime;
    let d2 = (s.a_prime - s.b_prime).powi(2);
    (-sum * sum * s.ratio * s.ratio / 16.0 - d2 / 16.0).exp() * (1.0 - 5.0 * d2 / 44.0 + d2 * d2 / 704.0)
}

pub fn correlator(s: &PhaseSpaceSetting, which: PairTag) -> f64 {
    match which {
        PairTag::AB => corr_ab(s),
        PairTag::APB => corr_apb(s),
        PairTag::ABP => corr_abp(s),
        PairTag::APBP => corr_apbp(s),
    }
}

pub fn correlators(s: &PhaseSpaceSetting) -> CorrelatorQuad {
    CorrelatorQuad::from_real(corr_ab(s), corr_apb(s), corr_abp(s), corr_apbp(s))
}

/// `r → 0` limits of the four correlators.
pub fn corr_leading(s: &PhaseSpaceSetting, which: PairTag) -> f64 {
    let mirrored = |x: f64, y: f64| {
        let (x2, y2) = (x * x, y * y);
        (-x2 / 4.0 - y2 / 16.0).exp() * (1.0 - 5.0 * y2 / 44.0 + y2 * y2 / 704.0)
    };
    match which {
        PairTag::AB => (-(s.a + s.b).powi(2) / 4.0).exp(),
        PairTag::APB => mirrored(s.b, s.a_prime),
        PairTag::ABP => mirrored(s.a, s.b_prime),
        PairTag::APBP => {
            let d2 = (s.a_prime - s.b_prime).powi(2);
            (-d2 / 16.0).exp() * (1.0 - 5.0 * d2 / 44.0 + d2 * d2 / 704.0)
        }
    }
}

/// Quadratic small-parameter expansion of the CHSH value on the slice
/// `a = -b`, `a' = -b'`, `r → 0`: `2 - a²/2 + 31a'²/88`.
pub fn leading_chsh_quadratic(a: f64, a_prime: f64) -> f64 {
    2.0 - a * a / 2.0 + 31.0 / 88.0 * a_prime * a_prime
}

pub fn chsh_phase_space(s: &PhaseSpaceSetting) -> ChshResult {
    classify(chsh_combine(&correlators(s)), true)
}

/// The quadratic expansion exceeds 2 iff `a'²/a² > 44/31`.
pub fn violation_condition(a: f64, a_prime: f64) -> Result<bool, ChshError> {
    if finite("a", a)? == 0.0 {
        return Err(ChshError::InvalidParameter {
            name: "a",
            value: a,
            reason: "the ratio a'/a needs a non-zero a",
        });
    }
    let a_prime = finite("a_prime", a_prime)?;
    Ok(a_prime * a_prime / (a * a) > 44.0 / 31.0)
}

/// Overlap `∫ e^{iαx₁} e^{iβx₂} ψ*(x₁,x₂) ψ(x₁+α', x₂+β')` from the closed
/// forms of `I1` (centre of mass) and `I2` (relative coordinate).
pub fn master_integral_closed(w: &BellWavefunction, angles: &PhysicalAngles) -> Result<Complex64, ChshError> {
    let PhysicalAngles {
        alpha,
        beta,
        alpha_prime,
        beta_prime,
    } = *angles;
    let com = GaussianIntegralArgs::i1(
        1.0 / (4.0 * w.sigma_plus * w.sigma_plus),
        (alpha + beta) / SQRT_2,
        (alpha_prime + beta_prime) / SQRT_2,
    )?;
    let rel = GaussianIntegralArgs::new(
        1.0 / (4.0 * w.sigma_minus * w.sigma_minus),
        (alpha - beta) / SQRT_2,
        (alpha_prime - beta_prime) / SQRT_2,
        2.0 * w.sigma_minus,
    )?;
    Ok(4.0 * w.norm * w.norm * i1_closed(&com).value * i2_closed(&rel).value)
}

/// The same overlap by direct quadrature of the rotated-coordinate
/// integrand, which factors into independent `x₋` and `x₊` integrals.
/// `tol` is an absolute tolerance on the result.
pub fn master_integral_oracle(
    w: &BellWavefunction,
    alpha: f64,
    beta: f64,
    alpha_prime: f64,
    beta_prime: f64,
    tol: f64,
) -> Result<Integral, QuadratureError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let sm = w.sigma_minus;
    let sp = w.sigma_plus;
    let k_minus = (alpha - beta) / SQRT_2;
    let k_plus = (alpha + beta) / SQRT_2;
    let c_minus = (alpha_prime - beta_prime) / SQRT_2;
    let c_plus = (alpha_prime + beta_prime) / SQRT_2;
    let d2 = 4.0 * sm * sm;

    let rel = move |x: f64| {
        let shifted = x + c_minus;
        let weight = (-(x * x + shifted * shifted) / (4.0 * sm * sm)).exp();
        Complex64::cis(k_minus * x) * ((x * x - d2) * (shifted * shifted - d2) * weight)
    };
    let com = move |x: f64| {
        let shifted = x + c_plus;
        Complex64::cis(k_plus * x) * (-(x * x + shifted * shifted) / (4.0 * sp * sp)).exp()
    };

    // Both factors are bounded by their unshifted values; scale the
    // absolute tolerances so the 4N²-weighted product meets `tol`.
    let rel_scale = 11.0 * (2.0 * PI).sqrt() * sm.powi(5);
    let com_scale = (2.0 * PI).sqrt() * sp;
    let reach = (1e8 / tol).ln().sqrt();
    let rel_half = sm * (2.0 * reach + 10.0);
    let com_half = sp * (2.0 * reach + 2.0);

    let rel_spec = QuadratureSpec::new(rel, -c_minus / 2.0 - rel_half, -c_minus / 2.0 + rel_half, tol * rel_scale / 4.0)
        .with_initial_panels(16);
    let com_spec = QuadratureSpec::new(com, -c_plus / 2.0 - com_half, -c_plus / 2.0 + com_half, tol * com_scale / 4.0)
        .with_initial_panels(16);
    let product = integrate_2d_factored(&rel_spec, &com_spec)?;
    let prefactor = 4.0 * w.norm * w.norm;
    Ok(Integral {
        value: product.value * prefactor,
        error_estimate: product.error_estimate * prefactor,
        evaluations: product.evaluations,
    })
}

/// `∫∫|ψ|²`: the oracle with all four angles zero.
pub fn normalization_oracle(w: &BellWavefunction, tol: f64) -> Result<Integral, QuadratureError> {
    master_integral_oracle(w, 0.0, 0.0, 0.0, 0.0, tol)
}

/// Oracle value of one correlator for a dimensionless setting.
pub fn correlator_oracle(s: &PhaseSpaceSetting, which: PairTag, tol: f64) -> Result<Integral, ChshError> {
    let w = BellWavefunction::from_ratio(s.ratio)?;
    let p = which.angles(s);
    Ok(master_integral_oracle(
        &w,
        p.alpha,
        p.beta,
        p.alpha_prime,
        p.beta_prime,
        tol,
    )?)
}

/// Search box for [`maximize_phase_space`], coordinates `(a, a', b, b', r)`.
pub fn default_phase_space_box() -> SearchBox {
    let angle = Bound::Free {
        lower: -4.0,
        upper: 4.0,
    };
    SearchBox::new(vec![
        angle,
        angle,
        angle,
        angle,
        Bound::Free {
            lower: 1e-3,
            upper: 1.0,
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceMaximum {
    pub setting: PhaseSpaceSetting,
    pub result: ChshResult,
    /// Some seed ran out of budget before its simplex converged.
    pub degraded: bool,
    pub report: OptimizationReport,
}

/// Multistart maximization of `|⟨C⟩|` over the box.
pub fn maximize_phase_space(search: &SearchBox, settings: &MultistartSettings) -> Result<PhaseSpaceMaximum, ChshError> {
    let objective = |x: &[f64]| match PhaseSpaceSetting::from_slice(x) {
        Ok(s) => chsh_phase_space(&s).magnitude,
        Err(_) => f64::NAN,
    };
    let report = maximize_in_box(search, objective, settings, &[])?;
    let setting = PhaseSpaceSetting::from_slice(&report.best_point)?;
    let result = chsh_phase_space(&setting);
    if !tsirelson_ceiling(&result) {
        return Err(ChshError::TsirelsonExceeded(result.magnitude));
    }
    Ok(PhaseSpaceMaximum {
        setting,
        result,
        degraded: !report.all_converged(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::Classification;

    fn setting(a: f64, ap: f64, b: f64, bp: f64, r: f64) -> PhaseSpaceSetting {
        PhaseSpaceSetting::new(a, ap, b, bp, r).unwrap()
    }

    #[test]
    fn wavefunction_values() {
        let w = BellWavefunction::new(0.7, 3.0).unwrap();
        assert!((w.normalization_identity() - 1.0).abs() < 1e-12);
        assert!((psi_value(&w, 0.0, 0.0) + 8.0 * w.norm() * 0.49).abs() < 1e-15);
        let root = 2.0 * SQRT_2 * 0.7;
        assert!(psi_value(&w, root, 0.0).abs() < 1e-15);
        assert!(psi_value(&w, 0.3, 0.3 + root).abs() < 1e-15);
        assert_eq!(psi_value(&w, 0.4, -1.3), psi_value(&w, -1.3, 0.4));
        assert!(BellWavefunction::new(0.0, 1.0).is_err());
        assert!(BellWavefunction::from_ratio(-1.0).is_err());
    }

    #[test]
    fn correlator_trivial_cases() {
        assert_eq!(corr_ab(&setting(0.0, 0.0, 0.0, 0.0, 0.3)), 1.0);
        assert_eq!(corr_ab(&setting(1.0, 0.0, -1.0, 0.0, 1e-300)), 1.0);
        assert_eq!(corr_apbp(&setting(0.0, 0.0, 0.0, 0.0, 0.5)), 1.0);
        assert_eq!(corr_apb(&setting(0.7, 0.0, 0.0, 1.1, 0.5)), 1.0);
        let zero = chsh_phase_space(&setting(0.0, 0.0, 0.0, 0.0, 0.2));
        assert_eq!(zero.magnitude, 2.0);
        assert_eq!(zero.classification, Classification::WithinClassical);
    }

    #[test]
    fn frozen_oracle_values() {
        // Direct quadrature of the master integrand (independent tool).
        let cases = [
            (PairTag::AB, setting(1.0, 0.0, 0.0, 0.0, 0.1), 0.777_564_211_342_378_2),
            (PairTag::APB, setting(0.0, 1.5, 0.7, 0.0, 0.4), 0.560_663_107_037_227_7),
            (PairTag::ABP, setting(-0.6, 0.0, 0.0, 2.0, 0.25), 0.398_057_745_216_146_2),
            (PairTag::APBP, setting(0.0, 1.1, 0.0, -0.9, 0.5), 0.442_223_968_556_721_1),
        ];
        for (tag, s, expected) in cases {
            assert!((correlator(&s, tag) - expected).abs() < 1e-12, "{tag:?}");
        }
    }

    #[test]
    fn exchange_symmetry_matches_direct_mirror_form() {
        // The mirrored closed form for ⟨AB'⟩, written out.
        let abp_direct = |s: &PhaseSpaceSetting| {
            let r2 = s.ratio * s.ratio;
            let a2 = s.a * s.a;
            let bp2 = s.b_prime * s.b_prime;
            (-a2 / 4.0 - a2 * r2 / 4.0 - bp2 / 16.0 - bp2 * r2 / 16.0).exp()
                * (1.0 + a2 * r2 / 11.0 + a2 * a2 * r2 * r2 / 44.0 + a2 * bp2 * r2 / 88.0 - 5.0 * bp2 / 44.0
                    + bp2 * bp2 / 704.0)
        };
        for s in [setting(0.3, -1.2, 2.0, 0.8, 0.4), setting(-3.1, 0.2, 1.4, -2.6, 0.9)] {
            assert!((corr_abp(&s) - abp_direct(&s)).abs() < 1e-15);
            assert_eq!(corr_apb(&s), corr_abp(&s.exchanged()));
        }
    }

    #[test]
    fn closed_master_integral_matches_correlators() {
        let s = setting(0.8, -1.3, 0.4, 2.2, 0.35);
        let w = BellWavefunction::from_ratio(s.ratio).unwrap();
        for tag in PairTag::ALL {
            let m = master_integral_closed(&w, &tag.angles(&s)).unwrap();
            assert!((m.re - correlator(&s, tag)).abs() < 1e-13, "{tag:?}");
            assert!(m.im.abs() < 1e-13);
        }
    }

    #[test]
    fn oracle_examples() {
        let w = BellWavefunction::from_ratio(0.1).unwrap();
        let n = normalization_oracle(&w, 1e-9).unwrap();
        assert!((n.value.re - 1.0).abs() < 1e-8);
        let s = setting(1.0, 0.0, 0.0, 0.0, 0.1);
        let o = correlator_oracle(&s, PairTag::AB, 1e-9).unwrap();
        assert!((o.value.re - corr_ab(&s)).abs() < 1e-8);
        let s = setting(0.0, 0.9, 0.0, -1.7, 0.1);
        let o = correlator_oracle(&s, PairTag::APBP, 1e-9).unwrap();
        assert!((o.value.re - corr_apbp(&s)).abs() < 1e-8);
        assert!(o.value.im.abs() < 1e-9);
    }

    #[test]
    fn violation_condition_examples() {
        assert!(violation_condition(0.1, 0.2).unwrap());
        assert!(!violation_condition(0.2, 0.2).unwrap());
        assert!(!violation_condition(1.0, (44.0f64 / 31.0).sqrt()).unwrap());
        assert!(violation_condition(0.0, 1.0).is_err());
    }

    #[test]
    fn small_setting_violates() {
        let s = setting(0.1, 0.2, -0.1, -0.2, 0.01);
        let r = chsh_phase_space(&s);
        assert!(r.magnitude > 2.0);
        assert!((r.magnitude - leading_chsh_quadratic(0.1, 0.2)).abs() < 1e-3);
        assert_eq!(r.classification, Classification::Violation);
    }

    #[test]
    fn leading_forms_examples() {
        let s = setting(0.6, 0.0, -0.6, 0.0, 0.2);
        assert_eq!(corr_leading(&s, PairTag::AB), 1.0);
    }

    #[test]
    fn leading_forms_converge_quadratically_in_r() {
        for tag in PairTag::ALL {
            let gap = |r: f64| {
                let s = setting(0.7, -1.1, 0.4, 1.6, r);
                (correlator(&s, tag) - corr_leading(&s, tag)).abs()
            };
            let ratio = gap(0.02) / gap(0.01);
            assert!((ratio - 4.0).abs() < 0.05, "{tag:?}: {ratio}");
        }
    }
}
