//! Index of qualitative robustness, the critical exponent `q*` of a
//! distortion, comparative robustness on the power scale, and uniform
//! ψ-integrability of families of laws.

use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::orlicz::{smallest_admissible_scale, Loss, WeightFunction, YoungFunction};
use crate::quadrature::{integrate, integrate_to_zero, least_squares, Tolerance};
use crate::risk_measures::{DistortionFunction, RiskMeasure};

/// Regression window for the singularity exponent of `g′₊` at 0.
pub const REGRESSION_WINDOW: (f64, f64) = (1e-8, 1e-3);
const REGRESSION_POINTS: usize = 41;

/// Largest exponent reported; `r` lives in `[0, 1)`.
const MAX_EXPONENT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    TailRegression,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::TailRegression => "tail-regression",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessProfile {
    pub iqr: f64,
    /// `f64::INFINITY` when every power of `g′₊` is integrable.
    pub q_star: f64,
    /// Singularity exponent of `g′₊` at 0, for distortion measures.
    pub r: Option<f64>,
    pub method: Method,
    /// Set when a tabulated distortion is too coarse for the regression
    /// window to resolve its behaviour near 0.
    pub low_confidence: bool,
}

impl RobustnessProfile {
    fn from_exponent(r: f64, method: Method, low_confidence: bool) -> Self {
        RobustnessProfile {
            iqr: 1.0 - r,
            q_star: if r == 0.0 { f64::INFINITY } else { 1.0 / r },
            r: Some(r),
            method,
            low_confidence,
        }
    }

    /// Profile of a non-distortion measure with the given index.
    fn from_iqr(iqr: f64) -> Self {
        RobustnessProfile {
            iqr,
            q_star: if iqr >= 1.0 { f64::INFINITY } else { 1.0 / (1.0 - iqr) },
            r: None,
            method: Method::ClosedForm,
            low_confidence: false,
        }
    }

    pub fn to_json(&self) -> Value {
        let q_star = if self.q_star.is_finite() {
            json!(self.q_star)
        } else {
            json!("inf")
        };
        json!({
            "iqr": self.iqr,
            "q_star": q_star,
            "r": self.r,
            "method": self.method.to_string(),
            "low_confidence": self.low_confidence,
        })
    }
}

/// Index of a risk measure, or the reason it has none.
#[derive(Debug, Clone, PartialEq)]
pub enum Iqr {
    Defined(RobustnessProfile),
    NotApplicable(String),
}

impl Iqr {
    pub fn value(&self) -> Option<f64> {
        match self {
            Iqr::Defined(p) => Some(p.iqr),
            Iqr::NotApplicable(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Iqr::Defined(p) => p.to_json(),
            Iqr::NotApplicable(reason) => json!({ "iqr": null, "not_applicable": reason }),
        }
    }
}

/// Least-squares slope of `log g′₊(t)` against `−log t` on
/// [`REGRESSION_WINDOW`], clamped to `[0, 1)`.
pub fn tail_exponent_regression(g: &DistortionFunction) -> Result<f64> {
    let (lo, hi) = REGRESSION_WINDOW;
    let step = (hi / lo).ln() / (REGRESSION_POINTS - 1) as f64;
    let mut pts = Vec::with_capacity(REGRESSION_POINTS);
    for k in 0..REGRESSION_POINTS {
        let t = lo * (step * k as f64).exp();
        let d = g.right_derivative(t);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Singular(format!("g′₊({t:e}) = {d} for {g}")));
        }
        pts.push((-t.ln(), d.ln()));
    }
    let (slope, _) = least_squares(&pts);
    // slopes at rounding level come from a bounded g′₊
    if slope.abs() < 1e-9 {
        return Ok(0.0);
    }
    Ok(slope.clamp(0.0, MAX_EXPONENT))
}

/// Exponent `r` with `g′₊(t) ~ c·t^{−r}` as `t ↓ 0`; closed form for the
/// built-in families, regression otherwise.
pub fn tail_exponent(g: &DistortionFunction) -> Result<f64> {
    match g.singularity_exponent() {
        Some(r) => Ok(r.clamp(0.0, MAX_EXPONENT)),
        None => tail_exponent_regression(g),
    }
}

/// `q* = sup{q ≥ 1 : ∫_0^1 (g′₊)^q dt < ∞} = 1/r`.
pub fn qstar(g: &DistortionFunction) -> Result<f64> {
    let r = tail_exponent(g)?;
    Ok(if r == 0.0 { f64::INFINITY } else { 1.0 / r })
}

/// `(q* − 1)/q* = 1 − r`.
pub fn iqr_distortion(g: &DistortionFunction) -> Result<f64> {
    Ok(1.0 - tail_exponent(g)?)
}

/// Full profile of a distortion.
pub fn distortion_profile(g: &DistortionFunction) -> Result<RobustnessProfile> {
    match g.singularity_exponent() {
        Some(r) => Ok(RobustnessProfile::from_exponent(r.clamp(0.0, MAX_EXPONENT), Method::ClosedForm, false)),
        None => {
            let low_confidence = match g {
                DistortionFunction::Tabulated(table) => table.nodes()[1] > REGRESSION_WINDOW.0,
                _ => false,
            };
            let r = tail_exponent_regression(g)?;
            Ok(RobustnessProfile::from_exponent(r, Method::TailRegression, low_confidence))
        }
    }
}

/// Index of qualitative robustness from the known `L^p` finiteness domain
/// of each family.
pub fn iqr_closed_form(rho: &RiskMeasure) -> Result<Iqr> {
    Ok(match rho {
        RiskMeasure::NegExpectation => Iqr::Defined(RobustnessProfile::from_exponent(0.0, Method::ClosedForm, false)),
        RiskMeasure::VaR { .. } => {
            Iqr::NotApplicable("value at risk is not convex, so the index is not defined".into())
        }
        RiskMeasure::AVaR { level } => Iqr::Defined(distortion_profile(&DistortionFunction::avar(*level)?)?),
        RiskMeasure::Distortion(g) => Iqr::Defined(distortion_profile(g)?),
        RiskMeasure::Entropic { .. } => Iqr::Defined(RobustnessProfile::from_iqr(0.0)),
        RiskMeasure::Shortfall { loss, .. } => Iqr::Defined(RobustnessProfile::from_iqr(match loss {
            Loss::Exponential { .. } => 0.0,
            Loss::Power { p, .. } => 1.0 / p,
        })),
        RiskMeasure::OneSidedMoment { p, a } => {
            if *a == 0.0 {
                Iqr::Defined(RobustnessProfile::from_iqr(1.0))
            } else {
                Iqr::Defined(RobustnessProfile::from_iqr(1.0 / p))
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub comparable: bool,
    pub at_least_as_robust: bool,
    pub strictly_more: bool,
    pub basis: String,
}

const IQR_TIE: f64 = 1e-9;

/// Compare two measures through their indices, i.e. on the scale of
/// power weight functions `ψ_p(x) = |x|^p`.
pub fn compare_robustness(rho1: &RiskMeasure, rho2: &RiskMeasure) -> Result<Comparison> {
    let (a, b) = (iqr_closed_form(rho1)?, iqr_closed_form(rho2)?);
    Ok(match (a.value(), b.value()) {
        (Some(x), Some(y)) => Comparison {
            comparable: true,
            at_least_as_robust: x >= y - IQR_TIE,
            strictly_more: x > y + IQR_TIE,
            basis: format!("power-scale restriction: iqr({rho1}) = {x} vs iqr({rho2}) = {y}"),
        },
        _ => Comparison {
            comparable: false,
            at_least_as_robust: false,
            strictly_more: false,
            basis: "not comparable: the index is undefined for at least one measure".into(),
        },
    })
}

/// Default grid `M_k = 2^{k/4}`, k = 1..=24.
pub fn default_level_grid() -> Vec<f64> {
    (1..=24).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformIntegrability {
    /// First grid level where `sup_ν ∫_{ψ ≥ M} ψ dν ≤ ε`; `None` when the
    /// supremum never falls below ε on the grid.
    pub m_epsilon: Option<f64>,
    /// `sup_ν` tail weight at the last level examined.
    pub last_sup: f64,
}

/// Scan `levels` for the first `M` with `sup_ν ∫_{ψ ≥ M} ψ dν ≤ ε`.
pub fn uniformly_psi_integrating(
    family: &[Distribution],
    psi: &WeightFunction,
    eps: f64,
    levels: &[f64],
) -> UniformIntegrability {
    let mut last_sup = f64::INFINITY;
    for &m in levels {
        last_sup = family
            .par_iter()
            .map(|nu| nu.tail_weight(psi, m).unwrap_or(f64::INFINITY))
            .reduce(|| 0.0, f64::max);
        if last_sup <= eps {
            return UniformIntegrability {
                m_epsilon: Some(m),
                last_sup,
            };
        }
    }
    UniformIntegrability {
        m_epsilon: None,
        last_sup,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualNorm {
    pub finite: bool,
    /// `f64::INFINITY` when not finite.
    pub norm: f64,
}

impl DualNorm {
    fn infinite() -> Self {
        DualNorm {
            finite: false,
            norm: f64::INFINITY,
        }
    }
}

/// `∫_0^1 f(t) dt` with the singular end at 0 handled by decade shells and
/// the range split where `g′₊` has a kink.
fn unit_integral<F: Fn(f64) -> f64>(f: F, kink: f64) -> Result<f64> {
    let near = integrate_to_zero(&f, kink.min(0.5), "dual modular")?;
    let mut total = near;
    if kink.min(0.5) < kink {
        total += integrate(&f, 0.5, kink, Tolerance::default())?;
    }
    if kink < 1.0 {
        total += integrate(&f, kink, 1.0, Tolerance::default())?;
    }
    Ok(total)
}

/// Luxemburg norm of `g′₊(U)`, `U` uniform on `[0, 1]`, under the conjugate
/// `Ψ*`.
pub fn dual_norm_check(g: &DistortionFunction, psi: &YoungFunction) -> DualNorm {
    if matches!(psi, YoungFunction::Power { p } if *p == 1.0) {
        // Ψ* is the indicator of [0, 1]: the norm is ess sup g′₊ = g′₊(0+)
        let top = g.right_derivative(0.0);
        return if top.is_finite() {
            DualNorm { finite: true, norm: top }
        } else {
            DualNorm::infinite()
        };
    }
    let kink = g.derivative_support();
    let modular = |lambda: f64| -> f64 {
        unit_integral(|t| psi.conjugate(g.right_derivative(t) / lambda), kink).unwrap_or(f64::INFINITY)
    };
    if !modular(1.0).is_finite() {
        return DualNorm::infinite();
    }
    match smallest_admissible_scale(modular, 1.0, &format!("the conjugate of {psi}")) {
        Ok(norm) => DualNorm { finite: true, norm },
        Err(_) => DualNorm::infinite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk_measures::{entropic_eval, TabulatedDistortion};
    use approx::assert_relative_eq;

    fn power(a: f64, b: f64) -> DistortionFunction {
        DistortionFunction::power(a, b).unwrap()
    }

    fn mmv(l: f64, g: f64) -> DistortionFunction {
        DistortionFunction::minmaxvar(l, g).unwrap()
    }

    fn avar(a: f64) -> DistortionFunction {
        DistortionFunction::avar(a).unwrap()
    }

    #[test]
    fn tail_exponent_examples() {
        assert_eq!(tail_exponent(&avar(0.05)).unwrap(), 0.0);
        assert_eq!(tail_exponent(&mmv(1.0, 0.0)).unwrap(), 0.5);
        assert_eq!(tail_exponent(&power(0.5, 0.25)).unwrap(), 0.75);
        // regression route on the same families
        assert!(tail_exponent_regression(&avar(0.05)).unwrap().abs() < 1e-12);
        assert_relative_eq!(tail_exponent_regression(&mmv(1.0, 0.0)).unwrap(), 0.5, epsilon = 0.02);
        assert_relative_eq!(tail_exponent_regression(&power(0.5, 0.25)).unwrap(), 0.75, epsilon = 1e-9);
    }

    #[test]
    fn regression_agrees_with_closed_form_on_builtins() {
        let mut family = vec![avar(0.01), avar(0.3)];
        for b in [0.1, 0.25, 0.5, 0.75, 1.0] {
            family.push(power(0.5, b));
        }
        for l in [0.0, 0.5, 1.0, 3.0] {
            for gm in [0.0, 1.0] {
                family.push(mmv(l, gm));
            }
        }
        for g in family {
            let closed = iqr_distortion(&g).unwrap();
            let fitted = 1.0 - tail_exponent_regression(&g).unwrap();
            assert!((closed - fitted).abs() <= 0.02, "{g}: {closed} vs {fitted}");
        }
    }

    #[test]
    fn qstar_matches_direct_quadrature() {
        for g in [power(0.5, 0.5), power(1.0, 0.25), mmv(1.0, 1.0), mmv(3.0, 0.0)] {
            let q = qstar(&g).unwrap();
            let moment = |q: f64| integrate_to_zero(|t| g.right_derivative(t).powf(q), 0.5, "moment");
            assert!(moment(q - 0.1).is_ok(), "{g} below q*");
            assert!(moment(q + 0.1).is_err(), "{g} above q*");
        }
        assert_eq!(qstar(&avar(0.1)).unwrap(), f64::INFINITY);
        assert_eq!(qstar(&power(0.5, 0.5)).unwrap(), 2.0);
        assert_eq!(qstar(&mmv(1.0, 0.0)).unwrap(), 2.0);
    }

    #[test]
    fn iqr_examples() {
        assert_eq!(iqr_distortion(&avar(0.05)).unwrap(), 1.0);
        for b in [0.25, 0.5, 0.75] {
            assert_relative_eq!(iqr_distortion(&power(0.5, b)).unwrap(), b, epsilon = 1e-15);
        }
        for l in [0.5, 1.0, 3.0] {
            assert_relative_eq!(iqr_distortion(&mmv(l, 1.0)).unwrap(), 1.0 / (1.0 + l), epsilon = 1e-15);
        }
        let rho = RiskMeasure::one_sided_moment(2.0, 0.5).unwrap();
        assert_eq!(iqr_closed_form(&rho).unwrap().value(), Some(0.5));
        assert_eq!(iqr_closed_form(&RiskMeasure::NegExpectation).unwrap().value(), Some(1.0));
        assert_eq!(iqr_closed_form(&RiskMeasure::entropic(1.0).unwrap()).unwrap().value(), Some(0.0));
        assert!(matches!(
            iqr_closed_form(&RiskMeasure::var(0.05).unwrap()).unwrap(),
            Iqr::NotApplicable(_)
        ));
        let sf = RiskMeasure::shortfall(Loss::new_power(4.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(iqr_closed_form(&sf).unwrap().value(), Some(0.25));
        let sf = RiskMeasure::shortfall(Loss::new_exponential(1.0).unwrap(), 1.0).unwrap();
        assert_eq!(iqr_closed_form(&sf).unwrap().value(), Some(0.0));
    }

    #[test]
    fn entropic_index_zero_witness() {
        // a loss with every polynomial moment but no exponential moment
        let x = Distribution::lognormal(0.0, 1.0).unwrap().affine(-1.0, 0.0);
        for p in 1..=6 {
            assert!(x.expect(|v| v.abs().powi(p)).is_ok(), "moment {p}");
        }
        assert!(entropic_eval(&x, 0.5).is_err());
    }

    #[test]
    fn profile_invariants() {
        for g in [avar(0.1), power(0.4, 0.3), mmv(2.0, 1.0)] {
            let p = distortion_profile(&g).unwrap();
            assert!((0.0..=1.0).contains(&p.iqr));
            if p.q_star.is_finite() {
                assert_relative_eq!(p.iqr, (p.q_star - 1.0) / p.q_star, epsilon = 1e-14);
            } else {
                assert_eq!(p.iqr, 1.0);
            }
            assert_relative_eq!(p.iqr, 1.0 - p.r.unwrap(), epsilon = 1e-15);
        }
        let table = TabulatedDistortion::new(vec![0.0, 0.1, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        let p = distortion_profile(&DistortionFunction::Tabulated(table)).unwrap();
        assert_eq!(p.method, Method::TailRegression);
        assert!(p.low_confidence);
        assert_eq!(p.iqr, 1.0);
        let json = p.to_json();
        assert_eq!(json["q_star"], "inf");
        assert_eq!(json["method"], "tail-regression");
    }

    #[test]
    fn comparison_examples() {
        let c = compare_robustness(&RiskMeasure::NegExpectation, &RiskMeasure::one_sided_moment(2.0, 1.0).unwrap())
            .unwrap();
        assert!(c.at_least_as_robust && c.strictly_more);
        let a5 = RiskMeasure::avar(0.05).unwrap();
        let a1 = RiskMeasure::avar(0.01).unwrap();
        let (x, y) = (compare_robustness(&a5, &a1).unwrap(), compare_robustness(&a1, &a5).unwrap());
        assert!(x.at_least_as_robust && y.at_least_as_robust && !x.strictly_more && !y.strictly_more);
        let m = RiskMeasure::Distortion(mmv(1.0, 1.0));
        let p = RiskMeasure::Distortion(power(0.5, 0.5));
        assert!(compare_robustness(&m, &p).unwrap().at_least_as_robust);
        assert!(compare_robustness(&p, &m).unwrap().at_least_as_robust);
        let v = compare_robustness(&RiskMeasure::var(0.1).unwrap(), &a5).unwrap();
        assert!(!v.comparable && !v.at_least_as_robust);
        assert!(c.basis.contains("power-scale"));
    }

    #[test]
    fn uniform_integrability_examples() {
        let levels = default_level_grid();
        let abs = WeightFunction::abs_power(1.0).unwrap();
        for psi in [abs.clone(), WeightFunction::One, WeightFunction::Young(YoungFunction::Exponential)] {
            let r = uniformly_psi_integrating(&[Distribution::point(0.0)], &psi, 0.01, &levels);
            assert_eq!(r.m_epsilon, Some(levels[0]));
        }
        let escape: Vec<Distribution> = (2..=100)
            .map(|k| {
                let k = k as f64;
                Distribution::discrete(&[0.0, k], &[1.0 - 1.0 / k, 1.0 / k]).unwrap()
            })
            .collect();
        let r = uniformly_psi_integrating(&escape, &abs, 0.5, &levels);
        assert_eq!(r.m_epsilon, None);
        assert_relative_eq!(r.last_sup, 1.0, epsilon = 1e-12);
        // bounded second moment: ∫x² ≤ 4 gives ∫_{|x|≥M}|x| ≤ 4/M
        let bounded: Vec<Distribution> = vec![
            Distribution::normal(0.0, 2.0).unwrap(),
            Distribution::normal(1.0, 3f64.sqrt()).unwrap(),
            Distribution::uniform(-3.4, 3.4).unwrap(),
            Distribution::discrete(&[0.0, 20.0], &[0.99, 0.01]).unwrap(),
            Distribution::discrete(&[-2.0, 2.0], &[0.5, 0.5]).unwrap(),
        ];
        for d in &bounded {
            assert!(d.expect(|x| x * x).unwrap() <= 4.0 + 1e-9, "{d}");
        }
        let m = uniformly_psi_integrating(&bounded, &abs, 0.1, &levels).m_epsilon.unwrap();
        assert!(m <= 40.0, "{m}");
    }

    #[test]
    fn dual_norm_examples() {
        for p in [1.0, 1.5, 2.0, 4.0] {
            let r = dual_norm_check(&avar(0.1), &YoungFunction::power(p).unwrap());
            assert!(r.finite, "AVaR with p = {p}");
        }
        let r = dual_norm_check(&avar(0.25), &YoungFunction::power(1.0).unwrap());
        assert_relative_eq!(r.norm, 4.0);
        assert!(dual_norm_check(&power(1.0, 0.5), &YoungFunction::power(3.0).unwrap()).finite);
        assert!(!dual_norm_check(&power(1.0, 0.5), &YoungFunction::power(1.25).unwrap()).finite);
        // L² norm of g′ for AVaR(α): conjugate of x²/2 is y²/2, so the modular
        // at λ is α·(1/α)²/(2λ²) = 1/(2αλ²) and the norm is (2α)^{-1/2}
        let r = dual_norm_check(&avar(0.2), &YoungFunction::power(2.0).unwrap());
        assert_relative_eq!(r.norm, (2.0f64 * 0.2).powf(-0.5), max_relative = 1e-9);
    }

    #[test]
    fn dual_norm_is_monotone_and_coherent() {
        let ps = [1.1, 1.3, 1.6, 2.0, 3.0, 5.0];
        for beta in [0.2, 0.5, 0.8] {
            let g = power(0.5, beta);
            let iqr = iqr_distortion(&g).unwrap();
            let mut seen_finite = false;
            for &p in &ps {
                let finite = dual_norm_check(&g, &YoungFunction::power(p).unwrap()).finite;
                assert!(finite || !seen_finite, "monotone in p, β = {beta}, p = {p}");
                seen_finite |= finite;
                // ρ_g is finite on L^p exactly when 1/p < iqr
                let margin = iqr - 1.0 / p;
                if margin > 0.05 {
                    assert!(finite, "β = {beta}, p = {p}");
                } else if margin < -0.05 {
                    assert!(!finite, "β = {beta}, p = {p}");
                }
            }
        }
    }
}
