//! Risk measures as functionals on laws, and their plug-in estimators.
//!
//! Sign convention: a law describes a profit-and-loss position `X`, so
//! losses sit in the left tail and `ρ(δ_c) = −c` for every cash-additive
//! measure.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{empirical_from_sample, DiscreteLaw, Distribution, Parametric};
use crate::error::{Error, Result};
use crate::orlicz::Loss;
use crate::quadrature::{integrate_to_infinity, OVERFLOW_GUARD};
use crate::spec::{split_tag, Params};

/// Concave distortion `g: [0,1] → [0,1]` with `g(0) = 0`, `g(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistortionFunction {
    /// `g(t) = (t/α) ∧ 1`
    AVaR { alpha: f64 },
    /// `g(t) = (t/α)^β ∧ 1`
    Power { alpha: f64, beta: f64 },
    /// `g(t) = 1 − (1 − t^{1/(1+λ)})^{1+γ}`
    MinMaxVar { lambda: f64, gamma: f64 },
    /// Piecewise-linear interpolation of a concave table.
    Tabulated(TabulatedDistortion),
}

/// Nodes `0 = t_0 < ... < t_m = 1` with values `g_i`. The value at `t = 0`
/// is read as `g(0+)`; `g(0)` itself is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDistortion {
    t: Vec<f64>,
    g: Vec<f64>,
}

impl TabulatedDistortion {
    pub fn new(t: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if t.len() != g.len() || t.len() < 2 {
            return Err(Error::Domain("distortion table needs at least two matching nodes".into()));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 {
            return Err(Error::Domain("distortion table must span [0, 1]".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("distortion table nodes must increase".into()));
        }
        if (g.last().unwrap() - 1.0).abs() > 1e-12 || g[0] < 0.0 {
            return Err(Error::Domain("distortion table needs g(0+) >= 0 and g(1) = 1".into()));
        }
        if g.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("distortion must be nondecreasing".into()));
        }
        let slopes: Vec<f64> = (1..t.len()).map(|i| (g[i] - g[i - 1]) / (t[i] - t[i - 1])).collect();
        if slopes.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::Domain("distortion table is not concave".into()));
        }
        Ok(TabulatedDistortion { t, g })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.t.partition_point(|&s| s <= x).clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let (g0, g1) = (self.g[i - 1], self.g[i]);
        g0 + (g1 - g0) * (x - t0) / (t1 - t0)
    }
}

/// Forward-difference step for tabulated right-derivatives.
const TABLE_STEP: f64 = 1e-7;

impl DistortionFunction {
    pub fn avar(alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        Ok(DistortionFunction::AVaR { alpha })
    }

    pub fn power(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("power distortion level must lie in (0,1], got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("power distortion exponent must lie in (0,1], got {beta}")));
        }
        Ok(DistortionFunction::Power { alpha, beta })
    }

    pub fn minmaxvar(lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite() && gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "minmaxvar needs nonnegative finite λ, γ, got ({lambda}, {gamma})"
            )));
        }
        Ok(DistortionFunction::MinMaxVar { lambda, gamma })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match *self {
            DistortionFunction::AVaR { alpha } => (t / alpha).min(1.0),
            DistortionFunction::Power { alpha, beta } => (t / alpha).powf(beta).min(1.0),
            DistortionFunction::MinMaxVar { lambda, gamma } => {
                let a = 1.0 / (1.0 + lambda);
                1.0 - (1.0 - t.powf(a)).powf(1.0 + gamma)
            }
            DistortionFunction::Tabulated(ref table) => table.eval(t),
        }
    }

    /// `1 − g(1 − s)`, accurate for small `s`.
    pub fn complement_near_one(&self, s: f64) -> f64 {
        match *self {
            DistortionFunction::MinMaxVar { lambda, gamma } => {
                let a = 1.0 / (1.0 + lambda);
                // 1 − (1−s)^a, then raised to 1+γ
                let inner = -(a * (-s).ln_1p()).exp_m1();
                inner.powf(1.0 + gamma)
            }
            _ => 1.0 - self.eval(1.0 - s),
        }
    }

    /// Right-hand derivative `g′₊(t)` on `[0, 1)`.
    pub fn right_derivative(&self, t: f64) -> f64 {
        match *self {
            DistortionFunction::AVaR { alpha } => {
                if t < alpha {
                    1.0 / alpha
                } else {
                    0.0
                }
            }
            DistortionFunction::Power { alpha, beta } => {
                if t < alpha {
                    beta / alpha * (t / alpha).powf(beta - 1.0)
                } else {
                    0.0
                }
            }
            DistortionFunction::MinMaxVar { lambda, gamma } => {
                let a = 1.0 / (1.0 + lambda);
                let b = 1.0 + gamma;
                if t == 0.0 && lambda > 0.0 {
                    return f64::INFINITY;
                }
                b * (1.0 - t.powf(a)).powf(b - 1.0) * a * t.powf(a - 1.0)
            }
            DistortionFunction::Tabulated(ref table) => {
                let h = TABLE_STEP.min(1.0 - t);
                if h <= 0.0 {
                    return 0.0;
                }
                let left = if t == 0.0 { table.g[0] } else { table.eval(t) };
                (table.eval(t + h) - left) / h
            }
        }
    }

    /// `g(0+)`, the weight on the essential supremum of the loss.
    pub fn jump_at_zero(&self) -> f64 {
        match self {
            DistortionFunction::Tabulated(table) => table.g[0],
            _ => 0.0,
        }
    }

    /// Level beyond which `g′₊` vanishes (1 when it never does).
    pub(crate) fn derivative_support(&self) -> f64 {
        match *self {
            DistortionFunction::AVaR { alpha } | DistortionFunction::Power { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    /// Exponent `r` in `g′₊(t) ~ c·t^{−r}` as `t ↓ 0`, when known in closed
    /// form.
    pub fn singularity_exponent(&self) -> Option<f64> {
        match *self {
            DistortionFunction::AVaR { .. } => Some(0.0),
            DistortionFunction::Power { beta, .. } => Some(1.0 - beta),
            DistortionFunction::MinMaxVar { lambda, .. } => Some(lambda / (1.0 + lambda)),
            DistortionFunction::Tabulated(_) => None,
        }
    }
}

impl fmt::Display for DistortionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistortionFunction::AVaR { alpha } => write!(f, "avar:a={alpha}"),
            DistortionFunction::Power { alpha, beta } => write!(f, "power:a={alpha},b={beta}"),
            DistortionFunction::MinMaxVar { lambda, gamma } => write!(f, "minmaxvar:l={lambda},g={gamma}"),
            DistortionFunction::Tabulated(table) => write!(f, "table[{} nodes]", table.t.len()),
        }
    }
}

impl FromStr for DistortionFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = split_tag(s);
        let mut params = Params::parse(tag, rest)?;
        let g = match tag {
            "avar" => DistortionFunction::avar(params.require("a")?)?,
            "power" => DistortionFunction::power(params.require("a")?, params.require("b")?)?,
            "minmaxvar" => DistortionFunction::minmaxvar(params.require("l")?, params.or("g", 0.0))?,
            other => return Err(Error::Parse(format!("unknown distortion '{other}'"))),
        };
        params.finish()?;
        Ok(g)
    }
}

/// The risk measures covered by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskMeasure {
    /// `ρ(X) = E[−X]`
    NegExpectation,
    /// `V@R_t(X) = −q_X(t)` (upper quantile); not convex.
    VaR { level: f64 },
    /// Average value at risk at level α.
    AVaR { level: f64 },
    Distortion(DistortionFunction),
    /// `(1/β) log E[e^{−βX}]`
    Entropic { beta: f64 },
    /// `inf{m : E[ℓ(−X − m)] ≤ x₀}`
    Shortfall { loss: Loss, threshold: f64 },
    /// `−E[X] + a·E[((X − E[X])⁻)^p]^{1/p}`
    OneSidedMoment { p: f64, a: f64 },
}

fn check_level(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("level must lie in (0,1), got {t}")))
    }
}

impl RiskMeasure {
    pub fn var(level: f64) -> Result<Self> {
        check_level(level)?;
        Ok(RiskMeasure::VaR { level })
    }

    pub fn avar(level: f64) -> Result<Self> {
        check_level(level)?;
        Ok(RiskMeasure::AVaR { level })
    }

    pub fn entropic(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("entropic parameter must be positive, got {beta}")));
        }
        Ok(RiskMeasure::Entropic { beta })
    }

    pub fn shortfall(loss: Loss, threshold: f64) -> Result<Self> {
        if !(threshold > loss.range_floor() && threshold.is_finite()) {
            return Err(Error::Domain(format!(
                "shortfall threshold must lie inside the range of the loss, got {threshold}"
            )));
        }
        Ok(RiskMeasure::Shortfall { loss, threshold })
    }

    pub fn one_sided_moment(p: f64, a: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("one-sided moment order must be >= 1, got {p}")));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("one-sided moment weight must lie in [0,1], got {a}")));
        }
        Ok(RiskMeasure::OneSidedMoment { p, a })
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, RiskMeasure::VaR { .. })
    }
}

impl fmt::Display for RiskMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskMeasure::NegExpectation => write!(f, "neg-exp"),
            RiskMeasure::VaR { level } => write!(f, "var:t={level}"),
            RiskMeasure::AVaR { level } => write!(f, "avar:a={level}"),
            RiskMeasure::Distortion(g) => write!(f, "distortion:{g}"),
            RiskMeasure::Entropic { beta } => write!(f, "entropic:b={beta}"),
            RiskMeasure::Shortfall { loss, threshold } => write!(f, "shortfall:{loss},x0={threshold}"),
            RiskMeasure::OneSidedMoment { p, a } => write!(f, "osm:p={p},a={a}"),
        }
    }
}

impl FromStr for RiskMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = split_tag(s);
        if tag == "distortion" {
            return Ok(RiskMeasure::Distortion(rest.parse()?));
        }
        if tag == "shortfall" {
            let (kind, rest) = split_tag(rest);
            let mut params = Params::parse("shortfall", rest)?;
            let loss = match kind {
                "exp" => Loss::new_exponential(params.require("b")?)?,
                "power" => {
                    let p = params.require("p")?;
                    Loss::new_power(p, params.or("c", 0.0))?
                }
                other => return Err(Error::Parse(format!("unknown shortfall loss '{other}'"))),
            };
            let threshold = params.require("x0")?;
            params.finish()?;
            return RiskMeasure::shortfall(loss, threshold);
        }
        let mut params = Params::parse(tag, rest)?;
        let rho = match tag {
            "neg-exp" => RiskMeasure::NegExpectation,
            "var" => RiskMeasure::var(params.require("t")?)?,
            "avar" => RiskMeasure::avar(params.require("a")?)?,
            "entropic" => RiskMeasure::entropic(params.require("b")?)?,
            "osm" => RiskMeasure::one_sided_moment(params.require("p")?, params.require("a")?)?,
            other => return Err(Error::Parse(format!("unknown risk measure '{other}'"))),
        };
        params.finish()?;
        Ok(rho)
    }
}

// ---- evaluators -------------------------------------------------------------

/// `V@R_t = −q(t)`.
pub fn var(d: &Distribution, t: f64) -> Result<f64> {
    check_level(t)?;
    Ok(-d.quantile(t)?)
}

/// `(1/α) ∫_0^α V@R_t dt`.
pub fn avar(d: &Distribution, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    match d {
        Distribution::Discrete(law) => {
            let mut acc = 0.0;
            let mut prev = 0.0;
            for (k, &c) in law.cumulative().iter().enumerate() {
                let upper = c.min(alpha);
                if upper > prev {
                    acc += law.atoms()[k] * (upper - prev);
                }
                if c >= alpha {
                    break;
                }
                prev = c;
            }
            Ok(-acc / alpha)
        }
        Distribution::Parametric(_) => {
            let integral = d.quantile_integral(|_, q| q, 0.0, alpha)?;
            Ok(-integral / alpha)
        }
    }
}

/// Distortion risk via the distribution function:
/// `∫_{−∞}^0 g(F(y)) dy − ∫_0^∞ (1 − g(F(y))) dy`.
pub fn distortion_eval_cdf(d: &Distribution, g: &DistortionFunction) -> Result<f64> {
    match d {
        Distribution::Discrete(law) => Ok(distortion_cdf_discrete(law, g)),
        Distribution::Parametric(p) => {
            let neg = integrate_to_infinity(|u| g.eval(p.cdf(-u)), 0.0, "distortion lower tail")?;
            let pos = integrate_to_infinity(|u| g.complement_near_one(p.sf(u)), 0.0, "distortion upper tail")?;
            Ok(neg - pos)
        }
    }
}

fn distortion_cdf_discrete(law: &DiscreteLaw, g: &DistortionFunction) -> f64 {
    let atoms = law.atoms();
    let cum = law.cumulative();
    let n = atoms.len();
    // signed integrand length on [a, b): g(F) on the negative half,
    // −(1 − g(F)) on the positive half
    let piece = |a: f64, b: f64, gf: f64| -> f64 {
        let neg = (b.min(0.0) - a).max(0.0);
        let pos = (b - a.max(0.0)).max(0.0);
        gf * neg - (1.0 - gf) * pos
    };
    let mut total = 0.0;
    // (−∞, x_1): F = 0, only the part in [0, x_1) contributes
    if atoms[0] > 0.0 {
        total -= atoms[0];
    }
    for k in 0..n - 1 {
        total += piece(atoms[k], atoms[k + 1], g.eval(cum[k]));
    }
    // [x_n, ∞): F = 1, only the part in [x_n, 0) contributes
    if atoms[n - 1] < 0.0 {
        total += -atoms[n - 1];
    }
    total
}

/// Distortion risk via the spectral (L-statistic) form
/// `∫_0^1 V@R_t g′₊(t) dt`. For discrete laws this is
/// `Σ_k (−x_(k)) (g(W_k) − g(W_{k−1}))`, which needs no derivative.
pub fn distortion_eval_spectral(d: &Distribution, g: &DistortionFunction) -> Result<f64> {
    match d {
        Distribution::Discrete(law) => {
            let mut prev_g = 0.0;
            let mut total = 0.0;
            for (k, &c) in law.cumulative().iter().enumerate() {
                let gc = g.eval(c);
                total -= law.atoms()[k] * (gc - prev_g);
                prev_g = gc;
            }
            Ok(total)
        }
        Distribution::Parametric(_) => {
            if g.jump_at_zero() > 0.0 {
                return Err(Error::Unsupported(
                    "g(0+) > 0 needs the essential supremum of the loss; only discrete laws are supported".into(),
                ));
            }
            let end = g.derivative_support();
            let integral = d.quantile_integral(|t, q| q * g.right_derivative(t), 0.0, end)?;
            Ok(-integral)
        }
    }
}

/// `(1/β) log E[e^{−βX}]`.
pub fn entropic_eval(d: &Distribution, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("entropic parameter must be positive, got {beta}")));
    }
    match d {
        Distribution::Discrete(law) => {
            // log-sum-exp
            let top = law.iter().map(|(x, _)| -beta * x).fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = law.iter().map(|(x, w)| w * (-beta * x - top).exp()).sum();
            Ok((top + s.ln()) / beta)
        }
        Distribution::Parametric(_) => {
            let m = d
                .expect(|x| (-beta * x).exp())
                .map_err(|_| Error::Divergent(format!("exponential moment E[exp(-{beta} X)]")))?;
            Ok(m.ln() / beta)
        }
    }
}

/// `inf{m ∈ ℝ : E[ℓ(−X − m)] ≤ x₀}` by bisection on the nonincreasing map
/// `m ↦ E[ℓ(−X − m)]`.
pub fn shortfall_eval(d: &Distribution, loss: &Loss, threshold: f64) -> Result<f64> {
    if !(threshold > loss.range_floor()) {
        return Err(Error::Domain(format!("shortfall threshold {threshold} is not inside the loss range")));
    }
    let objective = |m: f64| -> Result<f64> {
        d.expect(|x| loss.eval(-x - m))
            .map_err(|_| Error::Divergent(format!("E[ℓ(−X − m)] at m = {m}")))
    };
    const GUARD: f64 = 1e15;
    // hi: feasible (objective ≤ x0); lo: infeasible
    let mut hi = 0.0;
    let mut step = 1.0;
    while objective(hi)? > threshold {
        hi += step;
        step *= 2.0;
        if hi > GUARD {
            return Err(Error::NoRoot("shortfall bracket expansion exceeded the overflow guard".into()));
        }
    }
    let mut lo = hi;
    step = 1.0;
    loop {
        lo -= step;
        step *= 2.0;
        if lo < -GUARD {
            return Err(Error::NoRoot("shortfall bracket expansion exceeded the overflow guard".into()));
        }
        match objective(lo) {
            Ok(v) if v <= threshold => hi = lo,
            // overflow in the exponential loss far to the left counts as infeasible
            Ok(_) | Err(_) => break,
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * hi.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        let feasible = match objective(mid) {
            Ok(v) => v <= threshold,
            Err(_) => false,
        };
        if feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `−E[X] + a·E[((X − E[X])⁻)^p]^{1/p}`.
pub fn one_sided_moment_eval(d: &Distribution, p: f64, a: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("one-sided moment order must be >= 1, got {p}")));
    }
    let mean = d.mean().map_err(|_| Error::Divergent("first moment".into()))?;
    if a == 0.0 {
        return Ok(-mean);
    }
    let lower = d
        .expect(|x| (mean - x).max(0.0).powf(p))
        .map_err(|_| Error::Divergent(format!("one-sided moment of order {p}")))?;
    if lower > OVERFLOW_GUARD {
        return Err(Error::Divergent(format!("one-sided moment of order {p}")));
    }
    Ok(-mean + a * lower.powf(1.0 / p))
}

/// The risk functional `R_ρ(μ)`.
pub fn risk_functional(rho: &RiskMeasure, d: &Distribution) -> Result<f64> {
    match rho {
        RiskMeasure::NegExpectation => d
            .mean()
            .map(|m| -m)
            .map_err(|_| Error::Divergent("first moment".into())),
        RiskMeasure::VaR { level } => var(d, *level),
        RiskMeasure::AVaR { level } => avar(d, *level),
        RiskMeasure::Distortion(g) => distortion_eval_spectral(d, g),
        RiskMeasure::Entropic { beta } => entropic_eval(d, *beta),
        RiskMeasure::Shortfall { loss, threshold } => shortfall_eval(d, loss, *threshold),
        RiskMeasure::OneSidedMoment { p, a } => one_sided_moment_eval(d, *p, *a),
    }
}

/// Plug-in estimate `R_ρ(m̂_n)` from a sample.
pub fn plug_in_estimate(rho: &RiskMeasure, xs: &[f64]) -> Result<f64> {
    let m = empirical_from_sample(xs)?;
    risk_functional(rho, &m.into_distribution())
}

/// Closed-form `R_ρ` on a normal law where one exists, used as a reference.
pub fn normal_reference(rho: &RiskMeasure, mean: f64, sd: f64) -> Result<f64> {
    let d: Distribution = Parametric::normal(mean, sd)?.into();
    match rho {
        RiskMeasure::NegExpectation => Ok(-mean),
        RiskMeasure::Entropic { beta } => Ok(-mean + beta * sd * sd / 2.0),
        _ => risk_functional(rho, &d),
    }
}
