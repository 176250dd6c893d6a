//! Probability laws on the real line.
//!
//! A [`Distribution`] is either a finitely supported law ([`DiscreteLaw`])
//! or a continuous law given by its cdf and quantile function
//! ([`Parametric`]). Every functional in the crate is evaluated through the
//! primitives here: `cdf`, the upper quantile `inf{y : F(y) > t}`, seeded
//! inverse-cdf sampling and integration in quantile form.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::orlicz::WeightFunction;
use crate::quadrature::{integrate, integrate_to_zero, Tolerance};
use crate::spec::{split_tag, Params};

/// Tolerance on the total mass of user-supplied weights.
pub const MASS_TOLERANCE: f64 = 1e-10;

/// A finitely supported law: strictly increasing atoms with positive
/// weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteLaw {
    /// Build a law from (possibly unsorted, possibly repeated) atoms.
    /// Repeated atoms are merged and their weights added.
    pub fn new(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("a discrete law needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::Domain(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("atom {x} is not finite")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!("weight {w} must be positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged_atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged_atoms.last() {
                Some(&last) if last == x => *merged_weights.last_mut().unwrap() += w,
                _ => {
                    merged_atoms.push(x);
                    merged_weights.push(w);
                }
            }
        }
        for w in merged_weights.iter_mut() {
            *w /= total;
        }
        Ok(Self::from_sorted_unchecked(merged_atoms, merged_weights))
    }

    /// Uniform weights over the given values (the empirical law of a sample).
    pub fn uniform(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("sample value {x} is not finite")));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut atoms = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for x in sorted {
            match atoms.last() {
                Some(&last) if last == x => *counts.last_mut().unwrap() += 1,
                _ => {
                    atoms.push(x);
                    counts.push(1);
                }
            }
        }
        let weights = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Self::from_sorted_unchecked(atoms, weights))
    }

    fn from_sorted_unchecked(atoms: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        DiscreteLaw { atoms, weights, cumulative }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative weights `W_k = w_1 + ... + w_k`, with `W_n = 1` exactly.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        // number of atoms <= x
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Index of the atom returned by the upper quantile at level `t`.
    pub fn quantile_index(&self, t: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= t)
            .min(self.atoms.len() - 1)
    }

    pub fn quantile(&self, t: f64) -> f64 {
        self.atoms[self.quantile_index(t)]
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    /// Push-forward under `x ↦ scale·x + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> DiscreteLaw {
        if scale == 0.0 {
            return Self::from_sorted_unchecked(vec![shift], vec![1.0]);
        }
        let mut pairs: Vec<(f64, f64)> = self.iter().map(|(x, w)| (scale * x + shift, w)).collect();
        if scale < 0.0 {
            pairs.reverse();
        }
        let atoms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // distinct atoms can collide after rounding; DiscreteLaw::new merges them
        DiscreteLaw::new(&atoms, &weights).unwrap_or_else(|_| Self::from_sorted_unchecked(atoms, weights))
    }
}

/// Serialized form of a discrete law: `{"atoms": [...], "weights": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteLawJson {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteLaw {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&DiscreteLawJson {
            atoms: self.atoms.clone(),
            weights: self.weights.clone(),
        })
        .expect("plain vectors serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DiscreteLawJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("discrete law JSON: {e}")))?;
        DiscreteLaw::new(&raw.atoms, &raw.weights)
    }

    /// CSV with header `value,weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,weight\n");
        for (x, w) in self.iter() {
            out.push_str(&format!("{x},{w}\n"));
        }
        out
    }

    /// Reads `value,weight` rows, or a single `value` column which is
    /// treated as a raw sample.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut values = Vec::new();
        let mut weights = Vec::new();
        let mut weighted = None;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("csv: {e}")))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let first = record.get(0).unwrap_or("");
            if line == 0 && first.parse::<f64>().is_err() {
                // header row
                continue;
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("csv line {}: '{s}' is not a number", line + 1)))
            };
            let has_weight = record.len() >= 2 && !record.get(1).unwrap_or("").is_empty();
            match weighted {
                None => weighted = Some(has_weight),
                Some(w) if w != has_weight => {
                    return Err(Error::Parse(format!("csv line {}: inconsistent column count", line + 1)))
                }
                _ => {}
            }
            values.push(parse(first)?);
            if has_weight {
                weights.push(parse(record.get(1).unwrap())?);
            }
        }
        if weighted == Some(true) {
            DiscreteLaw::new(&values, &weights)
        } else {
            DiscreteLaw::uniform(&values)
        }
    }
}

/// Continuous laws: built-in families, affine images and mixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum Parametric {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Support `[scale, ∞)`, survival `(scale/x)^shape`.
    Pareto { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    /// Density proportional to `e^{-y}/(1+y²)` on `[0, ∞)`.
    ExpTail,
    /// Law of `scale·X + shift` for `X` a continuous base law, `scale != 0`.
    Affine { base: Box<Parametric>, scale: f64, shift: f64 },
    /// Finite mixture; at least one component is continuous.
    Mixture(Vec<(f64, Distribution)>),
}

/// A probability law on the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Discrete(DiscreteLaw),
    Parametric(Parametric),
}

impl From<DiscreteLaw> for Distribution {
    fn from(law: DiscreteLaw) -> Self {
        Distribution::Discrete(law)
    }
}

impl From<Parametric> for Distribution {
    fn from(p: Parametric) -> Self {
        Distribution::Parametric(p)
    }
}

/// The empirical law of a sample: weight `k/n` on each value seen `k` times.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    law: DiscreteLaw,
    sample_size: usize,
}

impl EmpiricalMeasure {
    pub fn law(&self) -> &DiscreteLaw {
        &self.law
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn into_distribution(self) -> Distribution {
        Distribution::Discrete(self.law)
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::Discrete(self.law.clone())
    }
}

pub fn empirical_from_sample(xs: &[f64]) -> Result<EmpiricalMeasure> {
    Ok(EmpiricalMeasure {
        law: DiscreteLaw::uniform(xs)?,
        sample_size: xs.len(),
    })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

// ---- ExpTail ---------------------------------------------------------------

/// `∫_0^∞ e^{-v} / (1 + (y+v)²) dv`, so that the survival function of the
/// ExpTail law is `e^{-y} h(y) / Z` with `Z = h(0)`.
fn exptail_h(y: f64) -> f64 {
    let tol = Tolerance { rel: 1e-13, abs: 0.0 };
    integrate(|v| (-v).exp() / (1.0 + (y + v) * (y + v)), 0.0, 60.0, tol).expect("smooth integrand")
}

fn exptail_norm() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| exptail_h(0.0))
}

fn exptail_pdf(y: f64) -> f64 {
    if y < 0.0 {
        0.0
    } else {
        (-y).exp() / (1.0 + y * y) / exptail_norm()
    }
}

fn exptail_ln_sf(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    -y + exptail_h(y).ln() - exptail_norm().ln()
}

fn exptail_cdf(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y <= 1.0 {
        let tol = Tolerance { rel: 1e-14, abs: 0.0 };
        integrate(|u| (-u).exp() / (1.0 + u * u), 0.0, y, tol).expect("smooth integrand") / exptail_norm()
    } else {
        1.0 - exptail_ln_sf(y).exp()
    }
}

/// Safeguarded Newton iteration for an increasing function `g` with
/// derivative `dg`, solving `g(y) = 0` inside `[lo, hi]`.
fn newton_bracketed<G, D>(g: G, dg: D, mut lo: f64, mut hi: f64, mut y: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    for _ in 0..100 {
        let v = g(y);
        if v == 0.0 {
            return y;
        }
        if v > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = dg(y);
        let mut next = y - v / d;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-15 * y.abs().max(1e-300) || hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            return next;
        }
        y = next;
    }
    y
}

fn exptail_lower_quantile(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 0.5 {
        return exptail_upper_quantile(1.0 - s);
    }
    // cdf(y) - s is increasing with derivative pdf(y); median ≈ 0.4
    let guess = (s * exptail_norm()).min(1.5);
    newton_bracketed(|y| exptail_cdf(y) - s, exptail_pdf, 0.0, 5.0, guess)
}

fn exptail_upper_quantile(s: f64) -> f64 {
    if s >= 1.0 {
        return 0.0;
    }
    if s > 0.5 {
        return exptail_lower_quantile(1.0 - s);
    }
    let target = s.ln();
    // -ln S(y) + ln s is increasing in y with derivative 1/((1+y²) h(y))
    let g = |y: f64| target - exptail_ln_sf(y);
    let dg = |y: f64| 1.0 / ((1.0 + y * y) * exptail_h(y));
    let guess = (-target).max(0.1);
    newton_bracketed(g, dg, 0.0, -target + 10.0, guess)
}

// ---- Parametric primitives ------------------------------------------------

impl Parametric {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::Domain(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})")));
        }
        Ok(Parametric::Normal { mean, sd })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("uniform needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Parametric::Uniform { lo, hi })
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0) {
            return Err(Error::Domain(format!("pareto needs shape, scale > 0, got ({shape}, {scale})")));
        }
        Ok(Parametric::Pareto { shape, scale })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!("lognormal needs sigma > 0, got ({mu}, {sigma})")));
        }
        Ok(Parametric::Lognormal { mu, sigma })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Parametric::Normal { mean, sd } => std_normal().cdf((x - mean) / sd),
            Parametric::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Parametric::Pareto { shape, scale } => {
                if x <= *scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
            Parametric::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal().cdf((x.ln() - mu) / sigma)
                }
            }
            Parametric::ExpTail => exptail_cdf(x),
            Parametric::Affine { base, scale, shift } => {
                let z = (x - shift) / scale;
                if *scale > 0.0 {
                    base.cdf(z)
                } else {
                    base.sf(z)
                }
            }
            Parametric::Mixture(parts) => parts.iter().map(|(w, d)| w * d.cdf(x)).sum(),
        }
    }

    /// Density of the absolutely continuous part; `None` when a mixture has
    /// a discrete component.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        Some(match self {
            Parametric::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Parametric::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Parametric::Pareto { shape, scale } => {
                if x < *scale {
                    0.0
                } else {
                    shape / scale * (scale / x).powf(shape + 1.0)
                }
            }
            Parametric::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            Parametric::ExpTail => exptail_pdf(x),
            Parametric::Affine { base, scale, shift } => base.pdf((x - shift) / scale)? / scale.abs(),
            Parametric::Mixture(parts) => {
                let mut total = 0.0;
                for (w, d) in parts {
                    match d {
                        Distribution::Parametric(p) => total += w * p.pdf(x)?,
                        Distribution::Discrete(_) => return None,
                    }
                }
                total
            }
        })
    }

    /// `P(X > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Parametric::Normal { mean, sd } => std_normal().sf((x - mean) / sd),
            Parametric::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Parametric::Pareto { shape, scale } => {
                if x <= *scale {
                    1.0
                } else {
                    (scale / x).powf(*shape)
                }
            }
            Parametric::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    std_normal().sf((x.ln() - mu) / sigma)
                }
            }
            Parametric::ExpTail => {
                if x <= 1.0 {
                    1.0 - exptail_cdf(x)
                } else {
                    exptail_ln_sf(x).exp()
                }
            }
            Parametric::Affine { base, scale, shift } => {
                let z = (x - shift) / scale;
                if *scale > 0.0 {
                    base.sf(z)
                } else {
                    base.cdf(z)
                }
            }
            Parametric::Mixture(parts) => parts.iter().map(|(w, d)| w * d.sf(x)).sum(),
        }
    }

    /// `quantile(s)`, accurate for small `s`.
    pub fn lower_quantile(&self, s: f64) -> f64 {
        match self {
            Parametric::Normal { mean, sd } => mean + sd * std_normal().inverse_cdf(s),
            Parametric::Uniform { lo, hi } => lo + s * (hi - lo),
            Parametric::Pareto { shape, scale } => scale * (-(-s).ln_1p() / shape).exp(),
            Parametric::Lognormal { mu, sigma } => (mu + sigma * std_normal().inverse_cdf(s)).exp(),
            Parametric::ExpTail => exptail_lower_quantile(s),
            Parametric::Affine { base, scale, shift } => {
                if *scale > 0.0 {
                    shift + scale * base.lower_quantile(s)
                } else {
                    shift + scale * base.upper_quantile(s)
                }
            }
            Parametric::Mixture(parts) => mixture_quantile(parts, s, false),
        }
    }

    /// `quantile(1 - s)`, accurate for small `s`.
    pub fn upper_quantile(&self, s: f64) -> f64 {
        match self {
            Parametric::Normal { mean, sd } => mean - sd * std_normal().inverse_cdf(s),
            Parametric::Uniform { lo, hi } => hi - s * (hi - lo),
            Parametric::Pareto { shape, scale } => scale * (-s.ln() / shape).exp(),
            Parametric::Lognormal { mu, sigma } => (mu - sigma * std_normal().inverse_cdf(s)).exp(),
            Parametric::ExpTail => exptail_upper_quantile(s),
            Parametric::Affine { base, scale, shift } => {
                if *scale > 0.0 {
                    shift + scale * base.upper_quantile(s)
                } else {
                    shift + scale * base.lower_quantile(s)
                }
            }
            Parametric::Mixture(parts) => mixture_quantile(parts, s, true),
        }
    }

    pub fn quantile(&self, t: f64) -> f64 {
        if t <= 0.5 {
            self.lower_quantile(t)
        } else {
            self.upper_quantile(1.0 - t)
        }
    }

    fn affine(&self, scale: f64, shift: f64) -> Distribution {
        if scale == 0.0 {
            return Distribution::point(shift);
        }
        let p = match self {
            Parametric::Normal { mean, sd } => Parametric::Normal {
                mean: scale * mean + shift,
                sd: scale.abs() * sd,
            },
            Parametric::Uniform { lo, hi } => {
                let (a, b) = (scale * lo + shift, scale * hi + shift);
                Parametric::Uniform { lo: a.min(b), hi: a.max(b) }
            }
            Parametric::Affine { base, scale: s0, shift: b0 } => Parametric::Affine {
                base: base.clone(),
                scale: scale * s0,
                shift: scale * b0 + shift,
            },
            Parametric::Mixture(parts) => {
                Parametric::Mixture(parts.iter().map(|(w, d)| (*w, d.affine(scale, shift))).collect())
            }
            other => Parametric::Affine {
                base: Box::new(other.clone()),
                scale,
                shift,
            },
        };
        Distribution::Parametric(p)
    }
}

/// Upper quantile of a mixture by bisection between the component quantiles.
fn mixture_quantile(parts: &[(f64, Distribution)], s: f64, upper: bool) -> f64 {
    let comp = |d: &Distribution| match d {
        Distribution::Discrete(law) => law.quantile(if upper { 1.0 - s } else { s }),
        Distribution::Parametric(p) => {
            if upper {
                p.upper_quantile(s)
            } else {
                p.lower_quantile(s)
            }
        }
    };
    let qs: Vec<f64> = parts.iter().map(|(_, d)| comp(d)).collect();
    let lo0 = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi0 = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo0.is_finite() {
        return lo0;
    }
    if !hi0.is_finite() {
        return hi0;
    }
    // "exceeds": F(y) > t for the lower view, S(y) < s for the upper view
    let exceeds = |y: f64| -> bool {
        if upper {
            parts.iter().map(|(w, d)| w * d.sf(y)).sum::<f64>() < s
        } else {
            parts.iter().map(|(w, d)| w * d.cdf(y)).sum::<f64>() > s
        }
    };
    let pad = 1e-12 * (1.0 + lo0.abs().max(hi0.abs()));
    let mut lo = lo0 - pad;
    let mut hi = hi0 + pad;
    while exceeds(lo) {
        lo -= 2.0 * (hi - lo).max(pad);
    }
    while !exceeds(hi) {
        hi += 2.0 * (hi - lo).max(pad);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

// ---- Distribution -----------------------------------------------------------

impl Distribution {
    pub fn point(c: f64) -> Self {
        Distribution::Discrete(DiscreteLaw::from_sorted_unchecked(vec![c], vec![1.0]))
    }

    /// Uniform weights over the given values.
    pub fn uniform_atoms(values: &[f64]) -> Result<Self> {
        Ok(Distribution::Discrete(DiscreteLaw::uniform(values)?))
    }

    pub fn discrete(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        Ok(Distribution::Discrete(DiscreteLaw::new(atoms, weights)?))
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Ok(Parametric::normal(mean, sd)?.into())
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Ok(Parametric::uniform(lo, hi)?.into())
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Ok(Parametric::pareto(shape, scale)?.into())
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Parametric::lognormal(mu, sigma)?.into())
    }

    pub fn exp_tail() -> Self {
        Parametric::ExpTail.into()
    }

    /// Finite mixture `Σ w_i d_i`. Purely discrete mixtures collapse to a
    /// single discrete law.
    pub fn mixture(parts: Vec<(f64, Distribution)>) -> Result<Self> {
        let parts: Vec<(f64, Distribution)> = parts.into_iter().filter(|(w, _)| *w != 0.0).collect();
        if parts.is_empty() {
            return Err(Error::Domain("mixture needs a component with positive weight".into()));
        }
        if let Some((w, _)) = parts.iter().find(|(w, _)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Domain(format!("mixture weight {w} must be positive")));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
        }
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().unwrap().1);
        }
        if parts.iter().all(|(_, d)| d.is_discrete()) {
            let mut atoms = Vec::new();
            let mut weights = Vec::new();
            for (w, d) in &parts {
                let law = d.as_discrete().unwrap();
                for (x, v) in law.iter() {
                    atoms.push(x);
                    weights.push(w * v);
                }
            }
            return Distribution::discrete(&atoms, &weights);
        }
        Ok(Distribution::Parametric(Parametric::Mixture(parts)))
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Distribution::Discrete(_))
    }

    pub fn as_discrete(&self) -> Option<&DiscreteLaw> {
        match self {
            Distribution::Discrete(law) => Some(law),
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(law) => law.cdf(x),
            Distribution::Parametric(p) => p.cdf(x),
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(law) => 1.0 - law.cdf(x),
            Distribution::Parametric(p) => p.sf(x),
        }
    }

    /// Upper quantile `inf{y : F(y) > t}` for `t ∈ [0, 1)`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("quantile level {t} must lie in [0, 1)")));
        }
        Ok(self.quantile_unchecked(t))
    }

    fn quantile_unchecked(&self, t: f64) -> f64 {
        match self {
            Distribution::Discrete(law) => law.quantile(t),
            Distribution::Parametric(p) => p.quantile(t),
        }
    }

    /// Push-forward under `x ↦ scale·x + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Distribution {
        match self {
            Distribution::Discrete(law) => Distribution::Discrete(law.affine(scale, shift)),
            Distribution::Parametric(p) => p.affine(scale, shift),
        }
    }

    pub fn shift(&self, m: f64) -> Distribution {
        self.affine(1.0, m)
    }

    /// Discrete approximation with `n` equally weighted atoms at the
    /// mid-quantiles `q((k - 1/2)/n)`. Discrete laws are returned unchanged.
    pub fn discretize(&self, n: usize) -> Result<DiscreteLaw> {
        match self {
            Distribution::Discrete(law) => Ok(law.clone()),
            Distribution::Parametric(p) => {
                if n == 0 {
                    return Err(Error::Domain("discretization needs at least one node".into()));
                }
                let values: Vec<f64> = (0..n).map(|k| p.quantile((k as f64 + 0.5) / n as f64)).collect();
                DiscreteLaw::uniform(&values)
            }
        }
    }

    /// `n` i.i.d. draws by inverse-cdf transform of a ChaCha8 uniform stream
    /// seeded with `seed`. Mixtures pick a component with the leading part of
    /// the uniform and invert the component cdf with the rescaled remainder.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: RngCore>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(open_uniform(rng))).collect()
    }

    /// Inverse-cdf transform of a single uniform in (0, 1).
    pub fn draw(&self, u: f64) -> f64 {
        match self {
            Distribution::Discrete(law) => law.quantile(u),
            Distribution::Parametric(Parametric::Mixture(parts)) => {
                let mut acc = 0.0;
                for (i, (w, d)) in parts.iter().enumerate() {
                    if u < acc + w || i + 1 == parts.len() {
                        let v = ((u - acc) / w).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                        return d.draw(v);
                    }
                    acc += w;
                }
                unreachable!("mixture weights cover (0, 1)")
            }
            Distribution::Parametric(p) => {
                if u < 0.5 {
                    p.lower_quantile(u)
                } else {
                    p.upper_quantile(1.0 - u)
                }
            }
        }
    }

    /// `∫ f dμ`. Exact sum for discrete laws; adaptive quadrature in
    /// quantile form otherwise, with divergence reported as an error.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.expect_dyn(&f)
    }

    fn expect_dyn(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        match self {
            Distribution::Discrete(law) => {
                let v: f64 = law.iter().map(|(x, w)| w * f(x)).sum();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Divergent("non-finite expectation".into()))
                }
            }
            Distribution::Parametric(Parametric::Mixture(parts)) => {
                let mut total = 0.0;
                for (w, d) in parts {
                    total += w * d.expect_dyn(f)?;
                }
                Ok(total)
            }
            Distribution::Parametric(Parametric::Uniform { lo, hi }) => {
                let tol = Tolerance { rel: 1e-12, abs: 1e-300 };
                Ok(integrate(f, *lo, *hi, tol)? / (hi - lo))
            }
            Distribution::Parametric(_) => self.quantile_integral(|_, q| f(q), 0.0, 1.0),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.expect(|x| x)
    }

    /// `∫_{t_lo}^{t_hi} f(t, q(t)) dt` with `q` the quantile function.
    /// Endpoints at 0 or 1 are approached through decade shells so that
    /// unbounded tails are integrated (or reported divergent) reliably.
    pub fn quantile_integral<F>(&self, f: F, t_lo: f64, t_hi: f64) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        if !(0.0 <= t_lo && t_lo <= t_hi && t_hi <= 1.0) {
            return Err(Error::Domain(format!("bad quantile range [{t_lo}, {t_hi}]")));
        }
        if t_lo == t_hi {
            return Ok(0.0);
        }
        let tol = Tolerance::default();
        match self {
            Distribution::Discrete(law) => {
                let mut total = 0.0;
                let mut prev = 0.0_f64;
                for (k, &c) in law.cumulative().iter().enumerate() {
                    let (a, b) = (prev.max(t_lo), c.min(t_hi));
                    if a < b {
                        let x = law.atoms()[k];
                        total += integrate(|t| f(t, x), a, b, tol)?;
                    }
                    prev = c;
                }
                Ok(total)
            }
            Distribution::Parametric(p) => {
                let mid = 0.5_f64.clamp(t_lo, t_hi);
                let mut total = 0.0;
                if t_lo < mid {
                    total += if t_lo == 0.0 {
                        integrate_to_zero(|s| f(s, p.lower_quantile(s)), mid, "lower tail")?
                    } else {
                        integrate(|t| f(t, p.lower_quantile(t)), t_lo, mid, tol)?
                    };
                }
                if mid < t_hi {
                    total += if t_hi == 1.0 {
                        integrate_to_zero(|s| f(1.0 - s, p.upper_quantile(s)), 1.0 - mid, "upper tail")?
                    } else {
                        integrate(|t| f(t, p.upper_quantile(1.0 - t)), mid, t_hi, tol)?
                    };
                }
                if total.is_finite() {
                    Ok(total)
                } else {
                    Err(Error::Divergent("quantile integral".into()))
                }
            }
        }
    }

    /// `∫_{ψ ≥ M} ψ dν`.
    pub fn tail_weight(&self, psi: &WeightFunction, level: f64) -> Result<f64> {
        if !(level > 0.0) {
            return Err(Error::Domain(format!("tail level {level} must be positive")));
        }
        match self {
            Distribution::Discrete(law) => Ok(law
                .iter()
                .map(|(x, w)| {
                    let v = psi.eval(x);
                    if v >= level {
                        w * v
                    } else {
                        0.0
                    }
                })
                .sum()),
            Distribution::Parametric(Parametric::Mixture(parts)) => {
                let mut total = 0.0;
                for (w, d) in parts {
                    total += w * d.tail_weight(psi, level)?;
                }
                Ok(total)
            }
            Distribution::Parametric(p) => {
                let r = match psi.level_radius(level) {
                    None => return Ok(0.0),
                    Some(r) => r,
                };
                if r == 0.0 {
                    return self.expect(|x| psi.eval(x));
                }
                let below = p.cdf(-r);
                let above = p.sf(r);
                let mut total = 0.0;
                if below > 0.0 {
                    total += integrate_to_zero(|s| psi.eval(p.lower_quantile(s)), below, "tail weight")?;
                }
                if above > 0.0 {
                    total += integrate_to_zero(|s| psi.eval(p.upper_quantile(s)), above, "tail weight")?;
                }
                Ok(total)
            }
        }
    }
}

/// Uniform on the open interval (0, 1) from the top 53 bits of a word.
pub fn open_uniform<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

impl fmt::Display for Parametric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parametric::Normal { mean, sd } => write!(f, "normal:m={mean},s={sd}"),
            Parametric::Uniform { lo, hi } => write!(f, "uniform:a={lo},b={hi}"),
            Parametric::Pareto { shape, scale } => write!(f, "pareto:shape={shape},scale={scale}"),
            Parametric::Lognormal { mu, sigma } => write!(f, "lognormal:m={mu},s={sigma}"),
            Parametric::ExpTail => write!(f, "exptail"),
            Parametric::Affine { base, scale, shift } => write!(f, "affine({base};{scale};{shift})"),
            Parametric::Mixture(parts) => {
                write!(f, "mixture(")?;
                for (i, (w, d)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{w}*{d}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Discrete(law) if law.len() == 1 => write!(f, "point:c={}", law.atoms()[0]),
            Distribution::Discrete(law) => {
                write!(f, "discrete[")?;
                for (i, (x, w)) in law.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}@{w}")?;
                }
                write!(f, "]")
            }
            Distribution::Parametric(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// Parses `point:c=..`, `discrete[x@w,...]`, `normal:m=..,s=..`,
    /// `uniform:a=..,b=..`, `pareto:shape=..,scale=..`, `lognormal:m=..,s=..`
    /// and `exptail`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("discrete[").and_then(|b| b.strip_suffix(']')) {
            let mut atoms = Vec::new();
            let mut weights = Vec::new();
            for item in body.split(',').map(str::trim).filter(|i| !i.is_empty()) {
                let (x, w) = item
                    .split_once('@')
                    .ok_or_else(|| Error::Parse(format!("discrete: expected value@weight, got '{item}'")))?;
                let num = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("discrete: '{}' is not a number", v.trim())))
                };
                atoms.push(num(x)?);
                weights.push(num(w)?);
            }
            return Distribution::discrete(&atoms, &weights);
        }
        let (tag, rest) = split_tag(s);
        let mut params = Params::parse(tag, rest)?;
        let d = match tag {
            "point" => Distribution::point(params.require("c")?),
            "normal" => Distribution::normal(params.or("m", 0.0), params.or("s", 1.0))?,
            "uniform" => Distribution::uniform(params.or("a", 0.0), params.or("b", 1.0))?,
            "pareto" => Distribution::pareto(params.require("shape")?, params.or("scale", 1.0))?,
            "lognormal" => Distribution::lognormal(params.or("m", 0.0), params.or("s", 1.0))?,
            "exptail" => Distribution::exp_tail(),
            other => return Err(Error::Parse(format!("unknown distribution '{other}'"))),
        };
        params.finish()?;
        Ok(d)
    }
}
