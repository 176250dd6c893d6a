use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distributions::{open_uniform, Distribution, Parametric};
use crate::error::{Error, Result};
use crate::spec::{split_tag, Params};

pub const DEFAULT_BURN_IN: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    Iid(Distribution),
    /// `X_t = φ X_{t−1} + σ ε_t`
    Ar1 { phi: f64, sigma: f64 },
    /// `σ_t² = ω + α X_{t−1}² + β σ_{t−1}²`, `X_t = σ_t ε_t`
    Garch11 { omega: f64, alpha: f64, beta: f64 },
}

/// A stationary data-generating process with its burn-in length.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub burn_in: usize,
}

impl ProcessSpec {
    pub fn iid(d: Distribution) -> Self {
        ProcessSpec {
            kind: ProcessKind::Iid(d),
            burn_in: 0,
        }
    }

    pub fn ar1(phi: f64, sigma: f64) -> Result<Self> {
        if !(phi.abs() < 1.0 && sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("AR(1) needs |φ| < 1 and σ > 0, got ({phi}, {sigma})")));
        }
        Ok(ProcessSpec {
            kind: ProcessKind::Ar1 { phi, sigma },
            burn_in: DEFAULT_BURN_IN,
        })
    }

    pub fn garch11(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0) {
            return Err(Error::Domain(format!(
                "GARCH(1,1) needs ω > 0, α, β ≥ 0 and α + β < 1, got ({omega}, {alpha}, {beta})"
            )));
        }
        Ok(ProcessSpec {
            kind: ProcessKind::Garch11 { omega, alpha, beta },
            burn_in: DEFAULT_BURN_IN,
        })
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// The one-dimensional stationary law when it is known in closed form.
    pub fn stationary_law(&self) -> Option<Distribution> {
        match &self.kind {
            ProcessKind::Iid(d) => Some(d.clone()),
            ProcessKind::Ar1 { phi, sigma } => Distribution::normal(0.0, sigma / (1.0 - phi * phi).sqrt()).ok(),
            ProcessKind::Garch11 { .. } => None,
        }
    }

    /// Length-`n` path after burn-in, deterministic in `seed`.
    pub fn simulate_path(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.kind {
            ProcessKind::Iid(d) => d.sample_with(&mut rng, n),
            ProcessKind::Ar1 { phi, sigma } => {
                let normal = Parametric::normal(0.0, 1.0).expect("standard normal");
                let mut x = 0.0;
                let mut out = Vec::with_capacity(n);
                for t in 0..self.burn_in + n {
                    x = phi * x + sigma * normal.quantile(open_uniform(&mut rng));
                    if t >= self.burn_in {
                        out.push(x);
                    }
                }
                out
            }
            ProcessKind::Garch11 { omega, alpha, beta } => {
                let normal = Parametric::normal(0.0, 1.0).expect("standard normal");
                let mut var = omega / (1.0 - alpha - beta);
                let mut x: f64 = 0.0;
                let mut out = Vec::with_capacity(n);
                for t in 0..self.burn_in + n {
                    var = omega + alpha * x * x + beta * var;
                    x = var.sqrt() * normal.quantile(open_uniform(&mut rng));
                    if t >= self.burn_in {
                        out.push(x);
                    }
                }
                out
            }
        }
    }
}

/// `simulate_path(p, n, seed)`.
pub fn simulate_path(p: &ProcessSpec, n: usize, seed: u64) -> Vec<f64> {
    p.simulate_path(n, seed)
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProcessKind::Iid(d) => write!(f, "iid:{d}"),
            ProcessKind::Ar1 { phi, sigma } => write!(f, "ar1:phi={phi},s={sigma},burn={}", self.burn_in),
            ProcessKind::Garch11 { omega, alpha, beta } => {
                write!(f, "garch11:w={omega},a={alpha},b={beta},burn={}", self.burn_in)
            }
        }
    }
}

impl FromStr for ProcessSpec {
    type Err = Error;

    /// `iid:<distribution>`, `ar1:phi=..,s=..[,burn=..]` or
    /// `garch11:w=..,a=..,b=..[,burn=..]`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = split_tag(s);
        if tag == "iid" {
            return Ok(ProcessSpec::iid(rest.parse()?));
        }
        let mut params = Params::parse(tag, rest)?;
        let spec = match tag {
            "ar1" => ProcessSpec::ar1(params.require("phi")?, params.or("s", 1.0))?,
            "garch11" => ProcessSpec::garch11(params.require("w")?, params.require("a")?, params.require("b")?)?,
            other => return Err(Error::Parse(format!("unknown process '{other}'"))),
        };
        let burn = params.or("burn", DEFAULT_BURN_IN as f64);
        params.finish()?;
        if !(burn >= 0.0 && burn.fract() == 0.0) {
            return Err(Error::Domain(format!("burn-in must be a nonnegative integer, got {burn}")));
        }
        Ok(spec.with_burn_in(burn as usize))
    }
}
