//! Distances between laws on the real line: Lévy, Prohorov (with a coupling
//! witness), Wasserstein-p and the Prohorov ψ-metric.

pub mod flow;

use std::fmt;
use std::str::FromStr;

use crate::distributions::{DiscreteLaw, Distribution};
use crate::error::{Error, Result};
use crate::orlicz::WeightFunction;
use crate::quadrature::integrate_to_zero;

/// Number of mid-quantile nodes used when a parametric law enters a
/// Lévy or Prohorov computation.
pub const METRIC_NODES: usize = 1000;

/// Above this many atom pairs the Prohorov candidate lattice is not
/// materialized and ε is bisected instead.
const CANDIDATE_PAIR_LIMIT: usize = 4_000_000;

const PROHOROV_BISECTION_TOL: f64 = 1e-10;
const LEVY_TOL: f64 = 1e-12;

/// Discrete stand-in for `d`, used by the weak-topology metrics.
pub fn discretize_for_metric(d: &Distribution) -> Result<DiscreteLaw> {
    d.discretize(METRIC_NODES)
}

/// Joint law on `x × y` with mass off the closed ε-diagonal at most ε.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCertificate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Sparse entries `(i, j, mass)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub epsilon: f64,
}

impl CouplingCertificate {
    pub fn off_diagonal_mass(&self) -> f64 {
        self.entries
            .iter()
            .filter(|&&(i, j, _)| (self.x[i] - self.y[j]).abs() > self.epsilon)
            .map(|e| e.2)
            .sum()
    }

    /// Check marginals against the two laws and the off-diagonal bound.
    pub fn verify(&self, mu: &DiscreteLaw, nu: &DiscreteLaw) -> bool {
        const TOL: f64 = 1e-10;
        if self.x != mu.atoms() || self.y != nu.atoms() {
            return false;
        }
        let mut row = vec![0.0; self.x.len()];
        let mut col = vec![0.0; self.y.len()];
        for &(i, j, m) in &self.entries {
            if m < 0.0 {
                return false;
            }
            row[i] += m;
            col[j] += m;
        }
        let rows_ok = row.iter().zip(mu.weights()).all(|(a, b)| (a - b).abs() <= TOL);
        let cols_ok = col.iter().zip(nu.weights()).all(|(a, b)| (a - b).abs() <= TOL);
        rows_ok && cols_ok && self.off_diagonal_mass() <= self.epsilon + TOL
    }

    /// CSV rows `i,j,x_i,y_j,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,x_i,y_j,mass\n");
        for &(i, j, m) in &self.entries {
            out.push_str(&format!("{i},{j},{},{},{m}\n", self.x[i], self.y[j]));
        }
        out
    }
}

/// Prohorov distance together with its witness.
#[derive(Debug, Clone)]
pub struct ProhorovResult {
    pub value: f64,
    pub witness: CouplingCertificate,
}

/// Both Lévy inequalities at their worst points: `F_μ(x − ε) − F_ν(x)` peaks
/// at `x = a_i + ε`, and `F_ν(x) − F_μ(x + ε)` at `x = b_j`.
fn levy_feasible(mu: &DiscreteLaw, nu: &DiscreteLaw, eps: f64) -> bool {
    let lower = mu
        .atoms()
        .iter()
        .zip(mu.cumulative())
        .all(|(&a, &fa)| fa - eps <= nu.cdf(a + eps));
    let upper = nu
        .atoms()
        .iter()
        .zip(nu.cumulative())
        .all(|(&b, &gb)| gb <= mu.cdf(b + eps) + eps);
    lower && upper
}

/// Lévy distance between two discrete laws, by bisection on ε.
pub fn levy(mu: &DiscreteLaw, nu: &DiscreteLaw) -> f64 {
    if levy_feasible(mu, nu, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > LEVY_TOL {
        let mid = 0.5 * (lo + hi);
        if levy_feasible(mu, nu, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Greedy transport along the ε-band of two sorted atom sets. Returns the
/// matched entries and the unmatched remainders of both marginals.
fn band_matching(mu: &DiscreteLaw, nu: &DiscreteLaw, eps: f64) -> (Vec<(usize, usize, f64)>, Vec<f64>, Vec<f64>) {
    let (x, y) = (mu.atoms(), nu.atoms());
    let mut left: Vec<f64> = mu.weights().to_vec();
    let mut cap: Vec<f64> = nu.weights().to_vec();
    let mut entries = Vec::new();
    let mut ptr = 0usize;
    for i in 0..x.len() {
        let lo = y.partition_point(|&yj| x[i] - yj > eps);
        let hi = y.partition_point(|&yj| yj - x[i] <= eps);
        ptr = ptr.max(lo);
        while ptr < hi && left[i] > 0.0 {
            if cap[ptr] <= 0.0 {
                ptr += 1;
                continue;
            }
            let take = left[i].min(cap[ptr]);
            entries.push((i, ptr, take));
            left[i] -= take;
            cap[ptr] -= take;
            if cap[ptr] <= 0.0 {
                ptr += 1;
            }
        }
    }
    (entries, left, cap)
}

/// Minimal mass a coupling must put off the closed ε-diagonal.
pub fn off_diagonal_deficit(mu: &DiscreteLaw, nu: &DiscreteLaw, eps: f64) -> f64 {
    let (_, left, _) = band_matching(mu, nu, eps);
    left.iter().map(|v| v.max(0.0)).sum()
}

fn certificate(mu: &DiscreteLaw, nu: &DiscreteLaw, eps: f64) -> CouplingCertificate {
    let (mut entries, mut left, mut cap) = band_matching(mu, nu, eps);
    // pair the unmatched remainders north-west corner style
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < cap.len() {
        if left[i] <= 0.0 {
            i += 1;
            continue;
        }
        if cap[j] <= 0.0 {
            j += 1;
            continue;
        }
        let take = left[i].min(cap[j]);
        entries.push((i, j, take));
        left[i] -= take;
        cap[j] -= take;
    }
    entries.sort_by_key(|e| (e.0, e.1));
    CouplingCertificate {
        x: mu.atoms().to_vec(),
        y: nu.atoms().to_vec(),
        entries,
        epsilon: eps,
    }
}

fn pairwise_distances(mu: &DiscreteLaw, nu: &DiscreteLaw) -> Vec<f64> {
    let mut d: Vec<f64> = Vec::with_capacity(mu.len() * nu.len() + 1);
    d.push(0.0);
    for &a in mu.atoms() {
        for &b in nu.atoms() {
            d.push((a - b).abs());
        }
    }
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

/// On `[c_k, c_{k+1})` a step function `h` of ε is constant; the smallest
/// ε with `h(ε) ≤ ε` is `max(c_k, h(c_k))` for the first k where that is
/// below `c_{k+1}`. The predicate is monotone in k, so k is found by binary
/// search.
fn first_fixed_point<H: FnMut(f64) -> f64>(candidates: &[f64], mut h: H) -> f64 {
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if h(candidates[mid]) < candidates[mid + 1] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo].max(h(candidates[lo])).min(1.0)
}

/// Prohorov distance between discrete laws with a coupling certificate.
///
/// Uses the coupling characterization: ε is admissible iff some coupling
/// puts at most ε mass on `|x − y| > ε`.
pub fn prohorov(mu: &DiscreteLaw, nu: &DiscreteLaw) -> ProhorovResult {
    let value = if mu.len() * nu.len() <= CANDIDATE_PAIR_LIMIT {
        let candidates = pairwise_distances(mu, nu);
        first_fixed_point(&candidates, |e| off_diagonal_deficit(mu, nu, e))
    } else {
        let feasible = |e: f64| off_diagonal_deficit(mu, nu, e) <= e;
        if feasible(0.0) {
            0.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            while hi - lo > PROHOROV_BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    ProhorovResult {
        value,
        witness: certificate(mu, nu, value),
    }
}

/// Largest support for which [`prohorov_bruteforce`] enumerates subsets.
pub const BRUTEFORCE_MAX_SUPPORT: usize = 14;

/// Prohorov distance straight from `μ(A) ≤ ν(A^ε) + ε`, enumerating every
/// subset A of μ's support.
pub fn prohorov_bruteforce(mu: &DiscreteLaw, nu: &DiscreteLaw) -> Result<f64> {
    if mu.len() + nu.len() > BRUTEFORCE_MAX_SUPPORT {
        return Err(Error::TooLarge(format!(
            "brute-force Prohorov supports at most {BRUTEFORCE_MAX_SUPPORT} atoms combined, got {}",
            mu.len() + nu.len()
        )));
    }
    let (x, y) = (mu.atoms(), nu.atoms());
    let excess = |eps: f64| -> f64 {
        let reach: Vec<u32> = x
            .iter()
            .map(|&a| {
                y.iter()
                    .enumerate()
                    .filter(|(_, &b)| (a - b).abs() <= eps)
                    .fold(0u32, |m, (j, _)| m | (1 << j))
            })
            .collect();
        let mut worst: f64 = 0.0;
        for set in 1u32..(1 << x.len()) {
            let mut mass_a = 0.0;
            let mut hull = 0u32;
            for (i, r) in reach.iter().enumerate() {
                if set & (1 << i) != 0 {
                    mass_a += mu.weights()[i];
                    hull |= r;
                }
            }
            let mass_hull: f64 = (0..y.len()).filter(|j| hull & (1 << j) != 0).map(|j| nu.weights()[j]).sum();
            worst = worst.max(mass_a - mass_hull);
        }
        worst
    };
    let candidates = pairwise_distances(mu, nu);
    // scan linearly: this is the reference implementation
    for (k, &c) in candidates.iter().enumerate() {
        let h = excess(c);
        let next = candidates.get(k + 1).copied().unwrap_or(f64::INFINITY);
        if c.max(h) < next {
            return Ok(c.max(h).min(1.0));
        }
    }
    Ok(1.0)
}

/// Wasserstein-p distance `(∫_0^1 |q_μ − q_ν|^p dt)^{1/p}`.
pub fn wasserstein(mu: &Distribution, nu: &Distribution, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Wasserstein order must be >= 1, got {p}")));
    }
    let integral = match (mu, nu) {
        (Distribution::Discrete(a), Distribution::Discrete(b)) => {
            let (ca, cb) = (a.cumulative(), b.cumulative());
            let (mut i, mut j) = (0, 0);
            let mut prev = 0.0;
            let mut total = 0.0;
            while i < a.len() && j < b.len() {
                let next = ca[i].min(cb[j]);
                total += (a.atoms()[i] - b.atoms()[j]).abs().powf(p) * (next - prev);
                prev = next;
                if ca[i] <= next {
                    i += 1;
                }
                if cb[j] <= next {
                    j += 1;
                }
            }
            total
        }
        (Distribution::Discrete(law), other) | (other, Distribution::Discrete(law)) => {
            let mut total = 0.0;
            let mut prev = 0.0;
            for (k, &c) in law.cumulative().iter().enumerate() {
                let hi = if k + 1 == law.len() { 1.0 } else { c.min(1.0) };
                let x = law.atoms()[k];
                total += other.quantile_integral(|_, q| (q - x).abs().powf(p), prev, hi)?;
                prev = hi;
            }
            total
        }
        (Distribution::Parametric(a), Distribution::Parametric(b)) => {
            let lower = integrate_to_zero(
                |s| (a.lower_quantile(s) - b.lower_quantile(s)).abs().powf(p),
                0.5,
                "Wasserstein lower tail",
            )?;
            let upper = integrate_to_zero(
                |s| (a.upper_quantile(s) - b.upper_quantile(s)).abs().powf(p),
                0.5,
                "Wasserstein upper tail",
            )?;
            lower + upper
        }
    };
    if !integral.is_finite() {
        return Err(Error::Divergent(format!("order-{p} moment")));
    }
    Ok(integral.max(0.0).powf(1.0 / p))
}

/// The weak-topology part of the ψ-metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMetric {
    #[default]
    Prohorov,
    Levy,
}

impl FromStr for BaseMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "prohorov" => Ok(BaseMetric::Prohorov),
            "levy" => Ok(BaseMetric::Levy),
            other => Err(Error::Parse(format!("unknown base metric '{other}' (expected prohorov or levy)"))),
        }
    }
}

impl fmt::Display for BaseMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseMetric::Prohorov => "prohorov",
            BaseMetric::Levy => "levy",
        })
    }
}

/// Evaluate the chosen weak-topology metric, discretizing parametric laws.
pub fn base_distance(mu: &Distribution, nu: &Distribution, base: BaseMetric) -> Result<f64> {
    let a = discretize_for_metric(mu)?;
    let b = discretize_for_metric(nu)?;
    Ok(match base {
        BaseMetric::Prohorov => prohorov(&a, &b).value,
        BaseMetric::Levy => levy(&a, &b),
    })
}

/// `d_ψ(μ, ν) = d_Proh(μ, ν) + |∫ψ dμ − ∫ψ dν|`.
pub fn psi_metric(mu: &Distribution, nu: &Distribution, psi: &WeightFunction) -> Result<f64> {
    psi_metric_with(mu, nu, psi, BaseMetric::Prohorov)
}

/// [`psi_metric`] with a selectable weak-topology part.
pub fn psi_metric_with(mu: &Distribution, nu: &Distribution, psi: &WeightFunction, base: BaseMetric) -> Result<f64> {
    let gap = (psi.integral(mu)? - psi.integral(nu)?).abs();
    Ok(base_distance(mu, nu, base)? + gap)
}

/// ψ-weak convergence test: on the last quarter of the sequence both the
/// Lévy distance to the limit and the ψ-integral gap stay below `tol`.
pub fn psi_weak_converged(sequence: &[DiscreteLaw], limit: &Distribution, psi: &WeightFunction, tol: f64) -> Result<bool> {
    if sequence.is_empty() {
        return Ok(false);
    }
    let target = discretize_for_metric(limit)?;
    let target_integral = psi.integral(limit)?;
    let tail = (sequence.len() / 4).max(1);
    for law in &sequence[sequence.len() - tail..] {
        let gap = (psi.integral(&Distribution::Discrete(law.clone()))? - target_integral).abs();
        if gap >= tol || levy(law, &target) >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn point(c: f64) -> DiscreteLaw {
        DiscreteLaw::uniform(&[c]).unwrap()
    }

    fn law(xs: &[f64], ws: &[f64]) -> DiscreteLaw {
        DiscreteLaw::new(xs, ws).unwrap()
    }

    #[test]
    fn levy_examples() {
        assert_eq!(levy(&point(0.0), &point(0.0)), 0.0);
        assert_relative_eq!(levy(&point(0.0), &point(0.3)), 0.3, epsilon = 1e-9);
        assert_relative_eq!(levy(&point(0.0), &point(2.0)), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn prohorov_examples() {
        let mu = law(&[-1.0, 0.5, 2.0], &[0.2, 0.3, 0.5]);
        let r = prohorov(&mu, &mu);
        assert_eq!(r.value, 0.0);
        assert!(r.witness.verify(&mu, &mu));
        assert_relative_eq!(prohorov(&point(0.0), &point(0.3)).value, 0.3, epsilon = 1e-12);
        assert_eq!(prohorov(&point(0.0), &point(2.0)).value, 1.0);
        let half = law(&[0.0, 1.0], &[0.5, 0.5]);
        assert_relative_eq!(prohorov(&point(0.0), &half).value, 0.5, epsilon = 1e-12);
        assert_relative_eq!(prohorov_bruteforce(&point(0.0), &half).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(prohorov_bruteforce(&point(0.0), &point(0.3)).unwrap(), 0.3, epsilon = 1e-12);
        assert_eq!(prohorov_bruteforce(&point(0.0), &point(2.0)).unwrap(), 1.0);
        assert_eq!(prohorov_bruteforce(&point(1.0), &point(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn bruteforce_rejects_large_support() {
        let xs: Vec<f64> = (0..8).map(f64::from).collect();
        let a = DiscreteLaw::uniform(&xs).unwrap();
        assert!(matches!(prohorov_bruteforce(&a, &a), Err(Error::TooLarge(_))));
    }

    #[test]
    fn large_problem_uses_bisection_and_certifies() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let a = DiscreteLaw::uniform(&d.sample(2500, 1)).unwrap();
        let b = DiscreteLaw::uniform(&d.shift(0.1).sample(2500, 2)).unwrap();
        let r = prohorov(&a, &b);
        assert!(r.value > 0.0 && r.value < 0.2);
        assert!(r.witness.verify(&a, &b));
        // slightly smaller ε is infeasible
        assert!(off_diagonal_deficit(&a, &b, r.value - 1e-8) > r.value - 1e-8);
    }

    #[test]
    fn wasserstein_examples() {
        let w = |a: DiscreteLaw, b: DiscreteLaw, p| wasserstein(&a.into(), &b.into(), p).unwrap();
        assert_eq!(w(point(0.0), point(1.0), 1.0), 1.0);
        let u01 = DiscreteLaw::uniform(&[0.0, 1.0]).unwrap();
        let u02 = DiscreteLaw::uniform(&[0.0, 2.0]).unwrap();
        assert_relative_eq!(w(u01.clone(), u02, 1.0), 0.5, epsilon = 1e-15);
        assert_eq!(w(u01.clone(), u01, 3.0), 0.0);
        // W_2 between normals with equal variance is the mean gap
        let n0 = Distribution::normal(0.0, 1.0).unwrap();
        let n1 = Distribution::normal(0.7, 1.0).unwrap();
        assert_relative_eq!(wasserstein(&n0, &n1, 2.0).unwrap(), 0.7, epsilon = 1e-8);
        // W_1(U(0,1), δ_0) = 1/2
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert_relative_eq!(wasserstein(&u, &Distribution::point(0.0), 1.0).unwrap(), 0.5, epsilon = 1e-10);
        let heavy = Distribution::pareto(1.5, 1.0).unwrap();
        assert!(wasserstein(&heavy, &Distribution::point(0.0), 2.0).is_err());
    }

    #[test]
    fn psi_metric_examples() {
        let one = WeightFunction::One;
        let a = Distribution::discrete(&[0.0, 1.0], &[0.3, 0.7]).unwrap();
        let b = Distribution::discrete(&[0.2, 1.0], &[0.5, 0.5]).unwrap();
        let expected = prohorov(a.as_discrete().unwrap(), b.as_discrete().unwrap()).value;
        assert_eq!(psi_metric(&a, &b, &one).unwrap(), expected);
        let abs = WeightFunction::abs_power(1.0).unwrap();
        assert_relative_eq!(
            psi_metric(&Distribution::point(0.0), &Distribution::point(1.0), &abs).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(psi_metric(&a, &a, &abs).unwrap(), 0.0);
        let levy_based = psi_metric_with(&a, &b, &one, BaseMetric::Levy).unwrap();
        assert!(levy_based <= expected + 1e-9);
    }

    #[test]
    fn psi_weak_convergence_examples() {
        let abs = WeightFunction::abs_power(1.0).unwrap();
        let drift: Vec<DiscreteLaw> = (1..=100).map(|n| point(1.0 / n as f64)).collect();
        assert!(psi_weak_converged(&drift, &Distribution::point(0.0), &abs, 0.05).unwrap());
        let escape: Vec<DiscreteLaw> = (2..=100)
            .map(|n| {
                let n = n as f64;
                law(&[0.0, n], &[1.0 - 1.0 / n, 1.0 / n])
            })
            .collect();
        assert!(!psi_weak_converged(&escape, &Distribution::point(0.0), &abs, 0.05).unwrap());
        assert!(psi_weak_converged(&escape, &Distribution::point(0.0), &WeightFunction::One, 0.05).unwrap());
    }

    #[test]
    fn greedy_flow_matches_dinic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..12);
            let m = rng.random_range(1..12);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ys: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let wx: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let wy: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let (sx, sy): (f64, f64) = (wx.iter().sum(), wy.iter().sum());
            let wx: Vec<f64> = wx.iter().map(|w| w / sx).collect();
            let wy: Vec<f64> = wy.iter().map(|w| w / sy).collect();
            let (a, b) = (law(&xs, &wx), law(&ys, &wy));
            let eps = rng.random_range(0.0..2.0);
            let greedy = 1.0 - off_diagonal_deficit(&a, &b, eps);
            let exact = flow::band_max_flow(&a, &b, eps);
            assert!((greedy - exact).abs() < 1e-12, "{greedy} vs {exact}");
        }
    }

    fn arb_law(max: usize) -> impl Strategy<Value = DiscreteLaw> {
        prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..=max).prop_map(|pts| {
            let total: f64 = pts.iter().map(|p| p.1).sum();
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ws: Vec<f64> = pts.iter().map(|p| p.1 / total).collect();
            DiscreteLaw::new(&xs, &ws).unwrap()
        })
    }

    // atoms on a coarse grid so that distance ties and exact kinks occur
    fn arb_grid_law(max: usize) -> impl Strategy<Value = DiscreteLaw> {
        prop::collection::vec((-6i32..6, 1u32..5), 1..=max).prop_map(|pts| {
            let total: u32 = pts.iter().map(|p| p.1).sum();
            let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64 * 0.25).collect();
            let ws: Vec<f64> = pts.iter().map(|p| p.1 as f64 / total as f64).collect();
            DiscreteLaw::new(&xs, &ws).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn prohorov_matches_bruteforce(a in arb_law(7), b in arb_law(7)) {
            let fast = prohorov(&a, &b);
            let slow = prohorov_bruteforce(&a, &b).unwrap();
            prop_assert!((fast.value - slow).abs() <= 1e-6, "{} vs {}", fast.value, slow);
            prop_assert!(fast.witness.verify(&a, &b));
        }

        #[test]
        fn prohorov_matches_bruteforce_on_grid(a in arb_grid_law(7), b in arb_grid_law(7)) {
            let fast = prohorov(&a, &b).value;
            let slow = prohorov_bruteforce(&a, &b).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-12, "{} vs {}", fast, slow);
        }

        #[test]
        fn prohorov_dominates_levy(a in arb_law(20), b in arb_law(20)) {
            prop_assert!(prohorov(&a, &b).value >= levy(&a, &b) - 1e-9);
        }

        #[test]
        fn metric_axioms(a in arb_law(10), b in arb_law(10), c in arb_law(10)) {
            let abs = WeightFunction::abs_power(1.0).unwrap();
            let (da, db, dc): (Distribution, Distribution, Distribution) =
                (a.clone().into(), b.clone().into(), c.clone().into());
            let metrics: Vec<(&str, Box<dyn Fn(&Distribution, &Distribution) -> f64>, f64)> = vec![
                ("levy", Box::new(|x: &Distribution, y: &Distribution| {
                    levy(x.as_discrete().unwrap(), y.as_discrete().unwrap())
                }), 1e-9),
                ("prohorov", Box::new(|x: &Distribution, y: &Distribution| {
                    prohorov(x.as_discrete().unwrap(), y.as_discrete().unwrap()).value
                }), 2e-6),
                ("wasserstein", Box::new(|x: &Distribution, y: &Distribution| wasserstein(x, y, 1.5).unwrap()), 1e-9),
                ("psi", Box::new(move |x: &Distribution, y: &Distribution| psi_metric(x, y, &abs).unwrap()), 2e-6),
            ];
            for (name, d, tol) in &metrics {
                prop_assert!(d(&da, &da) <= 1e-12, "{} identity", name);
                prop_assert!((d(&da, &db) - d(&db, &da)).abs() <= 1e-9, "{} symmetry", name);
                prop_assert!(d(&da, &dc) <= d(&da, &db) + d(&db, &dc) + tol, "{} triangle", name);
            }
        }
    }
}
