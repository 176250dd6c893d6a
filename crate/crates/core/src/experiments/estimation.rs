use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::process::ProcessSpec;
use super::report::{Cell, ExperimentReport};
use super::{interquartile_range, replication_seed, sample_quantile};
use crate::distributions::{empirical_from_sample, Distribution, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::metrics::{discretize_for_metric, prohorov};
use crate::orlicz::WeightFunction;
use crate::risk_measures::{plug_in_estimate, risk_functional, RiskMeasure};
use crate::spec::{split_tag, Params};

/// Sample size of the long path used as the reference value when the
/// stationary law has no closed form.
pub const LONG_RUN_REFERENCE: usize = 1_000_000;

/// Minimum number of replications for an estimator law.
pub const MIN_REPLICATIONS: usize = 100;

/// One-parameter perturbation `θ ↦ ν_θ` of a base law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contamination {
    /// `(1−θ)μ + θ·L` where `−L` is Pareto(shape, scale), so the extra
    /// mass sits in the loss tail.
    TailMix { shape: f64, scale: f64 },
    /// Law of `X + θ`.
    Shift,
    /// Law of `(1+θ)X`.
    Scale,
}

impl fmt::Display for Contamination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contamination::TailMix { shape, scale } => write!(f, "tailmix:shape={shape},scale={scale}"),
            Contamination::Shift => write!(f, "shift"),
            Contamination::Scale => write!(f, "scale"),
        }
    }
}

impl FromStr for Contamination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = split_tag(s);
        let mut params = Params::parse(tag, rest)?;
        let c = match tag {
            "tailmix" => {
                let shape = params.require("shape")?;
                let scale = params.or("scale", 1.0);
                if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
                    return Err(Error::Domain(format!("tail mix needs positive shape and scale, got ({shape}, {scale})")));
                }
                Contamination::TailMix { shape, scale }
            }
            "shift" => Contamination::Shift,
            "scale" => Contamination::Scale,
            other => return Err(Error::Parse(format!("unknown contamination path '{other}'"))),
        };
        params.finish()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationFamily {
    pub base: Distribution,
    pub path: Contamination,
}

impl ContaminationFamily {
    pub fn new(base: Distribution, path: Contamination) -> Self {
        ContaminationFamily { base, path }
    }

    /// `ν_θ`; `ν_0` is the base law itself.
    pub fn at(&self, theta: f64) -> Result<Distribution> {
        if theta == 0.0 {
            return Ok(self.base.clone());
        }
        match self.path {
            Contamination::TailMix { shape, scale } => {
                if !(0.0..=1.0).contains(&theta) {
                    return Err(Error::Domain(format!("tail-mix weight must lie in [0,1], got {theta}")));
                }
                let tail = Distribution::pareto(shape, scale)?.affine(-1.0, 0.0);
                Distribution::mixture(vec![(1.0 - theta, self.base.clone()), (theta, tail)])
            }
            Contamination::Shift => Ok(self.base.shift(theta)),
            Contamination::Scale => {
                if !(theta > -1.0) {
                    return Err(Error::Domain(format!("scale path needs θ > −1, got {theta}")));
                }
                Ok(self.base.affine(1.0 + theta, 0.0))
            }
        }
    }
}

/// Plug-in estimates of every measure in `rhos` on `m` independent samples
/// of size `n`; entry `[i][k]` belongs to measure `i`, replication `k`.
fn replicate(rhos: &[RiskMeasure], d: &Distribution, n: usize, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    let per_rep: Vec<Result<Vec<f64>>> = (0..m as u64)
        .into_par_iter()
        .map(|k| {
            let s = replication_seed(seed, k);
            let xs = d.sample(n, s);
            rhos.iter()
                .map(|rho| plug_in_estimate(rho, &xs).map_err(|e| e.with_context(&format!("replication seed {s}"))))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(m); rhos.len()];
    for rep in per_rep {
        for (i, v) in rep?.into_iter().enumerate() {
            out[i].push(v);
        }
    }
    Ok(out)
}

fn check_replications(m: usize) -> Result<()> {
    if m < MIN_REPLICATIONS {
        return Err(Error::Domain(format!(
            "an estimator law needs at least {MIN_REPLICATIONS} replications, got {m}"
        )));
    }
    Ok(())
}

/// Empirical law of `ρ̂_n` over `m` replications of i.i.d. samples from `d`.
pub fn estimator_law(rho: &RiskMeasure, d: &Distribution, n: usize, m: usize, seed: u64) -> Result<EmpiricalMeasure> {
    Ok(estimator_laws(std::slice::from_ref(rho), d, n, m, seed)?.remove(0))
}

/// Estimator laws of several measures computed on shared samples.
pub fn estimator_laws(rhos: &[RiskMeasure], d: &Distribution, n: usize, m: usize, seed: u64) -> Result<Vec<EmpiricalMeasure>> {
    check_replications(m)?;
    replicate(rhos, d, n, m, seed)?.iter().map(|v| empirical_from_sample(v)).collect()
}

fn stationary_reference(rho: &RiskMeasure, process: &ProcessSpec, seed: u64) -> Result<(f64, String)> {
    match process.stationary_law() {
        Some(law) => Ok((risk_functional(rho, &law)?, "stationary law".to_string())),
        None => {
            let path = process.simulate_path(LONG_RUN_REFERENCE, replication_seed(seed, u64::MAX));
            Ok((
                plug_in_estimate(rho, &path)?,
                format!("long-run estimate, n_ref = {LONG_RUN_REFERENCE}"),
            ))
        }
    }
}

/// Error quantiles of `ρ̂_n` against `ρ` of the stationary law, per `n`.
pub fn consistency_run(
    rho: &RiskMeasure,
    process: &ProcessSpec,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if reps == 0 {
        return Err(Error::Domain("consistency run needs at least one replication".into()));
    }
    let (reference, reference_kind) = stationary_reference(rho, process, seed)?;
    let mut report = ExperimentReport::new(
        "consistency",
        &[
            "n",
            "reference",
            "median_estimate",
            "median_error",
            "q25_error",
            "q75_error",
            "q90_error",
            "reps",
            "seed",
        ],
    );
    for (j, &n) in n_grid.iter().enumerate() {
        if n == 0 {
            return Err(Error::Domain("sample sizes must be positive".into()));
        }
        let row_seed = replication_seed(seed, j as u64);
        let estimates: Vec<Result<f64>> = (0..reps as u64)
            .into_par_iter()
            .map(|k| {
                let s = replication_seed(row_seed, k);
                plug_in_estimate(rho, &process.simulate_path(n, s))
                    .map_err(|e| e.with_context(&format!("replication seed {s}")))
            })
            .collect();
        let estimates = estimates.into_iter().collect::<Result<Vec<f64>>>()?;
        let errors: Vec<f64> = estimates.iter().map(|e| (e - reference).abs()).collect();
        report.push_row(vec![
            n.into(),
            reference.into(),
            sample_quantile(&estimates, 0.5).into(),
            sample_quantile(&errors, 0.5).into(),
            sample_quantile(&errors, 0.25).into(),
            sample_quantile(&errors, 0.75).into(),
            sample_quantile(&errors, 0.9).into(),
            reps.into(),
            row_seed.into(),
        ]);
    }
    report.set_meta("risk_measure", rho.to_string());
    report.set_meta("process", process.to_string());
    report.set_meta("reference_kind", reference_kind);
    report.set_meta("seed", seed);
    Ok(report)
}

/// Distances `d_ψ(μ, ν_θ)` and `d_Proh` between estimator laws under `μ` and
/// `ν_θ`, one row per `θ`.
///
/// The base estimator law uses its own seed, so the `θ = 0` row measures the
/// Monte Carlo noise floor. A `θ` whose law has a divergent ψ-integral is
/// reported with status `outside M1psi` and NaN distances.
pub fn robustness_run(
    rho: &RiskMeasure,
    family: &ContaminationFamily,
    psi: &WeightFunction,
    theta_grid: &[f64],
    n: usize,
    m: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_replications(m)?;
    let base_seed = replication_seed(seed, 0);
    let base_law = estimator_law(rho, &family.base, n, m, base_seed)?;
    let base_nodes = discretize_for_metric(&family.base)?;
    let base_integral = psi
        .integral(&family.base)
        .map_err(|e| e.with_context("the base law must have a finite ψ-integral"))?;

    let mut report = ExperimentReport::new(
        "robustness",
        &["theta", "d_psi", "d_prohorov_laws", "estimate_median", "estimate_iqr", "seed", "status"],
    );
    for (i, &theta) in theta_grid.iter().enumerate() {
        let s = replication_seed(seed, i as u64 + 1);
        let nu = family.at(theta)?;
        let integral = match psi.integral(&nu) {
            Ok(v) => v,
            Err(e) if e.is_divergence() => {
                report.push_row(vec![
                    theta.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    s.into(),
                    "outside M1psi".into(),
                ]);
                continue;
            }
            Err(e) => return Err(e),
        };
        let d_psi = prohorov(&base_nodes, &discretize_for_metric(&nu)?).value + (integral - base_integral).abs();
        let estimates = replicate(std::slice::from_ref(rho), &nu, n, m, s)?.remove(0);
        let law = empirical_from_sample(&estimates)?;
        let d_laws = prohorov(base_law.law(), law.law()).value;
        report.push_row(vec![
            theta.into(),
            d_psi.into(),
            d_laws.into(),
            sample_quantile(&estimates, 0.5).into(),
            interquartile_range(&estimates).into(),
            s.into(),
            "ok".into(),
        ]);
    }
    report.set_meta("risk_measure", rho.to_string());
    report.set_meta("base", family.base.to_string());
    report.set_meta("contamination", family.path.to_string());
    report.set_meta("psi", format!("{psi:?}"));
    report.set_meta("n", n as u64);
    report.set_meta("replications", m as u64);
    report.set_meta("noise_floor", 3.0 / (m as f64).sqrt());
    report.set_meta("seed", seed);
    report.set_meta("note", "distances are reported on the stated grid only");
    Ok(report)
}

/// Interquartile range of each estimator law over a `(θ, n)` grid, with
/// all measures evaluated on shared samples.
pub fn tail_sensitivity_run(
    rhos: &[RiskMeasure],
    family: &ContaminationFamily,
    theta_grid: &[f64],
    n_grid: &[usize],
    m: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_replications(m)?;
    let mut report = ExperimentReport::new(
        "tail-sensitivity",
        &["risk_measure", "theta", "n", "estimate_median", "estimate_iqr", "seed"],
    );
    for (i, &theta) in theta_grid.iter().enumerate() {
        let nu = family.at(theta)?;
        for (j, &n) in n_grid.iter().enumerate() {
            let s = replication_seed(replication_seed(seed, i as u64), j as u64);
            let all = replicate(rhos, &nu, n, m, s)?;
            for (rho, est) in rhos.iter().zip(&all) {
                report.push_row(vec![
                    Cell::Text(rho.to_string()),
                    theta.into(),
                    n.into(),
                    sample_quantile(est, 0.5).into(),
                    interquartile_range(est).into(),
                    s.into(),
                ]);
            }
        }
    }
    report.set_meta("base", family.base.to_string());
    report.set_meta("contamination", family.path.to_string());
    report.set_meta("replications", m as u64);
    report.set_meta("seed", seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::levy;

    #[test]
    fn neg_expectation_on_a_point_mass() {
        let law = estimator_law(&RiskMeasure::NegExpectation, &Distribution::point(2.5), 10, 100, 1).unwrap();
        assert_eq!(law.law().atoms(), &[-2.5]);
    }

    #[test]
    fn sample_median_concentrates() {
        let rho = RiskMeasure::var(0.5).unwrap();
        let d = Distribution::uniform(0.0, 1.0).unwrap();
        let law = estimator_law(&rho, &d, 1000, 500, 11).unwrap();
        assert!(law.law().atoms().iter().all(|x| (x + 0.5).abs() <= 0.1));
    }

    #[test]
    fn replication_floor_enforced() {
        let d = Distribution::point(0.0);
        assert!(matches!(
            estimator_law(&RiskMeasure::NegExpectation, &d, 10, 99, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn error_context_keeps_the_kind() {
        let err = Error::Divergent("moment".into()).with_context("replication seed 9");
        assert_eq!(err, Error::Divergent("moment (replication seed 9)".into()));
    }

    #[test]
    fn more_replications_stabilise_the_law() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let rho = RiskMeasure::NegExpectation;
        let laws: Vec<_> = [100, 400, 1600, 6400]
            .iter()
            .map(|&m| estimator_law(&rho, &d, 20, m, 5).unwrap())
            .collect();
        let steps: Vec<f64> = laws.windows(2).map(|w| levy(w[0].law(), w[1].law())).collect();
        assert!(steps[2] < steps[0], "{steps:?}");
    }

    #[test]
    fn contamination_paths() {
        let base = Distribution::normal(0.0, 1.0).unwrap();
        let fam = ContaminationFamily::new(base.clone(), "tailmix:shape=3,scale=1".parse().unwrap());
        assert_eq!(fam.at(0.0).unwrap(), base);
        let nu = fam.at(0.1).unwrap();
        assert!((nu.mean().unwrap() + 0.1 * 1.5).abs() < 1e-6);
        let shifted = ContaminationFamily::new(base.clone(), Contamination::Shift).at(2.0).unwrap();
        assert!((shifted.mean().unwrap() - 2.0).abs() < 1e-9);
        assert!(ContaminationFamily::new(base, Contamination::Scale).at(-1.0).is_err());
        for text in ["tailmix:shape=1.8,scale=2", "shift", "scale"] {
            let c: Contamination = text.parse().unwrap();
            assert_eq!(c.to_string().parse::<Contamination>().unwrap(), c);
        }
    }

    #[test]
    fn iid_consistency_example() {
        let p = ProcessSpec::iid(Distribution::normal(0.0, 1.0).unwrap());
        let r = consistency_run(&RiskMeasure::NegExpectation, &p, &[10_000], 20, 4).unwrap();
        assert!(r.numbers("median_error")[0] <= 0.03);
        assert_eq!(r.rows.len(), 1);
    }

    #[test]
    fn noise_floor_and_determinism() {
        let fam = ContaminationFamily::new(
            Distribution::normal(0.0, 1.0).unwrap(),
            Contamination::TailMix { shape: 3.0, scale: 1.0 },
        );
        let rho = RiskMeasure::avar(0.05).unwrap();
        let psi = WeightFunction::abs_power(1.0).unwrap();
        let a = robustness_run(&rho, &fam, &psi, &[0.0, 0.2], 200, 200, 8).unwrap();
        let b = robustness_run(&rho, &fam, &psi, &[0.0, 0.2], 200, 200, 8).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.numbers("d_psi")[0], 0.0);
        assert!(a.numbers("d_prohorov_laws")[0] <= 3.0 / 200f64.sqrt());
        assert!(a.numbers("d_psi")[1] > 0.0);
    }

    #[test]
    fn divergent_psi_integral_is_flagged() {
        let fam = ContaminationFamily::new(
            Distribution::normal(0.0, 1.0).unwrap(),
            Contamination::TailMix { shape: 0.8, scale: 1.0 },
        );
        let psi = WeightFunction::abs_power(1.0).unwrap();
        let r = robustness_run(&RiskMeasure::var(0.05).unwrap(), &fam, &psi, &[0.1], 50, 100, 1).unwrap();
        assert_eq!(r.rows[0][6], Cell::Text("outside M1psi".into()));
        assert!(r.numbers("d_psi")[0].is_nan());
    }
}
