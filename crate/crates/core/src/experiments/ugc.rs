use rayon::prelude::*;

use super::replication_seed;
use super::report::ExperimentReport;
use crate::distributions::{empirical_from_sample, Distribution};
use crate::error::{Error, Result};
use crate::metrics::{discretize_for_metric, prohorov};
use crate::orlicz::WeightFunction;

/// Monte Carlo estimate of `sup_ν P[d_ψ(ν, m̂_n) ≥ δ]` over a finite family,
/// one row per `n`.
pub fn ugc_probe(
    family: &[Distribution],
    psi: &WeightFunction,
    n_grid: &[usize],
    m: usize,
    delta: f64,
    seed: u64,
) -> Result<ExperimentReport> {
    if family.is_empty() || m == 0 {
        return Err(Error::Domain("the probe needs a nonempty family and at least one replication".into()));
    }
    let members = family
        .iter()
        .map(|nu| Ok((discretize_for_metric(nu)?, psi.integral(nu)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("ugc", &["n", "sup_probability", "argmax", "replications"]);
    for (j, &n) in n_grid.iter().enumerate() {
        if n == 0 {
            return Err(Error::Domain("sample sizes must be positive".into()));
        }
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, (nu, (nodes, integral))) in family.iter().zip(&members).enumerate() {
            let s = replication_seed(replication_seed(seed, j as u64), i as u64);
            let hits: Vec<Result<bool>> = (0..m as u64)
                .into_par_iter()
                .map(|k| {
                    let xs = nu.sample(n, replication_seed(s, k));
                    let emp = empirical_from_sample(&xs)?.into_distribution();
                    let gap = (psi.integral(&emp)? - integral).abs();
                    let d = prohorov(nodes, emp.as_discrete().expect("empirical law")).value + gap;
                    Ok(d >= delta)
                })
                .collect();
            let count = hits.into_iter().collect::<Result<Vec<bool>>>()?.into_iter().filter(|h| *h).count();
            let p = count as f64 / m as f64;
            if p > best.0 {
                best = (p, i);
            }
        }
        report.push_row(vec![n.into(), best.0.into(), best.1.into(), m.into()]);
    }
    report.set_meta("family_size", family.len() as u64);
    report.set_meta("psi", format!("{psi:?}"));
    report.set_meta("delta", delta);
    report.set_meta("seed", seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_family_never_deviates() {
        let r = ugc_probe(
            &[Distribution::point(0.0)],
            &WeightFunction::abs_power(1.0).unwrap(),
            &[10, 100],
            50,
            0.01,
            3,
        )
        .unwrap();
        assert_eq!(r.numbers("sup_probability"), vec![0.0, 0.0]);
    }

    #[test]
    fn escaping_family_does_not_decay() {
        let family: Vec<Distribution> = [10.0, 100.0, 1000.0, 10_000.0]
            .iter()
            .map(|&k| Distribution::discrete(&[0.0, k], &[1.0 - 1.0 / k, 1.0 / k]).unwrap())
            .collect();
        let r = ugc_probe(&family, &WeightFunction::abs_power(1.0).unwrap(), &[100, 1000], 100, 0.5, 4).unwrap();
        assert!(r.numbers("sup_probability").iter().all(|p| *p > 0.8));
    }
}
