//! Seeded Monte Carlo experiments: consistency of plug-in estimators,
//! robustness under contamination, Skorohod couplings, the non-Δ₂
//! construction and a uniform Glivenko–Cantelli probe.
//!
//! Replication `k` of an experiment seeded with `s` draws from
//! [`replication_seed`]`(s, k)`, and results are collected in index order,
//! so reports do not depend on thread scheduling.

mod coupling;
mod estimation;
mod process;
mod report;
mod ugc;

pub use coupling::{non_delta2_demo, skorohod_coupling, SKOROHOD_GRID};
pub use estimation::{
    consistency_run, estimator_law, estimator_laws, robustness_run, tail_sensitivity_run, Contamination,
    ContaminationFamily, LONG_RUN_REFERENCE, MIN_REPLICATIONS,
};
pub use process::{simulate_path, ProcessKind, ProcessSpec, DEFAULT_BURN_IN};
pub use report::{format_number, Cell, ExperimentReport, SCHEMA};
pub use ugc::ugc_probe;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `k` under master seed `seed`.
pub fn replication_seed(seed: u64, k: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(k.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Empirical `p`-quantile with linear interpolation between order
/// statistics (`xs` need not be sorted).
pub fn sample_quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, p)
}

fn sorted_quantile(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Interquartile range of a sample.
pub fn interquartile_range(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, 0.75) - sorted_quantile(&v, 0.25)
}
