use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::ExperimentReport;
use crate::distributions::{open_uniform, DiscreteLaw, Distribution, Parametric};
use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_norm, YoungFunction};
use crate::quadrature::{bisect, integrate, integrate_to_infinity, Tolerance, OVERFLOW_GUARD};

/// Number of shared uniform nodes `t_k = (k − ½)/N` in the comonotone coupling.
pub const SKOROHOD_GRID: usize = 10_000;

/// Luxemburg norm of `|q_{μ_n}(U) − q_{μ}(U)|` for each law in `laws`, with
/// `U` uniform on the shared grid of [`SKOROHOD_GRID`] nodes.
pub fn skorohod_coupling(laws: &[DiscreteLaw], limit: &Distribution, psi: &YoungFunction) -> Result<Vec<f64>> {
    let grid: Vec<f64> = (0..SKOROHOD_GRID)
        .map(|k| (k as f64 + 0.5) / SKOROHOD_GRID as f64)
        .collect();
    let limit_q = grid.iter().map(|&t| limit.quantile(t)).collect::<Result<Vec<f64>>>()?;
    laws.iter()
        .map(|law| {
            let diffs: Vec<f64> = grid.iter().zip(&limit_q).map(|(&t, q0)| (law.quantile(t) - q0).abs()).collect();
            luxemburg_norm(&Distribution::uniform_atoms(&diffs)?, psi)
        })
        .collect()
}

const TOL: Tolerance = Tolerance { rel: 1e-10, abs: 0.0 };
const MONTE_CARLO_DRAWS: usize = 100_000;

/// `ln f(y) = −y − ln(1 + y²) − ln Z` for the ExpTail density on `y ≥ 0`.
fn exptail_ln_pdf(y: f64) -> f64 {
    let ln_norm = -Parametric::ExpTail.pdf(0.0).expect("continuous law").ln();
    -y - y.mul_add(y, 1.0).ln() - ln_norm
}

/// `(e^{c(y−s)} − 1) f(y)` with the exponentials combined, so nothing
/// overflows or underflows far in the tail.
fn psi_weighted_density(c: f64, s: f64, y: f64) -> f64 {
    let ln_f = exptail_ln_pdf(y);
    (c * (y - s) + ln_f).exp() - ln_f.exp()
}

/// `∫_a^b Ψ(c(y − s)) f(y) dy` for the ExpTail density `f`.
fn exp_moment_piece(c: f64, s: f64, a: f64, b: f64) -> Result<f64> {
    integrate(|y| psi_weighted_density(c, s, y), a, b, TOL)
}

/// `E[Ψ(c·((Y − s)⁺ ∧ a))]` for Ψ(x) = e^x − 1.
fn truncated_moment(y_law: &Parametric, c: f64, s: f64, a: f64) -> Result<f64> {
    let body = exp_moment_piece(c, s, s, s + a)?;
    Ok(body + (c * a).exp_m1() * y_law.sf(s + a))
}

/// The truncation construction for a Young function without Δ₂.
///
/// `Y` has the ExpTail law, for which `E[Ψ(Y)] < ∞` and `E[Ψ(2Y)] = ∞`
/// under `Ψ(x) = e^x − 1`. For each `n ≤ n_max` the level `a_n` is the
/// smallest `a` with `2E[Ψ(2(Y ∧ a))] ≥ n + Ψ(4n)`, and `X_n = (Y − n)⁺ ∧ a_n`.
/// Rows report `E[Ψ(|X_n|)]` and `E[Ψ(4|X_n|)]` by quadrature plus a Monte
/// Carlo cross-check of the first. Functions satisfying Δ₂ short-circuit
/// with an empty table.
pub fn non_delta2_demo(psi: &YoungFunction, n_max: usize, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "non-delta2",
        &["n", "a_n", "moment", "moment_mc", "moment_4x", "bound_ok"],
    );
    report.set_meta("psi", psi.to_string());
    report.set_meta("seed", seed);
    if psi.delta2_analytic() {
        report.set_meta("status", "delta2 holds");
        return Ok(report);
    }
    if *psi != YoungFunction::Exponential {
        return Err(Error::Unsupported(format!(
            "the truncation construction is implemented for exp(x) − 1, got {psi}"
        )));
    }
    let y_law = Parametric::ExpTail;
    let finite = integrate_to_infinity(|y| psi_weighted_density(1.0, 0.0, y), 0.0, "E[Ψ(Y)]")?;
    let doubled = integrate_to_infinity(|y| psi_weighted_density(2.0, 0.0, y), 0.0, "E[Ψ(2Y)]");
    match doubled {
        Err(e) if e.is_divergence() => {}
        Err(e) => return Err(e),
        Ok(v) => {
            return Err(Error::Domain(format!("E[Ψ(2Y)] should diverge but evaluated to {v}")));
        }
    }
    report.set_meta("e_psi_y", finite);
    report.set_meta("e_psi_2y", "divergent");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..MONTE_CARLO_DRAWS)
        .map(|_| y_law.quantile(open_uniform(&mut rng)))
        .collect();

    let mut status = "complete".to_string();
    for n in 1..=n_max {
        let nf = n as f64;
        let target = nf + (4.0 * nf).exp_m1();
        let excess = |a: f64| 2.0 * truncated_moment(&y_law, 2.0, 0.0, a).unwrap_or(f64::INFINITY) - target;
        let mut hi = 1.0;
        while excess(hi) < 0.0 {
            hi *= 2.0;
            if (2.0 * hi).exp() > OVERFLOW_GUARD {
                break;
            }
        }
        if excess(hi) < 0.0 {
            status = format!("truncation limit reached; largest verified n = {}", n - 1);
            break;
        }
        let mut a = bisect(excess, 0.0, hi, 1e-10 * hi);
        while excess(a) < 0.0 {
            a += 1e-10 * hi;
        }
        let moment = truncated_moment(&y_law, 1.0, nf, a)?;
        let moment_4x = truncated_moment(&y_law, 4.0, nf, a)?;
        let moment_mc =
            draws.iter().map(|&y| (y - nf).max(0.0).min(a).exp_m1()).sum::<f64>() / MONTE_CARLO_DRAWS as f64;
        report.push_row(vec![
            n.into(),
            a.into(),
            moment.into(),
            moment_mc.into(),
            moment_4x.into(),
            (if moment_4x >= nf { "true" } else { "false" }).into(),
        ]);
    }
    report.set_meta("status", status);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(xs: &[f64], ws: &[f64]) -> DiscreteLaw {
        DiscreteLaw::new(xs, ws).unwrap()
    }

    #[test]
    fn shrinking_spread_norms() {
        let laws: Vec<DiscreteLaw> = (1..=5)
            .map(|n| DiscreteLaw::uniform(&[-1.0 - 1.0 / n as f64, 1.0 + 1.0 / n as f64]).unwrap())
            .collect();
        let limit = Distribution::uniform_atoms(&[-1.0, 1.0]).unwrap();
        let norms = skorohod_coupling(&laws, &limit, &YoungFunction::Power { p: 2.0 }).unwrap();
        for (n, v) in norms.iter().enumerate() {
            let expect = 1.0 / (n + 1) as f64 / 2f64.sqrt();
            assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
        }
    }

    #[test]
    fn identical_laws_give_zero() {
        let limit = law(&[0.0, 1.0, 3.0], &[0.2, 0.5, 0.3]);
        let norms = skorohod_coupling(
            &[limit.clone(), limit.clone()],
            &Distribution::Discrete(limit),
            &YoungFunction::Power { p: 1.0 },
        )
        .unwrap();
        assert_eq!(norms, vec![0.0, 0.0]);
    }

    #[test]
    fn escaping_mass_keeps_the_norm() {
        let laws: Vec<DiscreteLaw> = [2.0, 4.0, 5.0, 10.0]
            .iter()
            .map(|&n| law(&[0.0, n], &[1.0 - 1.0 / n, 1.0 / n]))
            .collect();
        let norms = skorohod_coupling(&laws, &Distribution::point(0.0), &YoungFunction::Power { p: 1.0 }).unwrap();
        for v in norms {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_construction() {
        let r = non_delta2_demo(&YoungFunction::Exponential, 6, 1).unwrap();
        assert_eq!(r.rows.len(), 6);
        let m = r.numbers("moment");
        assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
        for (n, v) in r.numbers("moment_4x").iter().enumerate() {
            assert!(*v >= (n + 1) as f64);
        }
        let a = r.numbers("a_n");
        for (n, v) in a.iter().enumerate() {
            let four_n = 4.0 * (n + 1) as f64;
            assert!((v - four_n).abs() < 2.0 * four_n.ln() + 3.0, "a_{} = {v}", n + 1);
        }
        let mc = r.numbers("moment_mc");
        assert!((mc[0] - m[0]).abs() < 0.1 * m[0]);
    }

    #[test]
    fn delta2_short_circuits() {
        let r = non_delta2_demo(&YoungFunction::Power { p: 2.0 }, 8, 1).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.metadata["status"], "delta2 holds");
    }
}
