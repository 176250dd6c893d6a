//! Numerical integration: globally adaptive Gauss–Kronrod (7/15) on finite
//! intervals, plus shell summation for integrals running into a singular
//! endpoint or out to infinity.
//!
//! Shell summation splits the tail into geometrically shrinking (or
//! growing) pieces and adds them until they stop mattering. When the shell
//! budget runs out, the decay of the last shells decides between a
//! convergent power-law tail (extrapolated) and a divergent one.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Magnitude beyond which a running integral is declared divergent.
pub const OVERFLOW_GUARD: f64 = 1e250;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-11, abs: 1e-300 }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Integrate `f` over the finite interval `[a, b]`.
///
/// Endpoints are never evaluated, so integrable endpoint singularities are
/// tolerated. A non-finite integrand value is reported as divergence.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}] must be finite")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    struct Piece {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    let (v, e) = gk15(&mut f, lo, hi);
    let mut pieces = vec![Piece { a: lo, b: hi, value: v, err: e }];
    let mut total = v;
    let mut total_err = e;

    for _ in 0..2000 {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Divergent("non-finite integrand".into()));
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            break;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval exhausted at machine precision
            pieces.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        pieces.push(Piece { a: p.a, b: mid, value: v1, err: e1 });
        pieces.push(Piece { a: mid, b: p.b, value: v2, err: e2 });
    }
    // recompute to shed accumulated rounding from the incremental updates
    let total: f64 = pieces.iter().map(|p| p.value).sum();
    if !total.is_finite() {
        return Err(Error::Divergent("non-finite integrand".into()));
    }
    Ok(sign * total)
}

/// Sum the contributions produced by `shell(k)` for k = 0, 1, 2, ...
///
/// `shell` returns `None` once the domain is exhausted at floating-point
/// resolution. Stops when two consecutive shells are negligible against the
/// running sum. If the shells run out first, fits `|c_k| ~ C k^{-a}` on the
/// last half and either extrapolates the tail (a > 1.1) or reports
/// divergence.
pub fn sum_shells<F>(mut shell: F, what: &str) -> Result<f64>
where
    F: FnMut(usize) -> Option<Result<f64>>,
{
    const NEGLIGIBLE: f64 = 1e-15;
    let mut sum = 0.0;
    let mut contributions: Vec<f64> = Vec::new();
    let mut quiet = 0usize;
    let mut k = 0usize;
    loop {
        let c = match shell(k) {
            None => break,
            Some(Ok(c)) => c,
            Some(Err(Error::Divergent(_))) => {
                return Err(Error::Divergent(what.to_string()));
            }
            Some(Err(e)) => return Err(e),
        };
        sum += c;
        if !sum.is_finite() || sum.abs() > OVERFLOW_GUARD {
            return Err(Error::Divergent(what.to_string()));
        }
        contributions.push(c);
        if c.abs() <= NEGLIGIBLE * sum.abs() || (c == 0.0 && sum == 0.0 && k >= 8) {
            quiet += 1;
            if quiet >= 2 && k >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        k += 1;
    }

    // Shell budget exhausted: classify the decay of the tail.
    let n = contributions.len();
    if n < 8 {
        return Ok(sum);
    }
    let start = n / 2;
    let pts: Vec<(f64, f64)> = contributions[start..]
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 0.0)
        .map(|(i, c)| (((start + i + 1) as f64).ln(), c.abs().ln()))
        .collect();
    if pts.len() < 4 {
        return Ok(sum);
    }
    let (slope, intercept) = least_squares(&pts);
    let decay = -slope;
    if decay > 1.1 {
        let last = n as f64;
        let tail = intercept.exp() * last.powf(1.0 - decay) / (decay - 1.0);
        let sign = contributions[n - 1].signum();
        Ok(sum + sign * tail)
    } else {
        Err(Error::Divergent(what.to_string()))
    }
}

/// Ordinary least squares fit y = slope * x + intercept.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `∫_0^{s0} h(s) ds` where `h` may be singular at 0, using decade shells
/// `[s0·10^{-(k+1)}, s0·10^{-k}]`.
pub fn integrate_to_zero<F: FnMut(f64) -> f64>(mut h: F, s0: f64, what: &str) -> Result<f64> {
    if s0 <= 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance::default();
    sum_shells(
        |k| {
            let hi = s0 * 10f64.powi(-(k as i32));
            let lo = hi * 0.1;
            if lo < 1e-300 {
                return None;
            }
            Some(integrate(&mut h, lo, hi, tol))
        },
        what,
    )
}

/// `∫_{start}^{∞} h(y) dy` with doubling shells.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut h: F, start: f64, what: &str) -> Result<f64> {
    let tol = Tolerance::default();
    sum_shells(
        |k| {
            if k > 1000 {
                return None;
            }
            let lo = start + (2f64.powi(k as i32) - 1.0);
            let hi = start + (2f64.powi(k as i32 + 1) - 1.0);
            if !hi.is_finite() {
                return None;
            }
            Some(integrate(&mut h, lo, hi, tol))
        },
        what,
    )
}

/// Bisection for a root of a monotone function given a sign-changing
/// bracket. Stops when the bracket is below `tol` (absolute).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
