//! Goodness-of-fit statistics used by the validation suites and tests.

use crate::error::{Error, Result};
use crate::numerics::upper_gamma_regularized;

/// Kolmogorov-Smirnov test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > t)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.18 {
        // Theta-function form converges fast for small arguments.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t);
        let s: f64 = (1..=6)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * c).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=20)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * t * t).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn stephens(n_eff: f64, d: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS distance of `data` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> Result<KsResult> {
    if data.is_empty() {
        return Err(Error::domain("KS test needs at least one observation"));
    }
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: stephens(n, d),
    })
}

/// Two-sample KS distance with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("KS test needs two non-empty samples"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: stephens(n * m / (n + m), d),
    })
}

/// Pearson chi-square goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// `Σ (O - E)² / E` with `df = cells - 1 - fitted_params`.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], fitted_params: usize) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.len() < fitted_params + 2 {
        return Err(Error::domain("chi-square needs matching cell counts and df >= 1"));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("expected counts must be positive"));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = observed.len() - 1 - fitted_params;
    Ok(ChiSquareResult {
        statistic: stat,
        df,
        p_value: upper_gamma_regularized(0.5 * df as f64, 0.5 * stat)?,
    })
}

/// Sample mean and unbiased standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = crate::numerics::compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = crate::numerics::compensated_sum(xs.iter().map(|x| (x - m) * (x - m))) / (n - 1.0);
    (m, v.sqrt())
}
