use serde::Serialize;

use crate::distributions::{forward_gamma_cdf, sample_forward_gamma, GammaParams, RngState};
use crate::error::{Error, Result};
use crate::processes::{sample_syst_binomial, DensityEvaluator, ProcessSpec};
use crate::stats::ks_one_sample;

pub const DEFAULT_CURVE_X: f64 = 0.4;
pub const DEFAULT_CURVE_RESOLUTION: usize = 200;

/// Joint inclusion density along one axis.
///
/// For lag-stationary processes without a fixed point (`x_fixed = None`)
/// the abscissa is the lag `h = |x - y|`; otherwise it is `y` with `x` held
/// at `x_fixed`. Singular values are `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub label: String,
    pub x_fixed: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

/// Samples `π⁽²⁾` at the interior grid `k / resolution`, `k = 1 .. resolution - 1`.
/// Fixed-size processes need `x_fixed`; the Poisson families plot against the lag.
pub fn density_curve(spec: &ProcessSpec, x_fixed: Option<f64>, resolution: usize) -> Result<DensityCurve> {
    if resolution < 2 {
        return Err(Error::domain(format!("resolution must be at least 2, got {resolution}")));
    }
    let ev = DensityEvaluator::new(*spec)?;
    if !ev.has_joint_density() {
        return Err(Error::domain(format!("{spec}: no joint inclusion density")));
    }
    let grid = (1..resolution).map(|k| k as f64 / resolution as f64);
    let singular_as_inf = |v: Result<f64>| match v {
        Ok(v) => Ok(v),
        Err(Error::Singular(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let points = match spec {
        ProcessSpec::SystBinomial { .. } | ProcessSpec::Binomial { .. } => {
            let x = x_fixed.ok_or_else(|| {
                Error::domain(format!("{spec}: the curve needs a fixed x coordinate"))
            })?;
            grid.map(|y| Ok((y, singular_as_inf(ev.second_order(x, y))?)))
                .collect::<Result<Vec<_>>>()?
        }
        _ => match x_fixed {
            Some(x) => grid
                .map(|y| Ok((y, singular_as_inf(ev.second_order(x, y))?)))
                .collect::<Result<Vec<_>>>()?,
            None => grid
                .map(|h| Ok((h, singular_as_inf(ev.second_order_lag(h))?)))
                .collect::<Result<Vec<_>>>()?,
        },
    };
    Ok(DensityCurve {
        label: spec.to_string(),
        x_fixed,
        points,
    })
}

/// Convergence diagnostics at one value of `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    /// Pooled SD of the circular gaps of `SystBinomial(n, r)`.
    pub interarrival_sd: f64,
    /// `√(r²(n-1) / ((rn)²(rn+1)))`, the SD of a `Beta(r, r(n-1))` gap.
    pub interarrival_sd_theory: f64,
    /// Median over replicates of `max_i |gap_i - 1/n|`.
    pub median_max_deviation: f64,
    /// KS distance of sampled `ForG(r, rn)` first points to `U(0, 1/n)`.
    pub first_point_ks: f64,
    /// The same distance computed from the exact CDF.
    pub first_point_ks_exact: f64,
}

/// Exact `sup |F_ForG(x) - n x|` over `[0, 1/n]`, on a fine grid plus the tail.
fn forg_uniform_distance(p: &GammaParams, n: usize) -> Result<f64> {
    let width = 1.0 / n as f64;
    let m = 20_000;
    let mut d = 0.0f64;
    for k in 1..=m {
        let x = width * k as f64 / m as f64;
        d = d.max((forward_gamma_cdf(p, x)? - x / width).abs());
    }
    Ok(d)
}

/// How fast `SystBinomial(n, r)` and the `SystPoisson` first point approach
/// systematic sampling as `r` grows.
pub fn convergence_probe(n: usize, r_schedule: &[f64], replicates: usize, seed: u64) -> Result<Vec<ConvergenceRow>> {
    if n < 2 || replicates < 2 {
        return Err(Error::domain("convergence probe needs n >= 2 and at least 2 replicates"));
    }
    let nf = n as f64;
    let mut rows = Vec::with_capacity(r_schedule.len());
    for (j, &r) in r_schedule.iter().enumerate() {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!("r must be positive, got {r}")));
        }
        let mut rng = RngState::new(seed, 2 * j as u64);
        let mut gaps = Vec::with_capacity(replicates * n);
        let mut maxdev = Vec::with_capacity(replicates);
        for _ in 0..replicates {
            let s = sample_syst_binomial(&mut rng, n, r)?;
            let g = s.circular_gaps();
            maxdev.push(g.iter().map(|x| (x - 1.0 / nf).abs()).fold(0.0, f64::max));
            gaps.extend(g);
        }
        maxdev.sort_by(f64::total_cmp);
        let (_, sd) = crate::stats::mean_sd(&gaps);

        let p = GammaParams::new(r, r * nf)?;
        let mut rng = RngState::new(seed, 2 * j as u64 + 1);
        let firsts: Vec<f64> = (0..replicates).map(|_| sample_forward_gamma(&mut rng, &p)).collect();
        let ks = ks_one_sample(&firsts, |x| (x * nf).clamp(0.0, 1.0))?;

        let rn = r * nf;
        rows.push(ConvergenceRow {
            r,
            interarrival_sd: sd,
            interarrival_sd_theory: (r * r * (nf - 1.0) / (rn * rn * (rn + 1.0))).sqrt(),
            median_max_deviation: maxdev[replicates / 2],
            first_point_ks: ks.statistic,
            first_point_ks_exact: forg_uniform_distance(&p, n)?,
        });
    }
    Ok(rows)
}
