use serde::Serialize;

use super::function::IntegrableFunction;
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, normal_quantile};
use crate::processes::{DensityEvaluator, OrderedSample};

/// Which variance estimate drives the confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceChoice {
    Cordy,
    Syg,
}

/// Point estimate, variance estimates and normal-approximation interval for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub mean_hat: f64,
    /// `None` when the process has no joint density.
    pub var_hat_cordy: Option<f64>,
    /// `None` unless the process has fixed size and a joint density.
    pub var_hat_syg: Option<f64>,
    pub selected: VarianceChoice,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub sample_size: usize,
}

impl EstimateReport {
    pub fn selected_variance(&self) -> Option<f64> {
        match self.selected {
            VarianceChoice::Cordy => self.var_hat_cordy,
            VarianceChoice::Syg => self.var_hat_syg,
        }
    }

    pub fn covers(&self, target: f64) -> bool {
        matches!((self.ci_lo, self.ci_hi), (Some(lo), Some(hi)) if lo <= target && target <= hi)
    }
}

/// Expanded values `z(x_i) / π(x_i)` and first-order densities.
fn expansions(
    pts: &[f64],
    z: &IntegrableFunction,
    ev: &DensityEvaluator,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ys = Vec::with_capacity(pts.len());
    let mut pis = Vec::with_capacity(pts.len());
    for &x in pts {
        let p = ev.first_order(x)?;
        if !(p > 0.0) {
            return Err(Error::domain(format!("first-order density vanishes at {x}")));
        }
        ys.push(z.eval(x) / p);
        pis.push(p);
    }
    Ok((ys, pis))
}

/// `Σ z(x_i) / π(x_i)`; zero for an empty sample.
pub fn ht_mean(sample: &OrderedSample, z: &IntegrableFunction, ev: &DensityEvaluator) -> Result<f64> {
    let (ys, _) = expansions(sample.points(), z, ev)?;
    Ok(compensated_sum(ys.iter().copied()))
}

/// Both pairwise sums in one pass over `i < j`:
/// `Σ y_i y_j (1 - π_i π_j / π₂)` and `Σ (y_i - y_j)² (π_i π_j - π₂) / π₂`.
fn pair_sums(pts: &[f64], ys: &[f64], pis: &[f64], ev: &DensityEvaluator) -> Result<(f64, f64)> {
    if !ev.has_joint_density() {
        return Err(Error::domain(format!(
            "{}: variance estimation needs a joint inclusion density",
            ev.spec()
        )));
    }
    let mut cross = 0.0;
    let mut syg = 0.0;
    let stationary = ev.is_stationary();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (pp, p2) = if stationary {
                (pis[i] * pis[j], ev.pi2_lag(pts[j] - pts[i]))
            } else {
                (pis[i] * pis[j], ev.second_order(pts[i], pts[j])?)
            };
            if !(p2 > 0.0) {
                return Err(Error::domain(format!(
                    "joint density is {p2} at the selected pair ({}, {})",
                    pts[i], pts[j]
                )));
            }
            let w = pp / p2;
            cross += ys[i] * ys[j] * (1.0 - w);
            let d = ys[i] - ys[j];
            syg += d * d * (w - 1.0);
        }
    }
    Ok((cross, syg))
}

/// Unbiased variance estimator `Σ (z/π)² + Σ_{i≠j} z_i z_j (π₂ - π_i π_j) / (π_i π_j π₂)`.
pub fn var_hat_cordy(sample: &OrderedSample, z: &IntegrableFunction, ev: &DensityEvaluator) -> Result<f64> {
    let pts = sample.points();
    let (ys, pis) = expansions(pts, z, ev)?;
    let (cross, _) = pair_sums(pts, &ys, &pis, ev)?;
    Ok(ys.iter().map(|y| y * y).sum::<f64>() + 2.0 * cross)
}

/// Sen-Yates-Grundy estimator `Σ_{i<j} (z_i/π_i - z_j/π_j)² (π_i π_j - π₂) / π₂`.
/// May be negative.
pub fn var_hat_syg(sample: &OrderedSample, z: &IntegrableFunction, ev: &DensityEvaluator) -> Result<f64> {
    if !ev.is_fixed_size() {
        return Err(Error::domain(format!(
            "{}: the Sen-Yates-Grundy estimator needs a fixed-size process",
            ev.spec()
        )));
    }
    let pts = sample.points();
    let (ys, pis) = expansions(pts, z, ev)?;
    Ok(pair_sums(pts, &ys, &pis, ev)?.1)
}

/// Full report. Fixed-size processes select the SYG estimator, others Cordy's.
/// Empty samples give zero everywhere and no interval.
pub fn estimate(
    sample: &OrderedSample,
    z: &IntegrableFunction,
    ev: &DensityEvaluator,
    level: f64,
) -> Result<EstimateReport> {
    let quantile = ci_multiplier(level)?;
    let pts = sample.points();
    let selected = if ev.is_fixed_size() {
        VarianceChoice::Syg
    } else {
        VarianceChoice::Cordy
    };
    let (ys, pis) = expansions(pts, z, ev)?;
    let mean_hat = compensated_sum(ys.iter().copied());
    let (cordy, syg) = if ev.has_joint_density() {
        let (cross, syg) = pair_sums(pts, &ys, &pis, ev)?;
        let cordy = ys.iter().map(|y| y * y).sum::<f64>() + 2.0 * cross;
        (Some(cordy), ev.is_fixed_size().then_some(syg))
    } else {
        (None, None)
    };
    let mut report = EstimateReport {
        mean_hat,
        var_hat_cordy: cordy,
        var_hat_syg: syg,
        selected,
        ci_lo: None,
        ci_hi: None,
        sample_size: pts.len(),
    };
    if !pts.is_empty() {
        if let Some((lo, hi)) = interval(&report, quantile) {
            report.ci_lo = Some(lo);
            report.ci_hi = Some(hi);
        }
    }
    Ok(report)
}

fn ci_multiplier(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0,1), got {level}")));
    }
    normal_quantile(0.5 + 0.5 * level)
}

fn interval(report: &EstimateReport, quantile: f64) -> Option<(f64, f64)> {
    let v = report.selected_variance()?;
    if v >= 0.0 {
        let half = quantile * v.sqrt();
        Some((report.mean_hat - half, report.mean_hat + half))
    } else {
        None
    }
}

/// `mean_hat ± z_level √var_hat` for the selected estimator; absent when it is negative.
pub fn confidence_interval(report: &EstimateReport, level: f64) -> Result<Option<(f64, f64)>> {
    Ok(interval(report, ci_multiplier(level)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngState;
    use crate::processes::{sample, ProcessSpec};

    fn fixed(points: Vec<f64>, spec: ProcessSpec) -> OrderedSample {
        OrderedSample::new(points, spec, 0, 0).unwrap()
    }

    #[test]
    fn constant_function_on_fixed_size() {
        let spec = ProcessSpec::SystBinomial { n: 30, r: 2.0 };
        let ev = DensityEvaluator::new(spec).unwrap();
        let mut rng = RngState::new(4, 0);
        let s = sample(&mut rng, &spec).unwrap();
        let z = IntegrableFunction::constant(3.0);
        let rep = estimate(&s, &z, &ev, 0.95).unwrap();
        assert!((rep.mean_hat - 3.0).abs() < 1e-13);
        assert_eq!(rep.var_hat_syg, Some(0.0));
        assert_eq!(rep.ci_lo, Some(rep.mean_hat));
    }

    #[test]
    fn cordy_constant_binomial_is_zero_by_substitution() {
        let n = 10usize;
        let c = 2.5;
        let spec = ProcessSpec::Binomial { n };
        let ev = DensityEvaluator::new(spec).unwrap();
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.3) / n as f64).collect();
        let v = var_hat_cordy(&fixed(pts, spec), &IntegrableFunction::constant(c), &ev).unwrap();
        // n (c/n)² + n(n-1) (c/n)² (n(n-1) - n²) / (n(n-1)) = c²/n - c²/n.
        let nf = n as f64;
        let direct = nf * (c / nf).powi(2)
            + nf * (nf - 1.0) * (c / nf).powi(2) * (nf * (nf - 1.0) - nf * nf) / (nf * (nf - 1.0));
        assert!((v - direct).abs() < 1e-12);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn empty_and_single_point() {
        let spec = ProcessSpec::SystPoisson { r: 2.0, lambda: 4.0 };
        let ev = DensityEvaluator::new(spec).unwrap();
        let z = IntegrableFunction::new("x", |x| x + 1.0);
        let empty = fixed(vec![], spec);
        assert_eq!(ht_mean(&empty, &z, &ev).unwrap(), 0.0);
        let rep = estimate(&empty, &z, &ev, 0.95).unwrap();
        assert_eq!(rep.var_hat_cordy, Some(0.0));
        assert!(rep.ci_lo.is_none() && !rep.covers(0.0));
        let one = fixed(vec![0.5], spec);
        let v = var_hat_cordy(&one, &z, &ev).unwrap();
        assert!((v - (1.5f64 / 2.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn syg_zero_when_expansions_equal() {
        let spec = ProcessSpec::SystBinomial { n: 3, r: 2.0 };
        let ev = DensityEvaluator::new(spec).unwrap();
        let s = fixed(vec![0.1, 0.4, 0.8], spec);
        assert_eq!(var_hat_syg(&s, &IntegrableFunction::constant(-7.0), &ev).unwrap(), 0.0);
    }

    #[test]
    fn syg_rejects_random_size() {
        let spec = ProcessSpec::SystPoisson { r: 2.0, lambda: 4.0 };
        let ev = DensityEvaluator::new(spec).unwrap();
        let s = fixed(vec![0.1, 0.4], spec);
        assert!(var_hat_syg(&s, &IntegrableFunction::constant(1.0), &ev).is_err());
    }

    #[test]
    fn interval_rules() {
        let mut rep = EstimateReport {
            mean_hat: 2.0,
            var_hat_cordy: Some(4.0),
            var_hat_syg: Some(-1.0),
            selected: VarianceChoice::Syg,
            ci_lo: None,
            ci_hi: None,
            sample_size: 3,
        };
        assert_eq!(confidence_interval(&rep, 0.95).unwrap(), None);
        rep.selected = VarianceChoice::Cordy;
        let (lo, hi) = confidence_interval(&rep, 0.95).unwrap().unwrap();
        assert!((hi - 2.0 - 2.0 * 1.959963984540054).abs() < 1e-12);
        assert!((lo + hi - 4.0).abs() < 1e-12);
        rep.var_hat_cordy = Some(0.0);
        assert_eq!(confidence_interval(&rep, 0.95).unwrap(), Some((2.0, 2.0)));
        assert!(confidence_interval(&rep, 1.0).is_err());
    }

    #[test]
    fn systematic_has_mean_but_no_variance() {
        let spec = ProcessSpec::Systematic { c: 0.1 };
        let ev = DensityEvaluator::new(spec).unwrap();
        let mut rng = RngState::new(1, 0);
        let s = sample(&mut rng, &spec).unwrap();
        let rep = estimate(&s, &IntegrableFunction::constant(1.0), &ev, 0.95).unwrap();
        assert!((rep.mean_hat - 1.0).abs() < 1e-12);
        assert!(rep.var_hat_cordy.is_none() && rep.ci_lo.is_none());
    }
}
