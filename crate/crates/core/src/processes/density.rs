//! Exact inclusion densities.
//!
//! The joint density of both quasi-systematic families is a series whose
//! `m`-th term (in log form) is `A(h) + c_m + m L(h)` with `c_m` depending
//! only on the process parameters. `c_m` is concave in `m`, so the terms are
//! unimodal: evaluation locates the largest term and sums outward until the
//! terms drop below `series_tol.rel` of the running total. When the
//! consecutive-term ratios are representable, the walk uses precomputed
//! linear ratios instead of one `exp` per term.

use std::sync::Arc;

use super::shaped::ShapedDensity;
use super::spec::{is_strictly_inside_and_increasing, ProcessSpec};
use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;
use crate::numerics::Tolerance;

/// Largest number of systematic-Poisson series terms we are willing to tabulate.
const MAX_SERIES_TERMS: usize = 5_000_000;
/// Ratios whose log exceeds this fall back to per-term exponentials.
const LINEAR_LOG_LIMIT: f64 = 600.0;

#[derive(Debug, Clone)]
enum Family {
    Binomial { n: f64 },
    Poisson { lambda: f64 },
}

#[derive(Debug, Clone)]
struct Series {
    family: Family,
    r: f64,
    /// `c[k]` is `c_m` for `m = k + 1`.
    c: Vec<f64>,
    /// `up[k] = exp(c[k + 1] - c[k])`, present when all are representable.
    up: Option<Vec<f64>>,
    stop_rel: f64,
}

impl Series {
    fn new(family: Family, r: f64, m_max: usize, stop_rel: f64) -> Self {
        let c: Vec<f64> = match family {
            Family::Binomial { n } => {
                let top = ln_gamma(n * r);
                (1..=m_max)
                    .map(|m| {
                        let m = m as f64;
                        top - ln_gamma(m * r) - ln_gamma((n - m) * r)
                    })
                    .collect()
            }
            Family::Poisson { .. } => (1..=m_max).map(|m| -ln_gamma(m as f64 * r)).collect(),
        };
        let linear = c.windows(2).all(|w| (w[1] - w[0]).abs() < LINEAR_LOG_LIMIT);
        let up = linear.then(|| c.windows(2).map(|w| (w[1] - w[0]).exp()).collect());
        Series {
            family,
            r,
            c,
            up,
            stop_rel,
        }
    }

    /// `A(h)` and `L(h)` for `0 < h < 1`.
    #[inline]
    fn affine(&self, h: f64) -> (f64, f64) {
        let r = self.r;
        match self.family {
            Family::Binomial { n } => {
                let lh = h.ln();
                let l1h = (-h).ln_1p();
                (n.ln() - lh - l1h + n * r * l1h, r * (lh - l1h))
            }
            Family::Poisson { lambda } => {
                let lh = h.ln();
                ((lambda / r).ln() - lambda * h - lh, r * (lambda.ln() + lh))
            }
        }
    }

    #[inline]
    fn mode_guess(&self, h: f64) -> f64 {
        match self.family {
            Family::Binomial { n } => (h * (n * self.r - 2.0) + 1.0) / self.r,
            Family::Poisson { lambda } => (lambda * h + 1.0) / self.r,
        }
    }

    /// Sum of the series at lag `0 < h < 1`.
    fn eval(&self, h: f64) -> f64 {
        let c = &self.c;
        let last = c.len() - 1;
        let (a, l) = self.affine(h);
        let lt = |k: usize| c[k] + (k + 1) as f64 * l;

        let mut k0 = (self.mode_guess(h).round() - 1.0).clamp(0.0, last as f64) as usize;
        let mut v0 = lt(k0);
        while k0 < last && lt(k0 + 1) > v0 {
            k0 += 1;
            v0 = lt(k0);
        }
        while k0 > 0 && lt(k0 - 1) > v0 {
            k0 -= 1;
            v0 = lt(k0);
        }

        let rel = match &self.up {
            Some(up) if l.abs() < LINEAR_LOG_LIMIT => self.walk_linear(up, k0, l),
            _ => None,
        }
        .unwrap_or_else(|| self.walk_log(k0, v0, lt));
        (a + v0).exp() * rel
    }

    /// Sum of `term_k / term_k0` using linear ratios; `None` if a product misbehaves.
    fn walk_linear(&self, up: &[f64], k0: usize, l: f64) -> Option<f64> {
        let q = l.exp();
        let qi = 1.0 / q;
        let last = self.c.len() - 1;
        let mut sum = 1.0;
        let mut t = 1.0;
        for k in k0 + 1..=last {
            t *= up[k - 1] * q;
            if !t.is_finite() {
                return None;
            }
            sum += t;
            if t <= self.stop_rel * sum {
                break;
            }
        }
        t = 1.0;
        for k in (0..k0).rev() {
            t *= qi / up[k];
            if !t.is_finite() {
                return None;
            }
            sum += t;
            if t <= self.stop_rel * sum {
                break;
            }
        }
        Some(sum)
    }

    fn walk_log(&self, k0: usize, v0: f64, lt: impl Fn(usize) -> f64) -> f64 {
        let last = self.c.len() - 1;
        let mut sum = 1.0;
        for k in k0 + 1..=last {
            let t = (lt(k) - v0).exp();
            sum += t;
            if t <= self.stop_rel * sum {
                break;
            }
        }
        for k in (0..k0).rev() {
            let t = (lt(k) - v0).exp();
            sum += t;
            if t <= self.stop_rel * sum {
                break;
            }
        }
        sum
    }
}

#[derive(Debug, Clone)]
enum Joint {
    /// `π⁽²⁾` constant off the diagonal.
    Constant { value: f64, singular_at_zero: bool },
    Series(Arc<Series>),
    /// Systematic sampling: the joint measure has no density.
    None,
}

/// First, second and n-th order inclusion densities of a process, optionally
/// reparameterised through a [`ShapedDensity`].
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    spec: ProcessSpec,
    series_tol: Tolerance,
    base_pi: f64,
    joint: Joint,
    shape: Option<Arc<ShapedDensity>>,
}

impl DensityEvaluator {
    pub fn new(spec: ProcessSpec) -> Result<Self> {
        Self::with_series_tol(spec, Self::default_series_tol())
    }

    pub fn default_series_tol() -> Tolerance {
        Tolerance::rel(1e-16)
    }

    pub fn with_series_tol(spec: ProcessSpec, series_tol: Tolerance) -> Result<Self> {
        spec.validate()?;
        series_tol.validate()?;
        let stop = series_tol.rel.max(f64::EPSILON * 1e-2);
        let (base_pi, joint) = match spec {
            ProcessSpec::Binomial { n } => {
                let n = n as f64;
                (
                    n,
                    Joint::Constant {
                        value: n * (n - 1.0),
                        singular_at_zero: false,
                    },
                )
            }
            ProcessSpec::Poisson { lambda } => (
                lambda,
                Joint::Constant {
                    value: lambda * lambda,
                    singular_at_zero: false,
                },
            ),
            ProcessSpec::Systematic { c } => (1.0 / c, Joint::None),
            ProcessSpec::SystBinomial { n, r } => {
                let nf = n as f64;
                let joint = if n == 1 {
                    Joint::Constant {
                        value: 0.0,
                        singular_at_zero: false,
                    }
                } else if r == 1.0 {
                    Joint::Constant {
                        value: nf * (nf - 1.0),
                        singular_at_zero: true,
                    }
                } else {
                    Joint::Series(Arc::new(Series::new(Family::Binomial { n: nf }, r, n - 1, stop)))
                };
                (nf, joint)
            }
            ProcessSpec::SystPoisson { r, lambda } => {
                let joint = if r == 1.0 {
                    Joint::Constant {
                        value: lambda * lambda,
                        singular_at_zero: true,
                    }
                } else {
                    let m_max = ((lambda + 50.0 * lambda.sqrt() + 50.0) / r).ceil() + 1.0;
                    if m_max > MAX_SERIES_TERMS as f64 {
                        return Err(Error::domain(format!(
                            "{spec}: joint density series would need {m_max} terms"
                        )));
                    }
                    Joint::Series(Arc::new(Series::new(
                        Family::Poisson { lambda },
                        r,
                        m_max as usize,
                        stop,
                    )))
                };
                (lambda / r, joint)
            }
        };
        Ok(DensityEvaluator {
            spec,
            series_tol,
            base_pi,
            joint,
            shape: None,
        })
    }

    /// Reparameterise through `Φ⁻¹`: `π̃(x) = π φ̃(x)` and
    /// `π̃⁽²⁾(x,y) = π⁽²⁾(Φ̃(x), Φ̃(y)) φ̃(x) φ̃(y)`, with `Φ̃ = Φ / Φ(1)`.
    pub fn with_shape(mut self, shape: Arc<ShapedDensity>) -> Self {
        self.shape = Some(shape);
        self
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn series_tol(&self) -> Tolerance {
        self.series_tol
    }

    pub fn shape(&self) -> Option<&Arc<ShapedDensity>> {
        self.shape.as_ref()
    }

    pub fn is_fixed_size(&self) -> bool {
        self.spec.is_fixed_size()
    }

    /// Constant first-order density and joint density depending only on `|x - y|`.
    pub fn is_stationary(&self) -> bool {
        self.shape.is_none()
    }

    pub fn has_joint_density(&self) -> bool {
        !matches!(self.joint, Joint::None)
    }

    /// The constant first-order density of the unshaped process.
    pub fn base_first_order(&self) -> f64 {
        self.base_pi
    }

    pub fn first_order(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(match &self.shape {
            None => self.base_pi,
            Some(s) => self.base_pi * s.density(x),
        })
    }

    pub fn second_order(&self, x: f64, y: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        match &self.shape {
            None => self.second_order_lag((x - y).abs()),
            Some(s) => {
                let (u, v) = (s.cdf(x), s.cdf(y));
                let base = self.second_order_lag((u - v).abs())?;
                Ok(base * s.density(x) * s.density(y))
            }
        }
    }

    /// Joint density of the unshaped process as a function of the lag `h = |x - y|`.
    pub fn second_order_lag(&self, h: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&h) {
            return Err(Error::domain(format!("lag must lie in [0,1), got {h}")));
        }
        let r = match self.spec {
            ProcessSpec::SystBinomial { r, .. } | ProcessSpec::SystPoisson { r, .. } => r,
            _ => f64::NAN,
        };
        match &self.joint {
            Joint::None => Err(Error::domain(format!(
                "{}: systematic sampling has no joint inclusion density",
                self.spec
            ))),
            Joint::Constant {
                singular_at_zero: true,
                ..
            } if h == 0.0 => Err(singular(&self.spec)),
            Joint::Constant { value, .. } => Ok(*value),
            Joint::Series(_) if h == 0.0 => {
                if r <= 1.0 {
                    Err(singular(&self.spec))
                } else {
                    Ok(0.0)
                }
            }
            Joint::Series(s) => Ok(s.eval(h)),
        }
    }

    /// Unchecked lag density for `0 < h < 1` on a process with a joint density.
    #[inline]
    pub(crate) fn pi2_lag(&self, h: f64) -> f64 {
        match &self.joint {
            Joint::Constant { value, .. } => *value,
            Joint::Series(s) => s.eval(h),
            Joint::None => f64::NAN,
        }
    }

    /// n-th order density of a fixed-size process at `n` ascending points.
    pub fn nth_order(&self, points: &[f64]) -> Result<f64> {
        let (n, r) = match self.spec {
            ProcessSpec::SystBinomial { n, r } => (n, r),
            ProcessSpec::Binomial { n } => (n, 1.0),
            _ => {
                return Err(Error::domain(format!(
                    "{}: n-th order density is defined for binomial families only",
                    self.spec
                )))
            }
        };
        if points.len() != n {
            return Err(Error::domain(format!(
                "expected {n} points, got {}",
                points.len()
            )));
        }
        if !is_strictly_inside_and_increasing(points) {
            return Err(Error::domain("points must be strictly ascending inside (0,1)"));
        }
        let (mapped, jac): (Vec<f64>, f64) = match &self.shape {
            None => (points.to_vec(), 1.0),
            Some(s) => (
                points.iter().map(|&x| s.cdf(x)).collect(),
                points.iter().map(|&x| s.density(x)).product(),
            ),
        };
        Ok(nth_order_syst_binomial(n, r, &mapped) * jac)
    }
}

fn nth_order_syst_binomial(n: usize, r: f64, p: &[f64]) -> f64 {
    let nf = n as f64;
    let mut log = nf.ln() + ln_gamma(nf * r) - nf * ln_gamma(r);
    if r != 1.0 {
        let wrap = 1.0 + p[0] - p[n - 1];
        let gaps: f64 = p.windows(2).map(|w| (w[1] - w[0]).ln()).sum();
        log += (r - 1.0) * (wrap.ln() + gaps);
    }
    log.exp()
}

fn singular(spec: &ProcessSpec) -> Error {
    Error::Singular(format!("{spec}: joint density at coincident points with r <= 1"))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// Stand-alone joint density of the systematic-Poisson process.
pub fn second_order_density_syst_poisson(r: f64, lambda: f64, x: f64, y: f64) -> Result<f64> {
    DensityEvaluator::new(ProcessSpec::SystPoisson { r, lambda })?.second_order(x, y)
}

/// Stand-alone joint density of the systematic-binomial process.
pub fn second_order_density_syst_binomial(n: usize, r: f64, x: f64, y: f64) -> Result<f64> {
    DensityEvaluator::new(ProcessSpec::SystBinomial { n, r })?.second_order(x, y)
}

/// Stand-alone n-th order density of the systematic-binomial process.
pub fn nth_order_density_syst_binomial(n: usize, r: f64, points: &[f64]) -> Result<f64> {
    DensityEvaluator::new(ProcessSpec::SystBinomial { n, r })?.nth_order(points)
}

/// Result of scanning `π⁽²⁾(x,y) / (π(x) π(y))` for values above one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SygScanReport {
    pub max_ratio: f64,
    pub argmax: (f64, f64),
    pub holds: bool,
    pub resolution: usize,
}

/// Grid scan of the Sen-Yates-Grundy condition `π⁽²⁾ <= π π`.
///
/// Stationary processes are scanned along the lag; shaped ones on a square grid.
pub fn syg_condition_scan(ev: &DensityEvaluator, resolution: usize) -> Result<SygScanReport> {
    if resolution < 2 {
        return Err(Error::domain("scan resolution must be at least 2"));
    }
    if !ev.has_joint_density() {
        return Err(Error::domain(format!(
            "{}: no joint density to scan",
            ev.spec()
        )));
    }
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    let step = 1.0 / resolution as f64;
    if ev.is_stationary() {
        let pi = ev.base_first_order();
        for k in 0..resolution {
            let h = (k as f64 + 0.5) * step;
            let ratio = ev.second_order_lag(h)? / (pi * pi);
            if ratio > best.0 {
                best = (ratio, (0.0, h));
            }
        }
    } else {
        for i in 0..resolution {
            let x = (i as f64 + 0.5) * step;
            let px = ev.first_order(x)?;
            for j in 0..resolution {
                if i == j {
                    continue;
                }
                let y = (j as f64 + 0.5) * step;
                let ratio = ev.second_order(x, y)? / (px * ev.first_order(y)?);
                if ratio > best.0 {
                    best = (ratio, (x, y));
                }
            }
        }
    }
    Ok(SygScanReport {
        max_ratio: best.0,
        argmax: best.1,
        holds: best.0 <= 1.0 + 1e-12,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_direct(n: usize, r: f64, h: f64) -> f64 {
        let nf = n as f64;
        (1..n)
            .map(|m| {
                let m = m as f64;
                (ln_gamma(nf * r) - ln_gamma(m * r) - ln_gamma((nf - m) * r)
                    + (m * r - 1.0) * h.ln()
                    + ((nf - m) * r - 1.0) * (1.0 - h).ln())
                .exp()
            })
            .sum::<f64>()
            * nf
    }

    fn poisson_direct(r: f64, lambda: f64, h: f64, terms: usize) -> f64 {
        (1..=terms)
            .map(|m| {
                let m = m as f64;
                ((lambda / r).ln() - lambda * h + m * r * lambda.ln() + (m * r - 1.0) * h.ln()
                    - ln_gamma(m * r))
                .exp()
            })
            .sum()
    }

    #[test]
    fn binomial_series_matches_full_sum() {
        for &(n, r) in &[(10, 2.0), (30, 4.0), (100, 8.0), (30, 0.5), (50, 30.0), (7, 2.7)] {
            let ev = DensityEvaluator::new(ProcessSpec::SystBinomial { n, r }).unwrap();
            for &h in &[1e-3, 0.013, 0.1, 0.25, 0.5, 0.77, 0.999] {
                let got = ev.second_order_lag(h).unwrap();
                let want = binom_direct(n, r, h);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1e-300) + 1e-300,
                    "n={n} r={r} h={h}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn large_shape_uses_log_path_and_agrees() {
        let (n, r) = (100, 100.0);
        let ev = DensityEvaluator::new(ProcessSpec::SystBinomial { n, r }).unwrap();
        for &h in &[0.01, 0.0137, 0.5] {
            let got = ev.second_order_lag(h).unwrap();
            let want = binom_direct(n, r, h);
            assert!((got - want).abs() <= 1e-11 * want + 1e-300, "h={h}: {got} vs {want}");
        }
    }

    #[test]
    fn poisson_series_matches_long_sum() {
        for &(r, lambda) in &[(2.0, 20.0), (2.0, 60.0), (30.0, 300.0), (0.5, 1.0), (50.0, 500.0)] {
            let ev = DensityEvaluator::new(ProcessSpec::SystPoisson { r, lambda }).unwrap();
            for &h in &[1e-3, 0.05, 0.1, 0.33, 0.9] {
                let got = ev.second_order_lag(h).unwrap();
                let want = poisson_direct(r, lambda, h, 4000);
                assert!(
                    (got - want).abs() <= 1e-12 * want + 1e-300,
                    "r={r} l={lambda} h={h}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn unit_shape_constants() {
        let p = DensityEvaluator::new(ProcessSpec::SystPoisson { r: 1.0, lambda: 10.0 }).unwrap();
        assert_eq!(p.second_order(0.2, 0.9).unwrap(), 100.0);
        let b = DensityEvaluator::new(ProcessSpec::SystBinomial { n: 10, r: 1.0 }).unwrap();
        assert_eq!(b.second_order(0.2, 0.9).unwrap(), 90.0);
        assert!((binom_direct(10, 1.0, 0.3) - 90.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_rules() {
        let p = DensityEvaluator::new(ProcessSpec::SystPoisson { r: 2.0, lambda: 20.0 }).unwrap();
        assert_eq!(p.second_order(0.4, 0.4).unwrap(), 0.0);
        assert!(p.second_order(0.4, 0.4 + 1e-9).unwrap() < 1e-5);
        for spec in [
            ProcessSpec::SystPoisson { r: 1.0, lambda: 20.0 },
            ProcessSpec::SystPoisson { r: 0.5, lambda: 20.0 },
            ProcessSpec::SystBinomial { n: 5, r: 0.7 },
            ProcessSpec::SystBinomial { n: 5, r: 1.0 },
        ] {
            let ev = DensityEvaluator::new(spec).unwrap();
            assert!(matches!(ev.second_order(0.3, 0.3), Err(Error::Singular(_))), "{spec}");
        }
        let one = DensityEvaluator::new(ProcessSpec::SystBinomial { n: 1, r: 3.0 }).unwrap();
        assert_eq!(one.second_order(0.1, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn first_order_values() {
        let cases = [
            (ProcessSpec::SystPoisson { r: 30.0, lambda: 300.0 }, 10.0),
            (ProcessSpec::SystBinomial { n: 30, r: 8.0 }, 30.0),
            (ProcessSpec::Binomial { n: 10 }, 10.0),
            (ProcessSpec::Poisson { lambda: 7.0 }, 7.0),
            (ProcessSpec::Systematic { c: 0.25 }, 4.0),
        ];
        for (spec, want) in cases {
            let ev = DensityEvaluator::new(spec).unwrap();
            assert_eq!(ev.first_order(0.2).unwrap(), want);
        }
        let ev = DensityEvaluator::new(ProcessSpec::Binomial { n: 3 }).unwrap();
        assert!(ev.first_order(0.0).is_err());
        assert!(ev.first_order(1.0).is_err());
    }

    #[test]
    fn systematic_has_no_joint_density() {
        let ev = DensityEvaluator::new(ProcessSpec::Systematic { c: 0.1 }).unwrap();
        assert!(ev.second_order(0.1, 0.5).is_err());
    }

    #[test]
    fn nth_order_examples() {
        let v = nth_order_density_syst_binomial(2, 2.0, &[0.25, 0.75]).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let v = nth_order_density_syst_binomial(5, 1.0, &[0.1, 0.2, 0.5, 0.6, 0.95]).unwrap();
        assert!((v - 120.0).abs() < 1e-9);
        assert!(nth_order_density_syst_binomial(2, 2.0, &[0.75, 0.25]).is_err());
        assert!(nth_order_density_syst_binomial(3, 2.0, &[0.25, 0.75]).is_err());
    }

    #[test]
    fn syg_scan_reports() {
        for n in [10, 30, 100] {
            let ev = DensityEvaluator::new(ProcessSpec::SystBinomial { n, r: 2.0 }).unwrap();
            let rep = syg_condition_scan(&ev, 4000).unwrap();
            assert!(rep.holds, "n={n}: {rep:?}");
        }
        // r = 3 crosses one only once n is large; r = 4 already at n = 10.
        let scan = |n, r| {
            let ev = DensityEvaluator::new(ProcessSpec::SystBinomial { n, r }).unwrap();
            syg_condition_scan(&ev, 20_000).unwrap()
        };
        assert!(scan(30, 3.0).holds);
        let r3 = scan(100, 3.0);
        assert!(!r3.holds && (r3.max_ratio - 1.00128).abs() < 1e-4, "{r3:?}");
        assert!(!scan(10, 4.0).holds);
    }
}
