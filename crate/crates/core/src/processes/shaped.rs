use std::fmt;
use std::sync::Arc;

use super::density::DensityEvaluator;
use super::samplers::sample;
use super::spec::{is_strictly_inside_and_increasing, OrderedSample, ProcessSpec};
use crate::distributions::RngState;
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, Grid1D};

const PANELS: usize = 1024;

type Phi = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A non-negative shape `φ` on [0,1] with its cumulative integral `Φ`,
/// tabulated on equal panels and normalised so that `Φ̃(1) = 1`.
#[derive(Clone)]
pub struct ShapedDensity {
    phi: Phi,
    /// `cum[k] = Φ(k / PANELS)` before normalisation.
    cum: Vec<f64>,
    total: f64,
    rule: Grid1D,
}

impl fmt::Debug for ShapedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapedDensity")
            .field("total", &self.total)
            .field("panels", &PANELS)
            .finish()
    }
}

impl ShapedDensity {
    /// Fails if `φ` is negative or non-finite at a quadrature node, or if a
    /// whole panel carries no mass (Φ would be flat there).
    pub fn new<F>(phi: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let phi: Phi = Arc::new(phi);
        let rule = gauss_legendre(10, 0.0, 1.0)?;
        let w = 1.0 / PANELS as f64;
        let mut cum = Vec::with_capacity(PANELS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..PANELS {
            let lo = k as f64 * w;
            let mut mass = 0.0;
            for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                let v = phi(lo + t * w);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::domain(format!(
                        "shape function must be finite and non-negative, got {v} at {}",
                        lo + t * w
                    )));
                }
                mass += wt * v;
            }
            mass *= w;
            if mass <= 0.0 {
                return Err(Error::domain(format!(
                    "shape function vanishes on [{lo}, {}]; its integral is not strictly increasing",
                    lo + w
                )));
            }
            acc += mass;
            cum.push(acc);
        }
        Ok(ShapedDensity {
            phi,
            cum,
            total: acc,
            rule,
        })
    }

    /// `Φ(1)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Raw `φ(x)`.
    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    /// `φ(x) / Φ(1)`.
    pub fn density(&self, x: f64) -> f64 {
        (self.phi)(x) / self.total
    }

    fn panel_of(x: f64) -> usize {
        ((x * PANELS as f64) as usize).min(PANELS - 1)
    }

    fn raw_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.total;
        }
        let k = Self::panel_of(x);
        let lo = k as f64 / PANELS as f64;
        let width = x - lo;
        let part: f64 = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(t, w)| w * (self.phi)(lo + t * width))
            .sum();
        self.cum[k] + part * width
    }

    /// `Φ̃(x) = Φ(x) / Φ(1)`.
    pub fn cdf(&self, x: f64) -> f64 {
        (self.raw_cdf(x) / self.total).clamp(0.0, 1.0)
    }

    /// `Φ̃⁻¹(p)` by safeguarded Newton inside the bracketing panel.
    pub fn inverse_cdf(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("probability must lie in [0,1], got {p}")));
        }
        let target = p * self.total;
        let k = self.cum.partition_point(|&c| c <= target).clamp(1, PANELS) - 1;
        let (mut lo, mut hi) = (k as f64 / PANELS as f64, (k + 1) as f64 / PANELS as f64);
        let (c0, c1) = (self.cum[k], self.cum[k + 1]);
        let mut x = lo + (hi - lo) * ((target - c0) / (c1 - c0)).clamp(0.0, 1.0);
        let tol = 4.0 * f64::EPSILON * self.total;
        for _ in 0..100 {
            let g = self.raw_cdf(x) - target;
            if g.abs() <= tol {
                break;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = (self.phi)(x);
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 2.0 * f64::EPSILON {
                break;
            }
        }
        Ok(x)
    }
}

/// Draw from `base` and map every point through `Φ̃⁻¹`; returns the mapped
/// sample with the matching density evaluator.
pub fn transform_process(
    base: &ProcessSpec,
    shape: Arc<ShapedDensity>,
    rng: &mut RngState,
) -> Result<(OrderedSample, DensityEvaluator)> {
    let ev = DensityEvaluator::new(*base)?.with_shape(shape.clone());
    let s = sample(rng, base)?;
    Ok((transform_sample(&s, &shape)?, ev))
}

pub fn transform_sample(s: &OrderedSample, shape: &ShapedDensity) -> Result<OrderedSample> {
    let pts = s
        .points()
        .iter()
        .map(|&u| shape.inverse_cdf(u))
        .collect::<Result<Vec<_>>>()?;
    if !is_strictly_inside_and_increasing(&pts) {
        return Err(Error::Sampling(
            "transformed points collided after inversion".into(),
        ));
    }
    Ok(OrderedSample::new_unchecked(pts, *s.spec(), s.seed(), s.stream()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_shape() {
        let s = ShapedDensity::new(|_| 1.0).unwrap();
        for &x in &[0.0, 0.1, 0.37, 0.999] {
            assert!((s.cdf(x) - x).abs() < 1e-14);
            assert!((s.inverse_cdf(x).unwrap() - x).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_shape() {
        let s = ShapedDensity::new(|x| 2.0 * x).unwrap();
        assert!((s.total() - 1.0).abs() < 1e-14);
        for &p in &[1e-6, 0.04, 0.5, 0.81, 0.99999] {
            let x = s.inverse_cdf(p).unwrap();
            assert!((x - p.sqrt()).abs() < 1e-12, "p={p}: {x}");
        }
    }

    #[test]
    fn scaled_shape_is_normalised() {
        let s = ShapedDensity::new(|x| 5.0 * (1.0 + x * x)).unwrap();
        assert!((s.total() - 5.0 * (4.0 / 3.0)).abs() < 1e-12);
        assert!((s.cdf(1.0) - 1.0).abs() < 1e-15);
        let x = 0.3;
        assert!((s.cdf(x) - (x + x * x * x / 3.0) / (4.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_flat_or_negative() {
        assert!(ShapedDensity::new(|x| if x < 0.5 { 0.0 } else { 1.0 }).is_err());
        assert!(ShapedDensity::new(|x| x - 0.5).is_err());
        assert!(ShapedDensity::new(|_| f64::NAN).is_err());
    }

    #[test]
    fn transformed_densities() {
        let shape = Arc::new(ShapedDensity::new(|x| 2.0 * x).unwrap());
        let mut rng = RngState::new(1, 0);
        let base = ProcessSpec::SystBinomial { n: 10, r: 2.0 };
        let (s, ev) = transform_process(&base, shape, &mut rng).unwrap();
        assert_eq!(s.len(), 10);
        assert!((ev.first_order(0.5).unwrap() - 10.0).abs() < 1e-12);
        let plain = DensityEvaluator::new(base).unwrap();
        let v = ev.second_order(0.5, 0.8).unwrap();
        let w = plain.second_order(0.25, 0.64).unwrap() * 1.0 * 1.6;
        assert!((v - w).abs() < 1e-10 * w);
    }
}
