//! Gamma and forward-Gamma laws.
//!
//! `ForG(r, λ)` is the stationary forward recurrence time of a renewal
//! process with `Gamma(r, λ)` gaps: density `(λ / r) Q(r, λx)` on `x >= 0`.

use super::RngState;
use crate::error::{Error, Result};
use crate::numerics::special::{gamma_pq, ln_gamma};

/// Shape `r` and rate `λ` of a Gamma law; mean `r / λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::domain(format!(
                "Gamma parameters must be positive and finite, got shape={shape} rate={rate}"
            )));
        }
        Ok(GammaParams { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

/// Standard normal by the Marsaglia polar method (one value per call).
pub fn sample_standard_normal(rng: &mut RngState) -> f64 {
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

pub fn sample_exponential(rng: &mut RngState, rate: f64) -> f64 {
    -rng.uniform_open().ln() / rate
}

/// Marsaglia-Tsang squeeze for shape >= 1 on the unit-rate scale.
fn standard_gamma_ge1(rng: &mut RngState, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = sample_standard_normal(rng);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// `ln G` for `G ~ Gamma(shape, 1)`; for shape < 1 uses
/// `Gamma(shape) = Gamma(shape + 1) * U^(1/shape)` in log space so tiny
/// values do not underflow.
pub(crate) fn sample_ln_standard_gamma(rng: &mut RngState, shape: f64) -> f64 {
    if shape >= 1.0 {
        standard_gamma_ge1(rng, shape).ln()
    } else {
        let g = standard_gamma_ge1(rng, shape + 1.0);
        g.ln() + rng.uniform_open().ln() / shape
    }
}

pub(crate) fn sample_standard_gamma(rng: &mut RngState, shape: f64) -> f64 {
    if shape >= 1.0 {
        standard_gamma_ge1(rng, shape)
    } else {
        let g = standard_gamma_ge1(rng, shape + 1.0);
        g * rng.uniform_open().powf(1.0 / shape)
    }
}

/// `Gamma(r, λ)` variate.
pub fn sample_gamma(rng: &mut RngState, p: &GammaParams) -> f64 {
    sample_standard_gamma(rng, p.shape) / p.rate
}

/// `ForG(r, λ)` variate as `U * G` with `G ~ Gamma(r + 1, λ)`: the
/// length-biased gap straddling a typical instant, cut uniformly.
pub fn sample_forward_gamma(rng: &mut RngState, p: &GammaParams) -> f64 {
    let g = standard_gamma_ge1(rng, p.shape + 1.0);
    rng.uniform_open() * g / p.rate
}

pub fn gamma_pdf(p: &GammaParams, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let (r, l) = (p.shape, p.rate);
    if x == 0.0 {
        return match r.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => l,
            _ => 0.0,
        };
    }
    (r * l.ln() + (r - 1.0) * x.ln() - l * x - ln_gamma(r)).exp()
}

/// `f₀(x) = λ Γ(r, λx) / Γ(r + 1) = (λ / r) Q(r, λx)`.
pub fn forward_gamma_pdf(p: &GammaParams, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("forward_gamma_pdf requires x >= 0, got {x}")));
    }
    Ok(p.rate / p.shape * gamma_pq(p.shape, p.rate * x).1)
}

/// `F₀(x) = (λx / r) Q(r, λx) + P(r + 1, λx)`.
pub fn forward_gamma_cdf(p: &GammaParams, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("forward_gamma_cdf requires x >= 0, got {x}")));
    }
    let y = p.rate * x;
    if y == f64::INFINITY {
        return Ok(1.0);
    }
    let q = gamma_pq(p.shape, y).1;
    let p1 = gamma_pq(p.shape + 1.0, y).0;
    Ok((y / p.shape * q + p1).min(1.0))
}

/// `E[ForG(r, λ)] = (r + 1) / (2λ)`.
pub fn forward_gamma_mean(p: &GammaParams) -> f64 {
    (p.shape + 1.0) / (2.0 * p.rate)
}
