//! Special functions, quadrature, root finding and compensated summation.
//!
//! Everything here is a pure function of its inputs.

pub(crate) mod quadrature;
mod roots;
pub(crate) mod special;
mod summation;

pub use quadrature::{
    gauss_legendre, integrate_1d, integrate_2d, integrate_breakpoints,
    integrate_breakpoints_estimate, integrate_to_infinity, Grid1D, QuadratureEstimate,
};
pub use roots::bisect_monotone;
pub use special::{
    beta_cdf, ln_beta, log_gamma, lower_gamma_regularized, normal_cdf, normal_quantile,
    upper_gamma_regularized,
};
pub use summation::{compensated_sum, CompensatedSum};

use crate::error::{Error, Result};

/// Convergence targets for iterative routines.
///
/// A routine stops once its error estimate is below `max(abs, rel * |value|)`
/// or after `max_iter` refinement steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_iter: usize) -> Result<Self> {
        let t = Tolerance { abs, rel, max_iter };
        t.validate()?;
        Ok(t)
    }

    pub fn abs(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            ..Default::default()
        }
    }

    pub fn rel(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            ..Default::default()
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs >= 0.0
            && self.rel >= 0.0
            && (self.abs > 0.0 || self.rel > 0.0)
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid tolerance {self:?}")))
        }
    }

    /// Target error for a quantity of magnitude `value`.
    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_iter: 20_000,
        }
    }
}
