//! Seedable variate generation and the densities the processes are built from.

pub(crate) mod dirichlet;
mod gamma;
mod rng;

pub use dirichlet::{sample_dirichlet_sym, DirichletSymParams};
pub use gamma::{
    forward_gamma_cdf, forward_gamma_mean, forward_gamma_pdf, gamma_pdf, sample_exponential,
    sample_forward_gamma, sample_gamma, sample_standard_normal, GammaParams,
};
pub use rng::RngState;

use crate::error::{Error, Result};

/// Uniform variate on `[lo, hi)`.
pub fn sample_uniform(rng: &mut RngState, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("sample_uniform needs lo < hi, got [{lo}, {hi})")));
    }
    let v = lo + (hi - lo) * rng.uniform();
    Ok(if v >= hi { hi.next_down() } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mean_and_range() {
        let mut rng = RngState::new(11, 0);
        let n = 1_000_000;
        let mut s = 0.0;
        for _ in 0..n {
            let u = sample_uniform(&mut rng, 0.0, 1.0).unwrap();
            assert!((0.0..1.0).contains(&u));
            s += u;
        }
        assert!((s / n as f64 - 0.5).abs() < 0.002);

        for _ in 0..10_000 {
            let u = sample_uniform(&mut rng, 0.0, 0.1).unwrap();
            assert!((0.0..0.1).contains(&u));
        }
    }

    #[test]
    fn uniform_is_deterministic() {
        let draw = |seed| {
            let mut rng = RngState::new(seed, 5);
            (0..100)
                .map(|_| sample_uniform(&mut rng, -2.0, 3.0).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn uniform_rejects_empty_range() {
        let mut rng = RngState::new(0, 0);
        assert!(sample_uniform(&mut rng, 1.0, 1.0).is_err());
        assert!(sample_uniform(&mut rng, 2.0, 1.0).is_err());
    }
}
