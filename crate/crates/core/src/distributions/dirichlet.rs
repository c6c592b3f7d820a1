use super::gamma::sample_ln_standard_gamma;
use super::RngState;
use crate::error::{Error, Result};

/// Symmetric Dirichlet `Dir(r, ..., r)` over `n` components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletSymParams {
    n: usize,
    shape: f64,
}

impl DirichletSymParams {
    pub fn new(n: usize, shape: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Dirichlet dimension must be at least 1"));
        }
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::domain(format!("Dirichlet shape must be positive, got {shape}")));
        }
        Ok(DirichletSymParams { n, shape })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

/// Draw by normalising independent `Gamma(r, 1)` variates. The
/// normalisation is done on log values shifted by their maximum so that very
/// small shapes, where the raw Gamma draws underflow, still produce a valid
/// point on the simplex. Components sum to one within a few ulp.
pub fn sample_dirichlet_sym(rng: &mut RngState, p: &DirichletSymParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.n);
    sample_dirichlet_into(rng, p.n, p.shape, &mut out);
    out
}

pub(crate) fn sample_dirichlet_into(rng: &mut RngState, n: usize, shape: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut max = f64::NEG_INFINITY;
    for _ in 0..n {
        let l = sample_ln_standard_gamma(rng, shape);
        max = max.max(l);
        out.push(l);
    }
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::beta_cdf_unchecked;

    #[test]
    fn validates() {
        assert!(DirichletSymParams::new(0, 1.0).is_err());
        assert!(DirichletSymParams::new(3, 0.0).is_err());
        assert!(DirichletSymParams::new(3, 2.0).is_ok());
    }

    #[test]
    fn sums_to_one() {
        let mut rng = RngState::new(3, 0);
        for &r in &[0.01, 0.5, 1.0, 30.0] {
            let p = DirichletSymParams::new(50, r).unwrap();
            for _ in 0..200 {
                let v = sample_dirichlet_sym(&mut rng, &p);
                let s: f64 = v.iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }
    }

    #[test]
    fn marginal_is_beta() {
        let (n, r) = (5usize, 2.0);
        let p = DirichletSymParams::new(n, r).unwrap();
        let mut rng = RngState::new(4, 0);
        let m = 50_000;
        let mut xs: Vec<f64> = (0..m).map(|_| sample_dirichlet_sym(&mut rng, &p)[2]).collect();
        xs.sort_by(f64::total_cmp);
        let b = r * (n as f64 - 1.0);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = beta_cdf_unchecked(r, b, x);
                (c - i as f64 / m as f64).abs().max((c - (i + 1) as f64 / m as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.009, "KS {d}");
    }

    #[test]
    fn component_variance() {
        let (n, r) = (10usize, 4.0);
        let p = DirichletSymParams::new(n, r).unwrap();
        let mut rng = RngState::new(5, 0);
        let m = 100_000;
        let xs: Vec<f64> = (0..m).map(|_| sample_dirichlet_sym(&mut rng, &p)[0]).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let rn = r * n as f64;
        let expect = r * r * (n as f64 - 1.0) / (rn * rn * (rn + 1.0));
        assert!((mean - 0.1).abs() < 5e-4);
        assert!((var / expect - 1.0).abs() < 0.03, "{var} vs {expect}");
    }
}
