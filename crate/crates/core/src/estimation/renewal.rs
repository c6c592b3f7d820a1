use crate::distributions::{forward_gamma_pdf, GammaParams};
use crate::error::{Error, Result};
use crate::numerics::special::{gamma_pq, ln_gamma};
use crate::numerics::{integrate_1d, Tolerance};

/// Smallest `k` with `P(Gamma(k r, λ) <= x_max) < 1e-12`.
pub fn renewal_k_max(p: &GammaParams, x_max: f64) -> usize {
    let y = p.rate() * x_max;
    let mut k = 1usize;
    while gamma_pq(k as f64 * p.shape(), y).0 >= 1e-12 {
        k += 1;
    }
    k
}

/// Largest deviation over `x_grid` of the stationary renewal identity
/// `f₀(x) + ∫₀ˣ f₀(x - t) Σ_{k <= k_max} f^{k*}(t) dt = 1/μ`, where
/// `f^{k*}` is the `Gamma(k r, λ)` density and `μ = r / λ`.
///
/// With `k_max = None` the truncation point is chosen automatically; an
/// explicit value that leaves more than 1e-12 of mass below the grid is a
/// numeric error.
pub fn renewal_identity_residual(
    p: &GammaParams,
    x_grid: &[f64],
    k_max: Option<usize>,
) -> Result<f64> {
    if x_grid.is_empty() {
        return Ok(0.0);
    }
    if x_grid.iter().any(|x| !x.is_finite() || *x < 0.0) || x_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("grid must be finite, non-negative and ascending"));
    }
    let x_max = x_grid[x_grid.len() - 1];
    let needed = renewal_k_max(p, x_max);
    let k_max = match k_max {
        Some(k) if k < needed => {
            let tail = gamma_pq(k as f64 * p.shape(), p.rate() * x_max).0;
            return Err(Error::Numeric {
                message: format!(
                    "k_max = {k} leaves {tail:e} of Gamma(k r, lambda) mass below {x_max}; need {needed}"
                ),
                estimate: f64::NAN,
                error_bound: tail,
            });
        }
        Some(k) => k,
        None => needed,
    };

    let (r, lam) = (p.shape(), p.rate());
    let ln_lam = lam.ln();
    let norms: Vec<f64> = (1..=k_max)
        .map(|k| {
            let a = k as f64 * r;
            a * ln_lam - ln_gamma(a)
        })
        .collect();
    let renewal_density = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let lt = t.ln();
        norms
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let a = (i + 1) as f64 * r;
                let l = c + (a - 1.0) * lt - lam * t;
                if l < -745.0 {
                    0.0
                } else {
                    l.exp()
                }
            })
            .sum()
    };
    let inv_mu = lam / r;
    let tol = Tolerance::new(1e-13, 1e-12, 50_000)?;
    let mut worst = 0.0f64;
    for &x in x_grid {
        let f0 = forward_gamma_pdf(p, x)?;
        let conv = integrate_1d(
            |t| {
                let u = renewal_density(t);
                if u == 0.0 {
                    0.0
                } else {
                    u * forward_gamma_pdf(p, x - t).unwrap_or(0.0)
                }
            },
            0.0,
            x,
            tol,
        )?;
        worst = worst.max((f0 + conv - inv_mu).abs());
    }
    Ok(worst)
}
