//! Log-gamma, regularized incomplete gamma and beta functions, and the
//! standard normal CDF/quantile.

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// Unchecked `ln Γ(x)`; callers guarantee `x > 0`.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_gamma_args(r: f64, x: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(format!("incomplete gamma requires shape > 0, got {r}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// Regularized lower incomplete gamma `P(r, x) = γ(r, x) / Γ(r)`.
pub fn lower_gamma_regularized(r: f64, x: f64) -> Result<f64> {
    check_gamma_args(r, x)?;
    Ok(gamma_pq(r, x).0)
}

/// Regularized upper incomplete gamma `Q(r, x) = Γ(r, x) / Γ(r)`.
pub fn upper_gamma_regularized(r: f64, x: f64) -> Result<f64> {
    check_gamma_args(r, x)?;
    Ok(gamma_pq(r, x).1)
}

/// Returns `(P, Q)`; series below `r + 1`, Lentz continued fraction above.
pub(crate) fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x == f64::INFINITY {
        return (1.0, 0.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let p = (sum.ln() + log_prefactor).exp().min(1.0);
        (p, 1.0 - p)
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let q = (h.ln() + log_prefactor).exp().min(1.0);
        (1.0 - q, q)
    }
}

/// Regularized incomplete beta `I_x(a, b)`, the CDF of `Beta(a, b)`.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::domain(format!("beta_cdf requires a, b > 0, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("beta_cdf requires x in [0, 1], got {x}")));
    }
    Ok(beta_cdf_unchecked(a, b, x))
}

pub(crate) fn beta_cdf_unchecked(a: f64, b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let log_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ((log_front + betacf(a, b, x).ln()).exp() / a).clamp(0.0, 1.0)
    } else {
        (1.0 - (log_front + betacf(b, a, 1.0 - x).ln()).exp() / b).clamp(0.0, 1.0)
    }
}

fn betacf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against `erfc`, giving close to full double precision.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal_quantile requires p in (0, 1), got {p}")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (-p).ln_1p()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_1d, integrate_to_infinity, Tolerance};
    use std::f64::consts::PI;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(rel_err(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        assert!(rel_err(log_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
        // Γ(n) = (n-1)! far out, via a log-factorial sum
        let lf: f64 = (1..100).map(|k| (k as f64).ln()).sum();
        assert!(rel_err(log_gamma(100.0).unwrap(), lf) < 1e-13);
        // x -> 0: ln Γ(x) ≈ -ln x - γ x
        let x: f64 = 1e-6;
        let approx = -x.ln() - 0.5772156649015329 * x;
        assert!(rel_err(log_gamma(x).unwrap(), approx) < 1e-11);
        // Stirling with three correction terms at 1e6
        let x = 1e6_f64;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!(rel_err(log_gamma(x).unwrap(), stirling) < 1e-14);
    }

    #[test]
    fn log_gamma_domain() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn upper_gamma_exponential_tail_and_origin() {
        for &x in &[0.0, 0.1, 1.0, 3.7, 20.0] {
            assert!((upper_gamma_regularized(1.0, x).unwrap() - (-x).exp()).abs() < 1e-15);
        }
        for &r in &[0.3, 1.0, 7.3, 300.0] {
            assert_eq!(upper_gamma_regularized(r, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn upper_gamma_matches_quadrature_oracle() {
        let tol = Tolerance::new(0.0, 1e-13, 10_000).unwrap();
        let oracle = integrate_to_infinity(|t| t * (-t).exp(), 1.0, tol).unwrap();
        let q = upper_gamma_regularized(2.0, 1.0).unwrap();
        assert!(rel_err(q, oracle) < 1e-10, "{q} vs {oracle}");
        assert!(rel_err(q, 2.0 / 1f64.exp()) < 1e-14);
    }

    #[test]
    fn gamma_complement() {
        for &r in &[0.5, 1.0, 2.0, 7.3] {
            for &x in &[0.1, 1.0, 10.0] {
                let p = lower_gamma_regularized(r, x).unwrap();
                let q = upper_gamma_regularized(r, x).unwrap();
                assert!((p + q - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upper_gamma_monotone_large_shape() {
        let mut prev = 1.0;
        for k in 0..200 {
            let x = 2800.0 + 2.0 * k as f64;
            let q = upper_gamma_regularized(3000.0, x).unwrap();
            assert!(q <= prev + 1e-15);
            prev = q;
        }
        // near the median the tail is close to 1/2
        let q = upper_gamma_regularized(3000.0, 3000.0 - 1.0 / 3.0).unwrap();
        assert!((q - 0.5).abs() < 1e-3);
    }

    #[test]
    fn gamma_domain_errors() {
        assert!(upper_gamma_regularized(0.0, 1.0).is_err());
        assert!(upper_gamma_regularized(1.0, -1.0).is_err());
        assert!(lower_gamma_regularized(-2.0, 1.0).is_err());
    }

    #[test]
    fn beta_cdf_basic() {
        assert!((beta_cdf(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
        for &a in &[0.5, 2.0, 17.0, 400.0] {
            assert!((beta_cdf(a, a, 0.5).unwrap() - 0.5).abs() < 1e-12);
        }
        assert_eq!(beta_cdf(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(beta_cdf(2.0, 3.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn beta_cdf_matches_quadrature_oracle() {
        let tol = Tolerance::new(0.0, 1e-13, 10_000).unwrap();
        // Beta(2,3) density 12 t (1-t)^2
        let oracle = integrate_1d(|t| 12.0 * t * (1.0 - t) * (1.0 - t), 0.0, 0.4, tol).unwrap();
        let v = beta_cdf(2.0, 3.0, 0.4).unwrap();
        assert!(rel_err(v, oracle) < 1e-10, "{v} vs {oracle}");
        // non-integer shapes with endpoint singularities
        let (a, b) = (0.6, 3.5);
        let lb = ln_beta(a, b);
        let pdf = |t: f64| ((a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p() - lb).exp();
        let oracle = integrate_1d(pdf, 0.0, 0.27, tol).unwrap();
        assert!(rel_err(beta_cdf(a, b, 0.27).unwrap(), oracle) < 1e-9);
    }

    #[test]
    fn beta_cdf_reflection() {
        for &(a, b) in &[(0.5, 0.7), (2.0, 3.0), (5.0, 45.0), (30.0, 870.0)] {
            for k in 1..20 {
                let x = k as f64 / 20.0;
                let s = beta_cdf(a, b, x).unwrap() + beta_cdf(b, a, 1.0 - x).unwrap();
                assert!((s - 1.0).abs() < 1e-12, "a={a} b={b} x={x}");
            }
        }
    }

    #[test]
    fn beta_cdf_domain() {
        assert!(beta_cdf(1.0, 1.0, 1.5).is_err());
        assert!(beta_cdf(0.0, 1.0, 0.5).is_err());
        assert!(beta_cdf(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn normal_quantile_values() {
        assert!((normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-14);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        for &p in &[1e-10, 0.01, 0.3, 0.9, 0.999999] {
            let x = normal_quantile(p).unwrap();
            assert!(rel_err(normal_cdf(x), p) < 1e-13);
        }
        assert!(normal_quantile(1.0).is_err());
    }
}
