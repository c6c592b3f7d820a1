//! Globally adaptive Gauss-Legendre quadrature.
//!
//! Each panel carries a 10-point rule on its two halves; the panel error is
//! the difference between the whole-panel rule and the sum of the halves.
//! The worst panel is bisected until the summed error meets the tolerance.
//! Repeated bisection of the panel touching a singular endpoint is the
//! geometric (ratio 1/2) refinement that integrable `t^(a-1)` endpoint
//! behaviour needs; panels may be split down to [`MAX_DEPTH`] levels, or until
//! they are a few ulps wide. Near a nonzero endpoint that resolution limit
//! leaves an unresolved slice of width ~1e-15, which bounds the attainable
//! accuracy for strong singularities there.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use super::Tolerance;
use crate::error::{Error, Result};

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 200;

/// Quadrature nodes and weights on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Grid1D {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[lo, hi]`, nodes by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<Grid1D> {
    if n == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!(
            "gauss_legendre needs n >= 1 and finite lo < hi, got n={n} [{lo}, {hi}]"
        )));
    }
    let (x, w) = legendre_nodes(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(Grid1D {
        nodes: x.iter().map(|&t| mid + half * t).collect(),
        weights: w.iter().map(|&v| half * v).collect(),
    })
}

fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn standard_rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = legendre_nodes(ORDER);
        let mut xa = [0.0; ORDER];
        let mut wa = [0.0; ORDER];
        xa.copy_from_slice(&x);
        wa.copy_from_slice(&w);
        (xa, wa)
    })
}

#[inline]
fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = standard_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut s = 0.0;
    for k in 0..ORDER {
        let t = mid + half * x[k];
        // Only on panels a few ulps wide: the node rounds onto an endpoint.
        if t <= a || t >= b {
            continue;
        }
        s += w[k] * f(t);
    }
    s * half
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
    depth: u32,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, depth: u32) -> Self {
        let m = 0.5 * (a + b);
        let left = rule(f, a, m);
        let right = rule(f, m, b);
        Panel {
            a,
            b,
            left,
            right,
            err: (left + right - whole).abs(),
            depth,
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }

    fn splittable(&self) -> bool {
        let scale = self.a.abs().max(self.b.abs());
        self.depth < MAX_DEPTH && self.b - self.a > 16.0 * f64::EPSILON * scale
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// A converged integral with the summed panel error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// Adaptive integral of `f` over `[points[0], points[last]]`, with the
/// interior points as forced panel boundaries (kinks, peaks, singularities).
pub fn integrate_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    integrate_breakpoints_estimate(f, points, tol).map(|q| q.value)
}

/// As [`integrate_breakpoints`], also returning the error estimate.
pub fn integrate_breakpoints_estimate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<QuadratureEstimate> {
    tol.validate()?;
    if points.len() < 2 {
        return Err(Error::domain("integration needs at least two breakpoints"));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain(format!(
            "breakpoints must be finite and ascending, got {points:?}"
        )));
    }

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let whole = rule(&f, w[0], w[1]);
            heap.push(Panel::new(&f, w[0], w[1], whole, 0));
        }
    }
    if heap.is_empty() {
        return Ok(QuadratureEstimate {
            value: 0.0,
            error_bound: 0.0,
        });
    }

    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut iter = 0usize;
    loop {
        let (value, err, magnitude) = totals(&heap, frozen_value, frozen_err);
        if !value.is_finite() {
            return Err(Error::domain("integrand is not finite on the integration range"));
        }
        // Panels frozen at ulp resolution cannot be improved in double precision,
        // so only the live panels are held to the target.
        let live_err = err - frozen_err;
        if live_err <= tol.target(value).max(64.0 * f64::EPSILON * magnitude) {
            return Ok(QuadratureEstimate {
                value,
                error_bound: err,
            });
        }
        if iter >= tol.max_iter || heap.is_empty() {
            return Err(Error::Numeric {
                message: format!("adaptive quadrature did not converge after {iter} subdivisions"),
                estimate: value,
                error_bound: err,
            });
        }
        // Refine in batches: the totals above are O(panels), so amortise.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            if !worst.splittable() {
                frozen_value += worst.value();
                frozen_err += worst.err;
                continue;
            }
            let m = 0.5 * (worst.a + worst.b);
            heap.push(Panel::new(&f, worst.a, m, worst.left, worst.depth + 1));
            heap.push(Panel::new(&f, m, worst.b, worst.right, worst.depth + 1));
            iter += 1;
            if iter >= tol.max_iter {
                break;
            }
        }
    }
}

fn totals(heap: &BinaryHeap<Panel>, frozen_value: f64, frozen_err: f64) -> (f64, f64, f64) {
    let mut value = super::CompensatedSum::new();
    value.add(frozen_value);
    let mut err = frozen_err;
    let mut magnitude = frozen_value.abs();
    for p in heap.iter() {
        value.add(p.value());
        err += p.err;
        magnitude += p.left.abs() + p.right.abs();
    }
    (value.value(), err, magnitude)
}

/// `∫_lo^hi f`. Integrable endpoint singularities are resolved by repeated
/// halving of the end panels.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    integrate_breakpoints(f, &[lo, 0.5 * (lo + hi), hi], tol)
}

/// `∫_lo^∞ f` through the map `x = lo + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, lo: f64, tol: Tolerance) -> Result<f64> {
    if !lo.is_finite() {
        return Err(Error::domain(format!("lower limit must be finite, got {lo}")));
    }
    let g = |t: f64| {
        let s = 1.0 - t;
        let x = lo + t / s;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    };
    integrate_breakpoints(g, &[0.0, 0.5, 1.0], tol)
}

/// `∫∫_{[0,1]²} f(x, y) dy dx` as an iterated integral. The inner integral is
/// split at the diagonal `y = x` so that `|x - y|^(r-1)` behaviour, including
/// `0 < r < 1`, sits on a panel endpoint.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, tol: Tolerance) -> Result<f64> {
    tol.validate()?;
    let inner_tol = Tolerance {
        abs: tol.abs * 0.05,
        rel: tol.rel * 0.05,
        max_iter: tol.max_iter,
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer = |x: f64| {
        let inner = integrate_breakpoints(|y| f(x, y), &[0.0, x, 1.0], inner_tol);
        match inner {
            Ok(v) => v,
            Err(Error::Numeric { estimate, .. }) => {
                failure.borrow_mut().get_or_insert(Error::Numeric {
                    message: format!("inner integral did not converge at x = {x}"),
                    estimate,
                    error_bound: f64::NAN,
                });
                estimate
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_1d(outer, 0.0, 1.0, tol);
    if let Some(e) = failure.into_inner() {
        return Err(match (e, &result) {
            (Error::Numeric { message, .. }, Ok(v)) => Error::Numeric {
                message,
                estimate: *v,
                error_bound: f64::NAN,
            },
            (e, _) => e,
        });
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{ln_beta, ln_gamma};

    fn tight() -> Tolerance {
        Tolerance::new(0.0, 1e-12, 20_000).unwrap()
    }

    #[test]
    fn gauss_legendre_weights_sum_to_length() {
        for n in [1, 2, 5, 10, 33] {
            let g = gauss_legendre(n, -0.5, 2.0).unwrap();
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.5).abs() / 2.5 < 1e-12);
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(g.weights.iter().all(|&w| w > 0.0));
        }
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        let g = gauss_legendre(6, 0.0, 1.0).unwrap();
        for k in 0..12 {
            let v = g.integrate(|x| x.powi(k));
            assert!((v - 1.0 / (k + 1) as f64).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn constant_integrand() {
        let v = integrate_1d(|_| 3.25, 0.0, 1.0, tight()).unwrap();
        assert!((v - 3.25).abs() < 1e-14);
    }

    #[test]
    fn gamma_kernel_matches_log_gamma() {
        let r = 3.0;
        let v = integrate_1d(|x: f64| x.powf(r - 1.0) * (-x).exp(), 0.0, 50.0, tight()).unwrap();
        let g = ln_gamma(r).exp();
        assert!(((v - g) / g).abs() < 1e-8);
    }

    #[test]
    fn beta_density_normalizes() {
        let v = integrate_1d(|x| 6.0 * x * (1.0 - x), 0.0, 1.0, tight()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        for &(a, b) in &[(0.5, 2.0), (0.8, 0.8), (0.7, 3.0), (2.0, 9.0), (12.0, 40.0)] {
            let lb = ln_beta(a, b);
            let pdf = |x: f64| ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - lb).exp();
            let v = integrate_1d(pdf, 0.0, 1.0, tight()).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "Beta({a},{b}) -> {v}");
        }
    }

    #[test]
    fn gamma_densities_normalize() {
        for &(r, rate) in &[(0.5, 1.0), (1.0, 2.0), (2.5, 0.7), (30.0, 300.0)] {
            let lg = ln_gamma(r);
            let pdf = |x: f64| {
                if x == 0.0 {
                    return 0.0;
                }
                (r * f64::ln(rate) + (r - 1.0) * x.ln() - rate * x - lg).exp()
            };
            let v = integrate_to_infinity(pdf, 0.0, tight()).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "Gamma({r},{rate}) -> {v}");
        }
    }

    #[test]
    fn endpoint_singularities() {
        // ∫ t^(a-1) on [0,1] = 1/a for a >= 1/2, singular at either end
        for &a in &[0.5, 0.6, 0.8, 1.5] {
            let v = integrate_1d(|t: f64| t.powf(a - 1.0), 0.0, 1.0, tight()).unwrap();
            assert!((v * a - 1.0).abs() < 1e-8, "a={a}: {v}");
        }
        // at a nonzero endpoint the resolution is limited by the spacing of doubles
        for &a in &[0.7, 0.8, 1.5] {
            let v = integrate_1d(|t: f64| (1.0 - t).powf(a - 1.0), 0.0, 1.0, tight()).unwrap();
            assert!((v * a - 1.0).abs() < 1e-8, "a={a}: {v}");
        }
    }

    #[test]
    fn breakpoints_resolve_kinks() {
        let v = integrate_breakpoints(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], tight()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
        assert!(integrate_breakpoints(|x| x, &[1.0, 0.0], tight()).is_err());
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let tol = Tolerance::new(0.0, 1e-15, 3).unwrap();
        match integrate_1d(|x: f64| (50.0 * x).sin(), 0.0, 10.0, tol) {
            Err(Error::Numeric { estimate, error_bound, .. }) => {
                assert!(estimate.is_finite());
                assert!(error_bound > 0.0);
            }
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_a_domain_error() {
        assert!(matches!(
            integrate_1d(|_| f64::NAN, 0.0, 1.0, tight()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn two_dimensional_closed_forms() {
        let tol = Tolerance::new(0.0, 1e-10, 20_000).unwrap();
        let v = integrate_2d(|_, _| 1.0, tol).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = integrate_2d(|x, y| (x - y).abs(), tol).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-10);
        // diagonal singularity with exponent r - 1 = -0.4
        let v = integrate_2d(|x: f64, y: f64| (x - y).abs().powf(-0.4), tol).unwrap();
        // ∫∫|x-y|^(s) = 2 / ((s+1)(s+2))
        let exact = 2.0 / (0.6 * 1.6);
        assert!((v - exact).abs() / exact < 1e-7, "{v} vs {exact}");
    }

    #[test]
    fn two_dimensional_separable_matches_iterated_1d() {
        let tol = Tolerance::new(0.0, 1e-11, 20_000).unwrap();
        let fx = |x: f64| (3.0 * x).sin() + 2.0;
        let gy = |y: f64| (-y * y).exp();
        let v = integrate_2d(|x, y| fx(x) * gy(y), tol).unwrap();
        let a = integrate_1d(fx, 0.0, 1.0, tol).unwrap();
        let b = integrate_1d(gy, 0.0, 1.0, tol).unwrap();
        assert!((v - a * b).abs() / (a * b) < 1e-10);
    }
}
