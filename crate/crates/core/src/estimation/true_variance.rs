//! Exact design variance of the HT mean by quadrature.
//!
//! For a process with constant `π` and joint density depending only on the
//! lag `h = |x - y|`, the double integrals collapse onto one dimension:
//!
//! ```text
//! SYG:  V = π⁻² ∫₀¹ (π² - π₂(h)) D(h) dh,   D(h) = ∫₀^{1-h} (z(x) - z(x+h))² dx
//! HT:   V = π⁻¹ ∫ z² + 2 π⁻² ∫₀¹ (π₂(h) - π²) C(h) dh,   C(h) = ∫₀^{1-h} z(x) z(x+h) dx
//! ```
//!
//! Shaped processes go through the iterated two-dimensional route.

use std::cell::Cell;

use serde::Serialize;

use super::function::IntegrableFunction;
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_2d, integrate_breakpoints_estimate, QuadratureEstimate, Tolerance,
};
use crate::processes::{DensityEvaluator, ProcessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceForm {
    HtForm,
    SygForm,
    /// Systematic sampling: average over the random start.
    SystematicShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueVarianceReport {
    pub value: f64,
    pub quadrature_error_bound: f64,
    pub formula_used: VarianceForm,
}

/// SYG form for fixed-size processes, HT form otherwise, the shift average
/// for systematic sampling.
pub fn true_variance(
    ev: &DensityEvaluator,
    z: &IntegrableFunction,
    tol: Tolerance,
) -> Result<TrueVarianceReport> {
    let form = match ev.spec() {
        ProcessSpec::Systematic { .. } => VarianceForm::SystematicShift,
        _ if ev.is_fixed_size() => VarianceForm::SygForm,
        _ => VarianceForm::HtForm,
    };
    true_variance_with_form(ev, z, form, tol)
}

pub fn true_variance_with_form(
    ev: &DensityEvaluator,
    z: &IntegrableFunction,
    form: VarianceForm,
    tol: Tolerance,
) -> Result<TrueVarianceReport> {
    tol.validate()?;
    match (form, ev.spec()) {
        (VarianceForm::SystematicShift, &ProcessSpec::Systematic { c }) if ev.is_stationary() => {
            systematic(c, z, tol)
        }
        (VarianceForm::SystematicShift, _) => Err(Error::domain(
            "the shift-average form applies to unshaped systematic sampling only",
        )),
        (VarianceForm::SygForm, _) if !ev.is_fixed_size() => Err(Error::domain(format!(
            "{}: the SYG form needs a fixed-size process",
            ev.spec()
        ))),
        _ if !ev.has_joint_density() => Err(Error::domain(format!(
            "{}: no joint inclusion density",
            ev.spec()
        ))),
        _ if !ev.is_stationary() => true_variance_2d(ev, z, form, tol),
        (VarianceForm::SygForm, _) => lag_reduced(ev, z, form, tol),
        (VarianceForm::HtForm, _) => lag_reduced(ev, z, form, tol),
    }
}

/// Lag grid aligned with the peaks of `π₂`, which sit near multiples of `1/π`.
fn lag_breakpoints(pi: f64) -> Vec<f64> {
    let k = (pi.floor() as usize).clamp(1, 4096);
    let mut pts: Vec<f64> = (0..=k).map(|i| i as f64 / pi).filter(|&h| h < 1.0).collect();
    pts.push(1.0);
    pts.dedup();
    pts
}

fn lag_reduced(
    ev: &DensityEvaluator,
    z: &IntegrableFunction,
    form: VarianceForm,
    tol: Tolerance,
) -> Result<TrueVarianceReport> {
    let pi = ev.base_first_order();
    let pi2 = pi * pi;
    let inner_tol = Tolerance {
        abs: tol.abs * 1e-2,
        rel: tol.rel * 1e-2,
        max_iter: tol.max_iter,
    };
    let inner_err = Cell::new(0.0f64);
    let failure = Cell::new(None::<Error>);
    let inner = |h: f64, g: &dyn Fn(f64) -> f64| -> f64 {
        match integrate_breakpoints_estimate(g, &[0.0, 0.5 * (1.0 - h), 1.0 - h], inner_tol) {
            Ok(q) => {
                inner_err.set(inner_err.get().max(q.error_bound));
                q.value
            }
            Err(e) => {
                let keep = failure.take().unwrap_or(e);
                failure.set(Some(keep));
                f64::NAN
            }
        }
    };
    let max_w = Cell::new(0.0f64);
    let outer = |h: f64| -> f64 {
        if h <= 0.0 || h >= 1.0 {
            return 0.0;
        }
        let p2 = ev.pi2_lag(h);
        let w = (p2 - pi2) / pi2;
        max_w.set(max_w.get().max(w.abs()));
        let integral = match form {
            VarianceForm::SygForm => inner(h, &|x| {
                let d = z.eval(x) - z.eval(x + h);
                d * d
            }),
            _ => inner(h, &|x| z.eval(x) * z.eval(x + h)),
        };
        if w == 0.0 {
            0.0
        } else {
            w * integral
        }
    };
    let q = integrate_breakpoints_estimate(outer, &lag_breakpoints(pi), tol);
    if let Some(e) = failure.take() {
        return Err(with_estimate(e, q.as_ref().ok().copied()));
    }
    let q = q?;
    let (value, extra) = match form {
        // SYG: π⁻² ∫ (π² - π₂) D = -∫ w D.
        VarianceForm::SygForm => (-q.value, 0.0),
        _ => {
            let sq = integrate_breakpoints_estimate(
                |x| {
                    let v = z.eval(x);
                    v * v
                },
                &[0.0, 0.5, 1.0],
                tol,
            )?;
            (sq.value / pi + 2.0 * q.value, sq.error_bound / pi + q.error_bound)
        }
    };
    Ok(TrueVarianceReport {
        value,
        quadrature_error_bound: q.error_bound + extra + inner_err.get() * max_w.get(),
        formula_used: form,
    })
}

fn with_estimate(e: Error, outer: Option<QuadratureEstimate>) -> Error {
    match e {
        Error::Numeric { message, .. } => Error::Numeric {
            message: format!("inner lag integral: {message}"),
            estimate: outer.map_or(f64::NAN, |q| q.value),
            error_bound: f64::NAN,
        },
        other => other,
    }
}

/// Iterated two-dimensional quadrature of the SYG or HT integrand.
pub fn true_variance_2d(
    ev: &DensityEvaluator,
    z: &IntegrableFunction,
    form: VarianceForm,
    tol: Tolerance,
) -> Result<TrueVarianceReport> {
    let pi = |x: f64| ev.first_order(x).unwrap_or(f64::NAN);
    let p2 = |x: f64, y: f64| ev.second_order(x, y).unwrap_or(f64::NAN);
    let value = match form {
        VarianceForm::SygForm => {
            if !ev.is_fixed_size() {
                return Err(Error::domain("the SYG form needs a fixed-size process"));
            }
            integrate_2d(
                |x, y| {
                    let (px, py) = (pi(x), pi(y));
                    let d = z.eval(x) / px - z.eval(y) / py;
                    let w = px * py - p2(x, y);
                    if d == 0.0 || w == 0.0 {
                        0.0
                    } else {
                        0.5 * d * d * w
                    }
                },
                tol,
            )?
        }
        VarianceForm::HtForm => {
            let diag = integrate_breakpoints_estimate(
                |x| {
                    let v = z.eval(x);
                    v * v / pi(x)
                },
                &[0.0, 0.5, 1.0],
                tol,
            )?
            .value;
            diag + integrate_2d(
                |x, y| {
                    let (px, py) = (pi(x), pi(y));
                    let pp = px * py;
                    let w = p2(x, y) - pp;
                    if w == 0.0 {
                        0.0
                    } else {
                        z.eval(x) * z.eval(y) * w / pp
                    }
                },
                tol,
            )?
        }
        VarianceForm::SystematicShift => {
            return Err(Error::domain("systematic sampling has no two-dimensional form"))
        }
    };
    Ok(TrueVarianceReport {
        value,
        quadrature_error_bound: tol.abs.max(tol.rel * value.abs()),
        formula_used: form,
    })
}

/// `Var = (1/c) ∫₀^c m(u)² du - ((1/c) ∫₀^c m(u) du)²` with `m(u) = c Σ_k z(u + k c)`.
fn systematic(c: f64, z: &IntegrableFunction, tol: Tolerance) -> Result<TrueVarianceReport> {
    let m = |u: f64| {
        let mut s = 0.0;
        let mut k = 0usize;
        loop {
            let x = u + k as f64 * c;
            if x >= 1.0 {
                break;
            }
            s += z.eval(x);
            k += 1;
        }
        c * s
    };
    let mut pts = vec![0.0];
    let full = (1.0 / c).floor();
    let cut = 1.0 - full * c;
    if cut > 0.0 && cut < c {
        pts.push(cut);
    }
    pts.push(c);
    let first = integrate_breakpoints_estimate(m, &pts, tol)?;
    let second = integrate_breakpoints_estimate(
        |u| {
            let v = m(u);
            v * v
        },
        &pts,
        tol,
    )?;
    let mean = first.value / c;
    let value = second.value / c - mean * mean;
    Ok(TrueVarianceReport {
        value,
        quadrature_error_bound: (second.error_bound + 2.0 * mean.abs() * first.error_bound) / c,
        formula_used: VarianceForm::SystematicShift,
    })
}
