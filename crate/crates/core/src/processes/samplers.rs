use super::spec::{is_strictly_inside_and_increasing, OrderedSample, ProcessSpec};
use crate::distributions::dirichlet::sample_dirichlet_into;
use crate::distributions::{
    sample_exponential, sample_forward_gamma, sample_gamma, GammaParams, RngState,
};
use crate::error::{Error, Result};

/// Runs `draw` and retries once if the points collide or touch an endpoint.
fn with_retry<F>(rng: &mut RngState, spec: ProcessSpec, mut draw: F) -> Result<OrderedSample>
where
    F: FnMut(&mut RngState, &mut Vec<f64>),
{
    let mut pts = Vec::new();
    for _ in 0..2 {
        draw(rng, &mut pts);
        if is_strictly_inside_and_increasing(&pts) {
            return Ok(OrderedSample::new_unchecked(pts, spec, rng.seed(), rng.stream()));
        }
    }
    Err(Error::Sampling(format!(
        "{spec}: coincident points in two consecutive draws"
    )))
}

/// Draws from any process family. `SystBinomial` uses the Dirichlet construction.
pub fn sample(rng: &mut RngState, spec: &ProcessSpec) -> Result<OrderedSample> {
    spec.validate()?;
    match *spec {
        ProcessSpec::Binomial { n } => sample_binomial(rng, n),
        ProcessSpec::Poisson { lambda } => sample_poisson(rng, lambda),
        ProcessSpec::Systematic { c } => sample_systematic(rng, c),
        ProcessSpec::SystPoisson { r, lambda } => sample_syst_poisson(rng, r, lambda),
        ProcessSpec::SystBinomial { n, r } => sample_syst_binomial(rng, n, r),
    }
}

pub fn sample_systematic(rng: &mut RngState, c: f64) -> Result<OrderedSample> {
    let spec = ProcessSpec::Systematic { c };
    spec.validate()?;
    with_retry(rng, spec, |rng, pts| {
        pts.clear();
        let u = c * rng.uniform_open();
        let mut k = 0usize;
        loop {
            let x = u + k as f64 * c;
            if x >= 1.0 {
                break;
            }
            pts.push(x);
            k += 1;
        }
    })
}

pub fn sample_binomial(rng: &mut RngState, n: usize) -> Result<OrderedSample> {
    let spec = ProcessSpec::Binomial { n };
    spec.validate()?;
    with_retry(rng, spec, |rng, pts| {
        pts.clear();
        pts.extend((0..n).map(|_| rng.uniform_open()));
        pts.sort_unstable_by(f64::total_cmp);
    })
}

pub fn sample_poisson(rng: &mut RngState, lambda: f64) -> Result<OrderedSample> {
    let spec = ProcessSpec::Poisson { lambda };
    spec.validate()?;
    with_retry(rng, spec, |rng, pts| {
        pts.clear();
        let mut x = sample_exponential(rng, lambda);
        while x < 1.0 {
            pts.push(x);
            x += sample_exponential(rng, lambda);
        }
    })
}

/// Cumulative circular gaps plus a uniform shift, wrapped into (0,1).
///
/// Positions are `u + S_i` for `i = 0..n-1` with `S_0 = 0`; the last partial
/// sum `S_n = 1` gives `u` again, so it is dropped and no rounding of the
/// full sum ever enters the result. The wrapped sequence is a rotation of an
/// increasing one, so rotating replaces a sort.
fn shift_and_wrap(gaps: &[f64], u: f64, pts: &mut Vec<f64>) {
    pts.clear();
    let mut s = 0.0;
    let mut wrap_at = gaps.len();
    for (i, g) in gaps.iter().enumerate() {
        let mut x = u + s;
        if x >= 1.0 {
            x -= 1.0;
            if wrap_at == gaps.len() {
                wrap_at = i;
            }
        }
        pts.push(x);
        s += g;
    }
    pts.rotate_left(wrap_at % gaps.len().max(1));
}

/// Dirichlet construction of the binomial process: Dir(1_n) gaps, uniform shift.
pub fn sample_binomial_dirichlet(rng: &mut RngState, n: usize) -> Result<OrderedSample> {
    let spec = ProcessSpec::Binomial { n };
    spec.validate()?;
    let mut gaps = Vec::with_capacity(n);
    with_retry(rng, spec, |rng, pts| {
        sample_dirichlet_into(rng, n, 1.0, &mut gaps);
        let u = rng.uniform_open();
        shift_and_wrap(&gaps, u, pts);
    })
}

/// First point `ForG(r, lambda)`, then i.i.d. `Gamma(r, lambda)` gaps until 1 is passed.
/// The result may be empty.
pub fn sample_syst_poisson(rng: &mut RngState, r: f64, lambda: f64) -> Result<OrderedSample> {
    let spec = ProcessSpec::SystPoisson { r, lambda };
    spec.validate()?;
    let p = GammaParams::new(r, lambda)?;
    with_retry(rng, spec, |rng, pts| {
        pts.clear();
        let mut x = sample_forward_gamma(rng, &p);
        while x < 1.0 {
            pts.push(x);
            x += sample_gamma(rng, &p);
        }
    })
}

/// Every r-th order statistic of `n r` uniforms, shifted by a uniform mod 1.
/// `r` must be a positive integer.
pub fn sample_syst_binomial_thinning(rng: &mut RngState, n: usize, r: f64) -> Result<OrderedSample> {
    let spec = ProcessSpec::SystBinomial { n, r };
    spec.validate()?;
    if r.fract() != 0.0 || r > (usize::MAX / n.max(1)) as f64 {
        return Err(Error::domain(format!(
            "thinning needs an integer r, got {r}; use the Dirichlet sampler"
        )));
    }
    let r = r as usize;
    let mut ys = Vec::with_capacity(n * r);
    let mut kept = Vec::with_capacity(n);
    with_retry(rng, spec, |rng, pts| {
        ys.clear();
        ys.extend((0..n * r).map(|_| rng.uniform_open()));
        ys.sort_unstable_by(f64::total_cmp);
        kept.clear();
        kept.extend((1..=n).map(|i| ys[i * r - 1]));
        let u = rng.uniform_open();
        pts.clear();
        pts.extend(kept.iter().map(|&x| {
            let y = x + u;
            if y >= 1.0 {
                y - 1.0
            } else {
                y
            }
        }));
        pts.sort_unstable_by(f64::total_cmp);
    })
}

/// Dir(r 1_n) circular gaps plus a uniform shift mod 1; any real `r > 0`.
pub fn sample_syst_binomial(rng: &mut RngState, n: usize, r: f64) -> Result<OrderedSample> {
    let spec = ProcessSpec::SystBinomial { n, r };
    spec.validate()?;
    let mut gaps = Vec::with_capacity(n);
    with_retry(rng, spec, |rng, pts| {
        sample_dirichlet_into(rng, n, r, &mut gaps);
        let u = rng.uniform_open();
        shift_and_wrap(&gaps, u, pts);
    })
}
