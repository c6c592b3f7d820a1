//! Numerical identity suites: renewal equation, pair-density mass and
//! sampler equivalences.

use serde::Serialize;

use crate::distributions::{GammaParams, RngState};
use crate::error::Result;
use crate::estimation::renewal_identity_residual;
use crate::numerics::{integrate_breakpoints, Tolerance};
use crate::processes::{
    sample_binomial, sample_syst_binomial, sample_syst_binomial_thinning, DensityEvaluator,
    OrderedSample, ProcessSpec,
};
use crate::stats::ks_two_sample;

/// One measured check. For p-value checks `passed` means `value > limit`,
/// otherwise `value < limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

pub const RENEWAL_CASES: [(f64, f64); 4] = [(1.0, 1.0), (2.0, 4.0), (0.5, 1.0), (8.0, 80.0)];

/// Residual of the stationary renewal identity on 100 points of `[0, 3]`.
pub fn renewal_suite() -> Result<Vec<CheckResult>> {
    let grid: Vec<f64> = (0..100).map(|i| 3.0 * i as f64 / 99.0).collect();
    RENEWAL_CASES
        .iter()
        .map(|&(r, l)| {
            let res = renewal_identity_residual(&GammaParams::new(r, l)?, &grid, None)?;
            let limit = if r == 1.0 { 1e-8 } else { 1e-5 };
            Ok(CheckResult {
                suite: "renewal",
                name: format!("gamma(r={r},lambda={l}) residual"),
                value: res,
                limit,
                passed: res < limit,
            })
        })
        .collect()
}

/// `∫∫ π⁽²⁾ = n(n-1)` for `SystBinomial(10, r)`, relative error.
pub fn density_suite() -> Result<Vec<CheckResult>> {
    let n = 10usize;
    let target = (n * (n - 1)) as f64;
    let pts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&r| {
            let ev = DensityEvaluator::new(ProcessSpec::SystBinomial { n, r })?;
            let v = 2.0
                * integrate_breakpoints(
                    |h| {
                        if h <= 0.0 || h >= 1.0 {
                            0.0
                        } else {
                            (1.0 - h) * ev.pi2_lag(h)
                        }
                    },
                    &pts,
                    Tolerance::new(1e-12, 1e-10, 50_000)?,
                )?;
            let e = (v - target).abs() / target;
            Ok(CheckResult {
                suite: "densities",
                name: format!("syst-binomial(n={n},r={r}) pair mass relative error"),
                value: e,
                limit: 1e-6,
                passed: e < 1e-6,
            })
        })
        .collect()
}

fn marginals(
    replicates: usize,
    seed: u64,
    stream: u64,
    mut draw: impl FnMut(&mut RngState) -> Result<OrderedSample>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = RngState::new(seed, stream);
    let mut first = Vec::with_capacity(replicates);
    let mut gap = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let s = draw(&mut rng)?;
        let p = s.points();
        first.push(p[0]);
        gap.push(p[1] - p[0]);
    }
    Ok((first, gap))
}

/// Two-sample KS p-values on the first point and first gap (n = 10):
/// Dirichlet construction at r = 1 vs i.i.d. uniforms, and order-statistic
/// thinning vs Dirichlet at r = 5.
pub fn equivalence_suite(seed: u64, replicates: usize) -> Result<Vec<CheckResult>> {
    let n = 10usize;
    let (a1, a2) = marginals(replicates, seed, 0, |g| sample_syst_binomial(g, n, 1.0))?;
    let (b1, b2) = marginals(replicates, seed, 1, |g| sample_binomial(g, n))?;
    let (c1, c2) = marginals(replicates, seed, 2, |g| sample_syst_binomial_thinning(g, n, 5.0))?;
    let (d1, d2) = marginals(replicates, seed, 3, |g| sample_syst_binomial(g, n, 5.0))?;
    let cases = [
        ("r=1 vs binomial, first point", &a1, &b1),
        ("r=1 vs binomial, first gap", &a2, &b2),
        ("thinning vs dirichlet r=5, first point", &c1, &d1),
        ("thinning vs dirichlet r=5, first gap", &c2, &d2),
    ];
    cases
        .iter()
        .map(|(name, x, y)| {
            let p = ks_two_sample(x, y)?.p_value;
            Ok(CheckResult {
                suite: "equivalence",
                name: format!("{name} KS p-value"),
                value: p,
                limit: 0.01,
                passed: p > 0.01,
            })
        })
        .collect()
}
