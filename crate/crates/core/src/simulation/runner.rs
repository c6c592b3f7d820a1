use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, OutputKind};
use super::probes::{density_curve, DensityCurve, DEFAULT_CURVE_RESOLUTION, DEFAULT_CURVE_X};
use crate::distributions::RngState;
use crate::error::{Error, Result};
use crate::estimation::{
    estimate, ht_mean, true_variance, EstimateReport, IntegrableFunction, VarianceChoice,
};
use crate::numerics::{integrate_1d, CompensatedSum, Tolerance};
use crate::processes::{sample, DensityEvaluator, ProcessSpec};

pub const SUMMARY_SCHEMA: &str = "qsys-summary/1";

/// Stream index of replicate `i` of spec `j`.
pub fn replicate_stream(spec_index: usize, replicate: usize) -> u64 {
    ((spec_index as u64) << 32) + replicate as u64
}

/// The number of worker threads: `requested`, or the machine's parallelism.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    requested
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))
}

/// One replicate's estimate, or the error it raised.
#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub outcome: Result<EstimateReport>,
}

fn one_replicate(
    spec: &ProcessSpec,
    ev: &DensityEvaluator,
    z: &IntegrableFunction,
    seed: u64,
    stream: u64,
    ci_level: f64,
    with_variance: bool,
) -> Result<EstimateReport> {
    let mut rng = RngState::new(seed, stream);
    let s = sample(&mut rng, spec)?;
    if with_variance {
        return estimate(&s, z, ev, ci_level);
    }
    Ok(EstimateReport {
        mean_hat: ht_mean(&s, z, ev)?,
        var_hat_cordy: None,
        var_hat_syg: None,
        selected: if ev.is_fixed_size() {
            VarianceChoice::Syg
        } else {
            VarianceChoice::Cordy
        },
        ci_lo: None,
        ci_hi: None,
        sample_size: s.len(),
    })
}

/// Runs `replicates` independent replicates of one process. Replicate `i`
/// draws from stream `spec_index · 2³² + i`, so the results do not depend on
/// `workers`. Results come back in replicate order.
#[allow(clippy::too_many_arguments)]
pub fn run_replicates(
    spec: &ProcessSpec,
    spec_index: usize,
    z: &IntegrableFunction,
    replicates: usize,
    master_seed: u64,
    ci_level: f64,
    with_variance: bool,
    workers: usize,
) -> Result<Vec<ReplicateResult>> {
    let ev = DensityEvaluator::new(*spec)?;
    let pool = pool(workers)?;
    Ok(pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|i| ReplicateResult {
                replicate: i,
                outcome: one_replicate(
                    spec,
                    &ev,
                    z,
                    master_seed,
                    replicate_stream(spec_index, i),
                    ci_level,
                    with_variance,
                ),
            })
            .collect()
    }))
}

/// Per-process aggregate over all replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub label: String,
    pub spec: ProcessSpec,
    pub replicates: usize,
    pub n_failed: usize,
    pub n_empty_samples: usize,
    pub mean_sample_size: f64,
    pub mean_of_estimates: f64,
    pub mean_of_estimates_se: f64,
    pub bias: f64,
    /// Population variance of the estimates, so `rmse² = bias² + var_of_estimates`.
    pub var_of_estimates: f64,
    pub rmse: f64,
    pub rmse_se: f64,
    pub var_estimator: Option<VarianceChoice>,
    pub mean_var_hat: Option<f64>,
    pub mean_var_hat_se: Option<f64>,
    pub sd_var_hat: Option<f64>,
    pub n_negative_var: Option<usize>,
    pub true_var: Option<f64>,
    pub true_var_error_bound: Option<f64>,
    /// Failed replicates and absent intervals count as non-covering.
    pub coverage_rate: Option<f64>,
    pub coverage_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub label: String,
    /// `None` for failures outside the replicate loop (true variance).
    pub replicate: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub schema_version: String,
    pub function: String,
    pub target_mean: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub ci_level: f64,
    pub rows: Vec<SummaryRow>,
    pub failures: Vec<ReplicateFailure>,
    pub curves: Vec<DensityCurve>,
}

impl SimulationSummary {
    pub fn row(&self, spec: &ProcessSpec) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| &r.spec == spec)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialises");
        s.push('\n');
        s
    }
}

/// The mean used as the RMSE and coverage target: the known mean, or a
/// tight quadrature of `z`.
pub fn target_mean(z: &IntegrableFunction) -> Result<f64> {
    match z.known_mean() {
        Some(m) => Ok(m),
        None => integrate_1d(|x| z.eval(x), 0.0, 1.0, Tolerance::new(1e-13, 1e-12, 200_000)?),
    }
}

fn true_variance_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-10,
        rel: 1e-8,
        max_iter: 50_000,
    }
}

fn sample_sd(sum_sq_dev: f64, n: usize) -> f64 {
    if n < 2 {
        f64::NAN
    } else {
        (sum_sq_dev / (n - 1) as f64).sqrt()
    }
}

#[allow(clippy::too_many_arguments)]
fn aggregate(
    label: String,
    spec: ProcessSpec,
    results: &[ReplicateResult],
    target: f64,
    with_var: bool,
    with_coverage: bool,
    true_var: Option<(f64, f64)>,
    failures: &mut Vec<ReplicateFailure>,
) -> SummaryRow {
    let ok: Vec<&EstimateReport> = results
        .iter()
        .filter_map(|r| match &r.outcome {
            Ok(rep) => Some(rep),
            Err(e) => {
                failures.push(ReplicateFailure {
                    label: label.clone(),
                    replicate: Some(r.replicate),
                    message: e.to_string(),
                });
                None
            }
        })
        .collect();
    let m = ok.len();
    let mf = m as f64;

    let mean = ok.iter().map(|r| r.mean_hat).fold(CompensatedSum::new(), acc).value() / mf;
    let mut dev2 = CompensatedSum::new();
    let mut err2 = CompensatedSum::new();
    let mut size = CompensatedSum::new();
    for r in &ok {
        let d = r.mean_hat - mean;
        dev2.add(d * d);
        let e = r.mean_hat - target;
        err2.add(e * e);
        size.add(r.sample_size as f64);
    }
    let mse = err2.value() / mf;
    let rmse = mse.sqrt();
    let mut err4_dev = CompensatedSum::new();
    for r in &ok {
        let e = r.mean_hat - target;
        let d = e * e - mse;
        err4_dev.add(d * d);
    }
    let rmse_se = sample_sd(err4_dev.value(), m) / mf.sqrt() / (2.0 * rmse);

    let var_estimator = with_var.then(|| ok.first().map(|r| r.selected)).flatten();
    let vars: Vec<f64> = if with_var {
        ok.iter().filter_map(|r| r.selected_variance()).collect()
    } else {
        Vec::new()
    };
    let (mean_var_hat, mean_var_hat_se, sd_var_hat, n_negative_var) = if with_var && !vars.is_empty() {
        let k = vars.len();
        let mv = vars.iter().copied().fold(CompensatedSum::new(), acc).value() / k as f64;
        let sq = vars
            .iter()
            .map(|v| (v - mv) * (v - mv))
            .fold(CompensatedSum::new(), acc)
            .value();
        let sd = sample_sd(sq, k);
        (
            Some(mv),
            Some(sd / (k as f64).sqrt()),
            Some(sd),
            Some(vars.iter().filter(|&&v| v < 0.0).count()),
        )
    } else {
        (None, None, None, None)
    };
    let (coverage_rate, coverage_se) = if with_coverage {
        let covered = ok.iter().filter(|r| r.covers(target)).count();
        let n = results.len() as f64;
        let p = covered as f64 / n;
        (Some(p), Some((p * (1.0 - p) / n).sqrt()))
    } else {
        (None, None)
    };

    SummaryRow {
        label,
        spec,
        replicates: results.len(),
        n_failed: results.len() - m,
        n_empty_samples: ok.iter().filter(|r| r.sample_size == 0).count(),
        mean_sample_size: size.value() / mf,
        mean_of_estimates: mean,
        mean_of_estimates_se: sample_sd(dev2.value(), m) / mf.sqrt(),
        bias: mean - target,
        var_of_estimates: dev2.value() / mf,
        rmse,
        rmse_se,
        var_estimator,
        mean_var_hat,
        mean_var_hat_se,
        sd_var_hat,
        n_negative_var,
        true_var: true_var.map(|t| t.0),
        true_var_error_bound: true_var.map(|t| t.1),
        coverage_rate,
        coverage_se,
    }
}

/// Aggregates replicate results for one process. Errors are appended to
/// `failures` and excluded from every mean; they count as non-covering.
pub fn summarize(
    spec: ProcessSpec,
    results: &[ReplicateResult],
    target: f64,
    with_variance: bool,
    with_coverage: bool,
    failures: &mut Vec<ReplicateFailure>,
) -> SummaryRow {
    aggregate(spec.to_string(), spec, results, target, with_variance, with_coverage, None, failures)
}

fn acc(mut s: CompensatedSum, x: f64) -> CompensatedSum {
    s.add(x);
    s
}

/// Runs every process of the grid and aggregates serially, so the summary is
/// bitwise identical for any worker count.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<SimulationSummary> {
    cfg.validate()?;
    let z = cfg.function.build()?;
    let target = target_mean(&z)?;
    let mut rows = Vec::with_capacity(cfg.spec_grid.len());
    let mut failures = Vec::new();
    let mut curves = Vec::new();
    for (j, spec) in cfg.spec_grid.iter().enumerate() {
        let label = spec.to_string();
        let results = run_replicates(
            spec,
            j,
            &z,
            cfg.replicates,
            cfg.master_seed,
            cfg.ci_level,
            cfg.needs_variance(),
            workers,
        )?;
        let tv = if cfg.wants(OutputKind::VarTable) {
            let ev = DensityEvaluator::new(*spec)?;
            match true_variance(&ev, &z, true_variance_tolerance()) {
                Ok(t) => Some((t.value, t.quadrature_error_bound)),
                Err(e) => {
                    failures.push(ReplicateFailure {
                        label: label.clone(),
                        replicate: None,
                        message: format!("true variance: {e}"),
                    });
                    None
                }
            }
        } else {
            None
        };
        rows.push(aggregate(
            label.clone(),
            *spec,
            &results,
            target,
            cfg.needs_variance(),
            cfg.wants(OutputKind::Coverage),
            tv,
            &mut failures,
        ));
        if cfg.wants(OutputKind::DensityCurves) && !matches!(spec, ProcessSpec::Systematic { .. }) {
            let x = matches!(spec, ProcessSpec::SystBinomial { .. } | ProcessSpec::Binomial { .. })
                .then_some(DEFAULT_CURVE_X);
            match density_curve(spec, x, DEFAULT_CURVE_RESOLUTION) {
                Ok(c) => curves.push(c),
                Err(e) => failures.push(ReplicateFailure {
                    label,
                    replicate: None,
                    message: format!("density curve: {e}"),
                }),
            }
        }
    }
    Ok(SimulationSummary {
        schema_version: SUMMARY_SCHEMA.into(),
        function: z.label().to_string(),
        target_mean: target,
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        ci_level: cfg.ci_level,
        rows,
        failures,
        curves,
    })
}
