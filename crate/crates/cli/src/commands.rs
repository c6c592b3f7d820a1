use std::fmt;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use qsys::checks::{density_suite, equivalence_suite, renewal_suite, CheckResult};
use qsys::distributions::RngState;
use qsys::estimation::{h_folded_function, h_function, IntegrableFunction, VarianceChoice};
use qsys::expr::{parse_function, GRAMMAR};
use qsys::output::{Cell, OutputRecord};
use qsys::processes::{self, DensityEvaluator};
use qsys::simulation::{
    density_curve, resolve_workers, run_experiment, run_replicates, summarize, summary_record,
    table_config, table_record, target_mean, ExperimentConfig,
};

use crate::{DensityArgs, EstimateArgs, FunctionArg, OutputArgs, SampleArgs, SimulateArgs, Suite, ValidateArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input: exit 2.
    Usage(String),
    /// A run that could not complete: exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<qsys::Error> for CliError {
    fn from(e: qsys::Error) -> Self {
        use qsys::Error::*;
        match e {
            Domain(_) | Singular(_) | Config { .. } | Parse { .. } => CliError::Usage(e.to_string()),
            Numeric { .. } | Sampling(_) | Io(_) => CliError::Failure(e.to_string()),
        }
    }
}

type CliResult = Result<ExitCode, CliError>;

fn emit(rec: &OutputRecord, out: &OutputArgs) -> Result<(), CliError> {
    let text = rec.render(out.format.into())?;
    write_text(&text, out.out.as_deref())
}

fn write_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            match so.write_all(text.as_bytes()).and_then(|_| so.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Failure(format!("cannot write output: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn sample(a: SampleArgs) -> CliResult {
    let spec = a.process.spec()?;
    if a.replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    let mut rec = OutputRecord::new("qsys-sample/1", cols(&["replicate_id", "point_index", "x"]));
    for i in 0..a.replicates {
        let mut rng = RngState::new(a.seed, i as u64);
        let s = processes::sample(&mut rng, &spec)?;
        for (j, &x) in s.points().iter().enumerate() {
            rec.push(vec![i.into(), j.into(), x.into()])?;
        }
    }
    emit(&rec, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

pub fn density(a: DensityArgs) -> CliResult {
    let spec = a.process.spec()?;
    if a.resolution < 2 {
        return Err(CliError::Usage("--resolution must be at least 2".into()));
    }
    let rec = if a.order == 1 {
        if a.x.is_some() {
            return Err(CliError::Usage("--x is only used with --order 2".into()));
        }
        let ev = DensityEvaluator::new(spec)?;
        let mut rec = OutputRecord::new("qsys-density/1", cols(&["x", "pi"]));
        for k in 1..a.resolution {
            let x = k as f64 / a.resolution as f64;
            rec.push(vec![x.into(), ev.first_order(x)?.into()])?;
        }
        rec
    } else {
        let curve = density_curve(&spec, a.x, a.resolution)?;
        let axis = if a.x.is_some() { "y" } else { "h" };
        let mut rec = OutputRecord::new("qsys-density/1", cols(&[axis, "pi2"]));
        for (t, v) in curve.points {
            rec.push(vec![t.into(), v.into()])?;
        }
        rec
    };
    emit(&rec, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn function(kind: FunctionArg, expr: Option<&str>) -> Result<IntegrableFunction, CliError> {
    match (kind, expr) {
        (FunctionArg::Expr, Some(src)) => parse_function(src).map_err(|e| {
            CliError::Usage(format!("{e}\n\nexpression grammar:\n{GRAMMAR}"))
        }),
        (FunctionArg::Expr, None) => Err(CliError::Usage("--function expr requires --expr".into())),
        (_, Some(_)) => Err(CliError::Usage("--expr is only used with --function expr".into())),
        (FunctionArg::H, None) => Ok(h_function()),
        (FunctionArg::HFolded, None) => Ok(h_folded_function()),
    }
}

pub const ESTIMATE_COLUMNS: [&str; 12] = [
    "row",
    "sample_size",
    "mean_hat",
    "var_hat_cordy",
    "var_hat_syg",
    "selected",
    "ci_lo",
    "ci_hi",
    "covered",
    "rmse",
    "target_mean",
    "error",
];

fn choice_name(c: VarianceChoice) -> &'static str {
    match c {
        VarianceChoice::Cordy => "cordy",
        VarianceChoice::Syg => "syg",
    }
}

pub fn estimate(a: EstimateArgs) -> CliResult {
    let spec = a.process.spec()?;
    let z = function(a.function, a.expr.as_deref())?;
    if a.replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage(format!("--level must lie in (0,1), got {}", a.level)));
    }
    let target = target_mean(&z)?;
    let workers = resolve_workers(a.workers);
    let results = run_replicates(&spec, 0, &z, a.replicates, a.seed, a.level, true, workers)?;
    let mut rec = OutputRecord::new("qsys-estimate/1", cols(&ESTIMATE_COLUMNS));
    for r in &results {
        let row = match &r.outcome {
            Ok(rep) => vec![
                r.replicate.into(),
                rep.sample_size.into(),
                rep.mean_hat.into(),
                rep.var_hat_cordy.into(),
                rep.var_hat_syg.into(),
                choice_name(rep.selected).into(),
                rep.ci_lo.into(),
                rep.ci_hi.into(),
                Cell::Int(rep.covers(target) as i64),
                Cell::Missing,
                target.into(),
                Cell::Missing,
            ],
            Err(e) => {
                let mut row = vec![r.replicate.into()];
                row.extend(std::iter::repeat_n(Cell::Missing, 9));
                row.extend([target.into(), e.to_string().into()]);
                row
            }
        };
        rec.push(row)?;
    }
    let mut failures = Vec::new();
    let s = summarize(spec, &results, target, true, true, &mut failures);
    let (cordy, syg) = match s.var_estimator {
        Some(VarianceChoice::Cordy) => (s.mean_var_hat, None),
        Some(VarianceChoice::Syg) => (None, s.mean_var_hat),
        None => (None, None),
    };
    rec.push(vec![
        "summary".into(),
        s.mean_sample_size.into(),
        s.mean_of_estimates.into(),
        cordy.into(),
        syg.into(),
        s.var_estimator.map_or(Cell::Missing, |c| choice_name(c).into()),
        Cell::Missing,
        Cell::Missing,
        s.coverage_rate.into(),
        s.rmse.into(),
        target.into(),
        if s.n_failed > 0 {
            format!("{} failed replicates", s.n_failed).into()
        } else {
            Cell::Missing
        },
    ])?;
    emit(&rec, &a.output)?;
    if s.n_failed > 0 {
        eprintln!("warning: {} of {} replicates failed", s.n_failed, s.replicates);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let (mut cfg, table) = match (a.table, &a.config) {
        (Some(k), None) => (table_config(k)?, Some(k)),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read --config {}: {e}", path.display())))?;
            (ExperimentConfig::from_json(&text)?, None)
        }
        _ => return Err(CliError::Usage("exactly one of --table and --config is required".into())),
    };
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    cfg.validate()?;
    let summary = run_experiment(&cfg, resolve_workers(a.workers))?;
    let rec = match table {
        Some(k) => table_record(k, &summary)?,
        None => summary_record(&summary)?,
    };
    emit(&rec, &a.output)?;
    if let Some(p) = &a.summary_json {
        write_text(&summary.to_json(), Some(p))?;
    }
    if !summary.failures.is_empty() {
        eprintln!("warning: {} recorded failures", summary.failures.len());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: ValidateArgs) -> CliResult {
    let mut checks: Vec<CheckResult> = Vec::new();
    if matches!(a.suite, Suite::Renewal | Suite::All) {
        checks.extend(renewal_suite()?);
    }
    if matches!(a.suite, Suite::Densities | Suite::All) {
        checks.extend(density_suite()?);
    }
    if matches!(a.suite, Suite::Equivalence | Suite::All) {
        if a.replicates < 2 {
            return Err(CliError::Usage("--replicates must be at least 2".into()));
        }
        checks.extend(equivalence_suite(a.seed, a.replicates)?);
    }
    let mut out = String::new();
    for c in &checks {
        let op = if c.suite == "equivalence" { ">" } else { "<" };
        out.push_str(&format!(
            "{} {:<12} {}: {:.3e} (need {op} {:.0e})\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.value,
            c.limit
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    write_text(&out, None)?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
