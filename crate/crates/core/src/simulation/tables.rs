//! Hardcoded experiment grids and their tabular layouts.

use super::config::{ExperimentConfig, FunctionChoice, OutputKind};
use super::runner::{SimulationSummary, SummaryRow};
use crate::error::{Error, Result};
use crate::output::{Cell, OutputRecord};
use crate::processes::ProcessSpec;

pub const RMSE_R_VALUES: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 30.0, 50.0, 100.0];
pub const FOLDED_RMSE_R_VALUES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 30.0];
pub const VAR_TABLE_N_VALUES: [usize; 4] = [30, 50, 70, 100];
pub const RAW_VAR_R_VALUES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 30.0];
pub const FOLDED_VAR_R_VALUES: [f64; 4] = [2.0, 4.0, 8.0, 30.0];
pub const RMSE_N: usize = 30;

fn grid(ns: &[usize], rs: &[f64]) -> Vec<ProcessSpec> {
    rs.iter()
        .flat_map(|&r| ns.iter().map(move |&n| ProcessSpec::SystBinomial { n, r }))
        .collect()
}

fn rmse_grid(rs: &[f64]) -> Vec<ProcessSpec> {
    let mut g = grid(&[RMSE_N], rs);
    g.push(ProcessSpec::Systematic { c: 1.0 / RMSE_N as f64 });
    g
}

/// The grid behind table `k` (1 to 5). Tables 4 and 5 share one grid and
/// both outputs, so one run fills either.
pub fn table_config(k: u8) -> Result<ExperimentConfig> {
    let cfg = match k {
        1 => ExperimentConfig::new(rmse_grid(&RMSE_R_VALUES), FunctionChoice::RawH),
        2 => ExperimentConfig::new(grid(&VAR_TABLE_N_VALUES, &RAW_VAR_R_VALUES), FunctionChoice::RawH)
            .with_outputs(vec![OutputKind::VarTable]),
        3 => ExperimentConfig::new(rmse_grid(&FOLDED_RMSE_R_VALUES), FunctionChoice::FoldedG),
        4 | 5 => ExperimentConfig::new(
            grid(&VAR_TABLE_N_VALUES, &FOLDED_VAR_R_VALUES),
            FunctionChoice::FoldedG,
        )
        .with_outputs(vec![OutputKind::VarTable, OutputKind::Coverage]),
        _ => return Err(Error::config("table", format!("tables are numbered 1 to 5, got {k}"))),
    };
    Ok(cfg)
}

fn column_key(spec: &ProcessSpec) -> String {
    match spec {
        ProcessSpec::SystBinomial { r, .. } => format!("r={r}"),
        ProcessSpec::Systematic { .. } => "systematic".into(),
        other => other.to_string(),
    }
}

fn opt(v: Option<f64>) -> Cell {
    v.into()
}

fn rmse_record(s: &SimulationSummary) -> Result<OutputRecord> {
    let mut cols = vec!["statistic".to_string()];
    for row in &s.rows {
        let k = column_key(&row.spec);
        cols.push(k.clone());
        cols.push(format!("{k}_se"));
    }
    let mut rec = OutputRecord::new("qsys-table-rmse/1", cols);
    let mut rmse = vec![Cell::from("rmse")];
    let mut mean = vec![Cell::from("mean_of_estimates")];
    for row in &s.rows {
        rmse.extend([row.rmse.into(), row.rmse_se.into()]);
        mean.extend([row.mean_of_estimates.into(), row.mean_of_estimates_se.into()]);
    }
    rec.push(rmse)?;
    rec.push(mean)?;
    Ok(rec)
}

fn r_of(row: &SummaryRow) -> Option<(usize, f64)> {
    match row.spec {
        ProcessSpec::SystBinomial { n, r } => Some((n, r)),
        _ => None,
    }
}

/// Rows by `r`, columns by `n`, with `cells` columns per `n`.
fn grid_record(
    s: &SimulationSummary,
    schema: &str,
    stats: &[&str],
    cells: impl Fn(&SummaryRow) -> Vec<Cell>,
) -> Result<OutputRecord> {
    let mut ns: Vec<usize> = s.rows.iter().filter_map(r_of).map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut rs: Vec<f64> = Vec::new();
    for p in s.rows.iter().filter_map(r_of) {
        if !rs.contains(&p.1) {
            rs.push(p.1);
        }
    }
    let mut cols = vec!["r".to_string()];
    for n in &ns {
        cols.extend(stats.iter().map(|st| format!("n={n}_{st}")));
    }
    let mut rec = OutputRecord::new(schema, cols);
    for r in rs {
        let mut row = vec![Cell::Float(r)];
        for &n in &ns {
            match s.rows.iter().find(|x| r_of(x) == Some((n, r))) {
                Some(x) => row.extend(cells(x)),
                None => row.extend(stats.iter().map(|_| Cell::Missing)),
            }
        }
        rec.push(row)?;
    }
    Ok(rec)
}

/// Lays out a summary as table `k`, with Monte Carlo standard errors alongside.
pub fn table_record(k: u8, s: &SimulationSummary) -> Result<OutputRecord> {
    match k {
        1 | 3 => rmse_record(s),
        2 | 4 => grid_record(
            s,
            "qsys-table-variance/1",
            &["mean_var_hat", "mean_var_hat_se", "sd_var_hat", "true_var", "n_negative_var"],
            |x| {
                vec![
                    opt(x.mean_var_hat),
                    opt(x.mean_var_hat_se),
                    opt(x.sd_var_hat),
                    opt(x.true_var),
                    x.n_negative_var.map_or(Cell::Missing, Cell::from),
                ]
            },
        ),
        5 => grid_record(s, "qsys-table-coverage/1", &["coverage", "coverage_se"], |x| {
            vec![opt(x.coverage_rate), opt(x.coverage_se)]
        }),
        _ => Err(Error::config("table", format!("tables are numbered 1 to 5, got {k}"))),
    }
}

pub const SUMMARY_COLUMNS: [&str; 22] = [
    "label",
    "kind",
    "replicates",
    "n_failed",
    "n_empty_samples",
    "mean_sample_size",
    "mean_of_estimates",
    "mean_of_estimates_se",
    "bias",
    "var_of_estimates",
    "rmse",
    "rmse_se",
    "var_estimator",
    "mean_var_hat",
    "mean_var_hat_se",
    "sd_var_hat",
    "n_negative_var",
    "true_var",
    "true_var_error_bound",
    "coverage_rate",
    "coverage_se",
    "target_mean",
];

/// One row per process with every summary statistic.
pub fn summary_record(s: &SimulationSummary) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new(
        "qsys-summary-table/1",
        SUMMARY_COLUMNS.iter().map(|c| c.to_string()).collect(),
    );
    for x in &s.rows {
        rec.push(vec![
            x.label.clone().into(),
            x.spec.kind_name().into(),
            x.replicates.into(),
            x.n_failed.into(),
            x.n_empty_samples.into(),
            x.mean_sample_size.into(),
            x.mean_of_estimates.into(),
            x.mean_of_estimates_se.into(),
            x.bias.into(),
            x.var_of_estimates.into(),
            x.rmse.into(),
            x.rmse_se.into(),
            x.var_estimator.map_or(Cell::Missing, |v| {
                Cell::from(match v {
                    crate::estimation::VarianceChoice::Cordy => "cordy",
                    crate::estimation::VarianceChoice::Syg => "syg",
                })
            }),
            opt(x.mean_var_hat),
            opt(x.mean_var_hat_se),
            opt(x.sd_var_hat),
            x.n_negative_var.map_or(Cell::Missing, Cell::from),
            opt(x.true_var),
            opt(x.true_var_error_bound),
            opt(x.coverage_rate),
            opt(x.coverage_se),
            s.target_mean.into(),
        ])?;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::run_experiment;

    #[test]
    fn grids_have_expected_shapes() {
        assert_eq!(table_config(1).unwrap().spec_grid.len(), 8);
        assert_eq!(table_config(2).unwrap().spec_grid.len(), 20);
        assert_eq!(table_config(3).unwrap().spec_grid.len(), 6);
        assert_eq!(table_config(4).unwrap(), table_config(5).unwrap());
        assert!(table_config(6).is_err());
        for k in 1..=5 {
            table_config(k).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn layouts() {
        let cfg = table_config(5).unwrap().with_replicates(20);
        let s = run_experiment(&cfg, 1).unwrap();
        let rec = table_record(5, &s).unwrap();
        assert_eq!(rec.rows.len(), 4);
        assert_eq!(rec.columns.len(), 1 + 2 * 4);
        assert_eq!(rec.columns[1], "n=30_coverage");
        let rec = table_record(4, &s).unwrap();
        assert_eq!(rec.columns.len(), 1 + 5 * 4);

        let cfg = table_config(3).unwrap().with_replicates(20);
        let s = run_experiment(&cfg, 1).unwrap();
        let rec = table_record(3, &s).unwrap();
        assert_eq!(rec.columns.last().unwrap(), "systematic_se");
        assert_eq!(rec.rows[0].len(), 13);
        assert_eq!(summary_record(&s).unwrap().rows.len(), 6);
    }
}
