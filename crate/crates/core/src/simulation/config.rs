use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimation::{h_folded_function, h_function, IntegrableFunction};
use crate::expr::parse_function;
use crate::processes::ProcessSpec;

pub const CONFIG_SCHEMA: &str = "qsys-config/1";
pub const DEFAULT_REPLICATES: usize = 10_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

/// The function whose mean is estimated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionChoice {
    RawH,
    FoldedG,
    /// An expression in `x`, see [`crate::expr::GRAMMAR`].
    UserSupplied(String),
}

impl FunctionChoice {
    pub fn build(&self) -> Result<IntegrableFunction> {
        match self {
            FunctionChoice::RawH => Ok(h_function()),
            FunctionChoice::FoldedG => Ok(h_folded_function()),
            FunctionChoice::UserSupplied(src) => parse_function(src),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Rmse,
    VarTable,
    Coverage,
    DensityCurves,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub spec_grid: Vec<ProcessSpec>,
    pub function: FunctionChoice,
    pub replicates: usize,
    pub master_seed: u64,
    pub ci_level: f64,
    pub outputs: Vec<OutputKind>,
}

impl ExperimentConfig {
    pub fn new(spec_grid: Vec<ProcessSpec>, function: FunctionChoice) -> Self {
        ExperimentConfig {
            schema: CONFIG_SCHEMA.into(),
            spec_grid,
            function,
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            ci_level: DEFAULT_CI_LEVEL,
            outputs: vec![OutputKind::Rmse],
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_ci_level(mut self, level: f64) -> Self {
        self.ci_level = level;
        self
    }

    pub fn with_outputs(mut self, outputs: Vec<OutputKind>) -> Self {
        self.outputs = outputs;
        self
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    /// Variance estimates are only computed when an output uses them.
    pub fn needs_variance(&self) -> bool {
        self.wants(OutputKind::VarTable) || self.wants(OutputKind::Coverage)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::config(
                "schema",
                format!("expected \"{CONFIG_SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        if self.spec_grid.is_empty() {
            return Err(Error::config("spec_grid", "at least one process is required"));
        }
        let mut seen = HashSet::new();
        for (i, spec) in self.spec_grid.iter().enumerate() {
            let field = format!("spec_grid[{i}]");
            spec.validate().map_err(|e| Error::config(&field, e.to_string()))?;
            if !seen.insert(spec.to_string()) {
                return Err(Error::config(field, format!("duplicate process {spec}")));
            }
            let no_joint = matches!(spec, ProcessSpec::Systematic { .. });
            if self.wants(OutputKind::VarTable) && (!spec.is_fixed_size() || no_joint) {
                return Err(Error::config(
                    "outputs",
                    format!("var_table needs fixed-size processes with a joint density; {field} is {spec}"),
                ));
            }
            if self.wants(OutputKind::Coverage) && no_joint {
                return Err(Error::config(
                    "outputs",
                    format!("coverage needs a variance estimator; {field} is {spec}"),
                ));
            }
        }
        if self.replicates == 0 || self.replicates > u32::MAX as usize {
            return Err(Error::config(
                "replicates",
                format!("must lie in [1, {}], got {}", u32::MAX, self.replicates),
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::config(
                "ci_level",
                format!("must lie in (0,1), got {}", self.ci_level),
            ));
        }
        if self.outputs.is_empty() {
            return Err(Error::config("outputs", "at least one output is required"));
        }
        self.function
            .build()
            .map_err(|e| Error::config("function", e.to_string()))?;
        Ok(())
    }

    /// Parses and validates a JSON config. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::config("<root>", "expected a JSON object"))?;
        const KNOWN: [&str; 7] = [
            "schema",
            "spec_grid",
            "function",
            "replicates",
            "master_seed",
            "ci_level",
            "outputs",
        ];
        if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown field"));
        }
        fn field<T: serde::de::DeserializeOwned>(
            obj: &serde_json::Map<String, Value>,
            name: &str,
        ) -> Result<Option<T>> {
            obj.get(name)
                .map(|v| serde_json::from_value(v.clone()).map_err(|e| Error::config(name, e.to_string())))
                .transpose()
        }
        let require = |name: &str| Error::config(name, "missing required field");

        // Per-entry decoding so the error names the index.
        let grid = obj.get("spec_grid").ok_or_else(|| require("spec_grid"))?;
        let grid = grid
            .as_array()
            .ok_or_else(|| Error::config("spec_grid", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, s)| {
                serde_json::from_value(s.clone()).map_err(|e| Error::config(format!("spec_grid[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<ProcessSpec>>>()?;

        let cfg = ExperimentConfig {
            schema: field(obj, "schema")?.ok_or_else(|| require("schema"))?,
            spec_grid: grid,
            function: field(obj, "function")?.ok_or_else(|| require("function"))?,
            replicates: field(obj, "replicates")?.unwrap_or(DEFAULT_REPLICATES),
            master_seed: field(obj, "master_seed")?.unwrap_or(0),
            ci_level: field(obj, "ci_level")?.unwrap_or(DEFAULT_CI_LEVEL),
            outputs: field(obj, "outputs")?.unwrap_or_else(|| vec![OutputKind::Rmse]),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
