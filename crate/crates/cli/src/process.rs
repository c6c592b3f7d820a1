use clap::{Args, ValueEnum};
use qsys::processes::ProcessSpec;

use crate::commands::CliError;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Systematic,
    Binomial,
    Poisson,
    SystPoisson,
    SystBinomial,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Systematic => "systematic",
            Kind::Binomial => "binomial",
            Kind::Poisson => "poisson",
            Kind::SystPoisson => "syst-poisson",
            Kind::SystBinomial => "syst-binomial",
        }
    }

    fn params(self) -> &'static [&'static str] {
        match self {
            Kind::Systematic => &["c"],
            Kind::Binomial => &["n"],
            Kind::Poisson => &["lambda"],
            Kind::SystPoisson => &["r", "lambda"],
            Kind::SystBinomial => &["n", "r"],
        }
    }
}

#[derive(Args, Debug)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Kind,
    /// Sample size (binomial, syst-binomial).
    #[arg(long)]
    pub n: Option<usize>,
    /// Gamma shape of the inter-arrivals (syst-poisson, syst-binomial).
    #[arg(long)]
    pub r: Option<f64>,
    /// Intensity (poisson, syst-poisson).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Systematic step.
    #[arg(long)]
    pub c: Option<f64>,
}

impl ProcessArgs {
    /// Checks that exactly the parameters of the chosen kind are present.
    pub fn spec(&self) -> Result<ProcessSpec, CliError> {
        let k = self.process;
        let given = [
            ("n", self.n.is_some()),
            ("r", self.r.is_some()),
            ("lambda", self.lambda.is_some()),
            ("c", self.c.is_some()),
        ];
        let wanted = k.params();
        let extra: Vec<String> = given
            .iter()
            .filter(|(p, g)| *g && !wanted.contains(p))
            .map(|(p, _)| format!("--{p}"))
            .collect();
        if !extra.is_empty() {
            return Err(CliError::Usage(format!(
                "{} not used by --process {}",
                extra.join(", "),
                k.name()
            )));
        }
        let missing: Vec<String> = wanted
            .iter()
            .filter(|p| !given.iter().any(|(q, g)| q == *p && *g))
            .map(|p| format!("--{p}"))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Usage(format!(
                "--process {} requires {}",
                k.name(),
                missing.join(" and ")
            )));
        }
        let spec = match k {
            Kind::Systematic => ProcessSpec::Systematic { c: self.c.unwrap() },
            Kind::Binomial => ProcessSpec::Binomial { n: self.n.unwrap() },
            Kind::Poisson => ProcessSpec::Poisson {
                lambda: self.lambda.unwrap(),
            },
            Kind::SystPoisson => ProcessSpec::SystPoisson {
                r: self.r.unwrap(),
                lambda: self.lambda.unwrap(),
            },
            Kind::SystBinomial => ProcessSpec::SystBinomial {
                n: self.n.unwrap(),
                r: self.r.unwrap(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}
