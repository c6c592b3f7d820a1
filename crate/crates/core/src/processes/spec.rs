use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point-process family on (0,1) with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// `n` i.i.d. uniform points.
    Binomial { n: usize },
    /// Homogeneous Poisson process with intensity `lambda`.
    Poisson { lambda: f64 },
    /// Uniform start in `(0, c)` then a step of `c`.
    Systematic { c: f64 },
    /// Forward-Gamma start, Gamma(r, lambda) gaps; expected size `lambda / r`.
    SystPoisson { r: f64, lambda: f64 },
    /// Dir(r 1_n) circular gaps with a uniform shift; size exactly `n`.
    SystBinomial { n: usize, r: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Binomial { n } | ProcessSpec::SystBinomial { n, .. } if n == 0 => {
                Err(Error::domain("sample size n must be at least 1"))
            }
            ProcessSpec::Binomial { .. } => Ok(()),
            ProcessSpec::Poisson { lambda } => positive("lambda", lambda),
            ProcessSpec::Systematic { c } => {
                if c > 0.0 && c < 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("systematic interval c must lie in (0,1), got {c}")))
                }
            }
            ProcessSpec::SystPoisson { r, lambda } => {
                positive("r", r)?;
                positive("lambda", lambda)
            }
            ProcessSpec::SystBinomial { r, .. } => positive("r", r),
        }
    }

    /// True when every realisation has the same number of points.
    pub fn is_fixed_size(&self) -> bool {
        match *self {
            ProcessSpec::Binomial { .. } | ProcessSpec::SystBinomial { .. } => true,
            ProcessSpec::Systematic { c } => {
                let k = (1.0 / c).round();
                (k * c - 1.0).abs() < 1e-12
            }
            ProcessSpec::Poisson { .. } | ProcessSpec::SystPoisson { .. } => false,
        }
    }

    pub fn expected_size(&self) -> f64 {
        match *self {
            ProcessSpec::Binomial { n } | ProcessSpec::SystBinomial { n, .. } => n as f64,
            ProcessSpec::Poisson { lambda } => lambda,
            ProcessSpec::Systematic { c } => 1.0 / c,
            ProcessSpec::SystPoisson { r, lambda } => lambda / r,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProcessSpec::Binomial { .. } => "binomial",
            ProcessSpec::Poisson { .. } => "poisson",
            ProcessSpec::Systematic { .. } => "systematic",
            ProcessSpec::SystPoisson { .. } => "syst-poisson",
            ProcessSpec::SystBinomial { .. } => "syst-binomial",
        }
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProcessSpec::Binomial { n } => write!(f, "binomial(n={n})"),
            ProcessSpec::Poisson { lambda } => write!(f, "poisson(lambda={lambda})"),
            ProcessSpec::Systematic { c } => write!(f, "systematic(c={c})"),
            ProcessSpec::SystPoisson { r, lambda } => {
                write!(f, "syst-poisson(r={r},lambda={lambda})")
            }
            ProcessSpec::SystBinomial { n, r } => write!(f, "syst-binomial(n={n},r={r})"),
        }
    }
}

/// A realisation: strictly increasing points in (0,1) plus where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    points: Vec<f64>,
    spec: ProcessSpec,
    seed: u64,
    stream: u64,
}

impl OrderedSample {
    /// Checks the ordering invariant.
    pub fn new(points: Vec<f64>, spec: ProcessSpec, seed: u64, stream: u64) -> Result<Self> {
        if !is_strictly_inside_and_increasing(&points) {
            return Err(Error::domain(
                "sample points must be strictly increasing and inside (0,1)",
            ));
        }
        Ok(OrderedSample {
            points,
            spec,
            seed,
            stream,
        })
    }

    pub(crate) fn new_unchecked(points: Vec<f64>, spec: ProcessSpec, seed: u64, stream: u64) -> Self {
        debug_assert!(is_strictly_inside_and_increasing(&points));
        OrderedSample {
            points,
            spec,
            seed,
            stream,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Gaps between consecutive points on the unit circle, wrap-around gap last.
    pub fn circular_gaps(&self) -> Vec<f64> {
        let p = &self.points;
        match p.len() {
            0 => Vec::new(),
            1 => vec![1.0],
            k => {
                let mut g: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
                g.push(1.0 - p[k - 1] + p[0]);
                g
            }
        }
    }
}

pub(crate) fn is_strictly_inside_and_increasing(p: &[f64]) -> bool {
    match (p.first(), p.last()) {
        (Some(&a), Some(&b)) if !(a > 0.0 && b < 1.0) => false,
        _ => p.windows(2).all(|w| w[0] < w[1]),
    }
}
