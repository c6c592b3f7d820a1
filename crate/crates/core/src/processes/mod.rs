//! Point processes on (0,1): samplers and inclusion densities.

mod density;
mod samplers;
mod shaped;
mod spec;

pub use density::{
    nth_order_density_syst_binomial, second_order_density_syst_binomial,
    second_order_density_syst_poisson, syg_condition_scan, DensityEvaluator, SygScanReport,
};
pub use samplers::{
    sample, sample_binomial, sample_binomial_dirichlet, sample_poisson, sample_syst_binomial,
    sample_syst_binomial_thinning, sample_syst_poisson, sample_systematic,
};
pub use shaped::{transform_process, transform_sample, ShapedDensity};
pub use spec::{OrderedSample, ProcessSpec};
