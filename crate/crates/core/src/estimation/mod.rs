//! Horvitz-Thompson estimation of the mean of a function on (0,1).

mod estimators;
mod function;
mod renewal;
mod true_variance;

pub use estimators::{
    confidence_interval, estimate, ht_mean, var_hat_cordy, var_hat_syg, EstimateReport,
    VarianceChoice,
};
pub use function::{
    fold_endpoints, h_folded_function, h_function, test_function_h, IntegrableFunction,
    GOLDEN_MEAN_H,
};
pub use renewal::{renewal_identity_residual, renewal_k_max};
pub use true_variance::{
    true_variance, true_variance_2d, true_variance_with_form, TrueVarianceReport, VarianceForm,
};
