use std::fmt;
use std::sync::Arc;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `∫₀¹ h`, from adaptive quadrature at relative tolerance 1e-13.
pub const GOLDEN_MEAN_H: f64 = 28.5909286908;

/// A function of interest `z` on (0,1), optionally with its known mean.
#[derive(Clone)]
pub struct IntegrableFunction {
    eval: Eval,
    known_mean: Option<f64>,
    label: String,
}

impl fmt::Debug for IntegrableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrableFunction")
            .field("label", &self.label)
            .field("known_mean", &self.known_mean)
            .finish()
    }
}

impl IntegrableFunction {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        IntegrableFunction {
            eval: Arc::new(f),
            known_mean: None,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        IntegrableFunction::new(format!("{c}"), move |_| c).with_known_mean(c)
    }

    pub fn with_known_mean(mut self, mean: f64) -> Self {
        self.known_mean = Some(mean);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn known_mean(&self) -> Option<f64> {
        self.known_mean
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `h(x) = 100 sin(3x² / (2x² + 1)) exp(-sin²(4πx))`.
pub fn test_function_h(x: f64) -> f64 {
    let x2 = x * x;
    let s = (4.0 * std::f64::consts::PI * x).sin();
    100.0 * (3.0 * x2 / (2.0 * x2 + 1.0)).sin() * (-s * s).exp()
}

/// `h` wrapped with its golden mean.
pub fn h_function() -> IntegrableFunction {
    IntegrableFunction::new("h", test_function_h).with_known_mean(GOLDEN_MEAN_H)
}

/// `h` folded so both endpoints share the value `h(0)`.
pub fn h_folded_function() -> IntegrableFunction {
    let mut g = fold_endpoints(&h_function());
    g.label = "h-folded".into();
    g
}

/// `g(x) = f(2x)` on [0, 1/2] and `f(2 - 2x)` on (1/2, 1]: `g(0) = g(1) = f(0)`
/// and `∫g = ∫f`.
pub fn fold_endpoints(f: &IntegrableFunction) -> IntegrableFunction {
    let inner = f.eval.clone();
    IntegrableFunction {
        eval: Arc::new(move |x| {
            if x <= 0.5 {
                inner(2.0 * x)
            } else {
                inner(2.0 - 2.0 * x)
            }
        }),
        known_mean: f.known_mean,
        label: format!("fold({})", f.label),
    }
}
