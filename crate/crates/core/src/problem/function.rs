use std::fmt;
use std::sync::Arc;

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on `[0, 1]` together with its derivatives.
///
/// The second derivative is optional; operations that need it (manufactured
/// right-hand sides, strong-form residuals) report a configuration error when
/// it is missing.
#[derive(Clone)]
pub struct ScalarFunction {
    eval: Map,
    deriv: Map,
    deriv2: Option<Map>,
}

impl ScalarFunction {
    pub fn new<F, D>(eval: F, deriv: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            deriv2: None,
        }
    }

    pub fn with_deriv2<D2>(mut self, deriv2: D2) -> Self
    where
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.deriv2 = Some(Arc::new(deriv2));
        self
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value, |_| 0.0).with_deriv2(|_| 0.0)
    }

    /// `offset + slope * x`
    pub fn linear(offset: f64, slope: f64) -> Self {
        Self::new(move |x| offset + slope * x, move |_| slope).with_deriv2(|_| 0.0)
    }

    /// Wraps a function whose derivative is not known in closed form.
    /// The derivative is a fourth-order central difference.
    pub fn numeric<F>(eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let eval: Map = Arc::new(eval);
        let inner = Arc::clone(&eval);
        let deriv = move |x: f64| {
            let h = 1e-4 * (1.0 + x.abs());
            (-inner(x + 2.0 * h) + 8.0 * inner(x + h) - 8.0 * inner(x - h) + inner(x - 2.0 * h))
                / (12.0 * h)
        };
        Self {
            eval,
            deriv: Arc::new(deriv),
            deriv2: None,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }

    #[inline]
    pub fn deriv2(&self, x: f64) -> Option<f64> {
        self.deriv2.as_ref().map(|d| d(x))
    }

    pub fn has_deriv2(&self) -> bool {
        self.deriv2.is_some()
    }

    /// Largest violation of `|fd - deriv| <= 1e-5 |deriv| + 1e-8 |f|` over
    /// `samples` interior points, where `fd` is a central difference with
    /// step `1e-6`. Returns `(excess, x)`; `excess <= 0` means consistent.
    pub fn derivative_consistency(&self, samples: usize) -> (f64, f64) {
        let step = 1e-6;
        let n = samples.max(2);
        let mut worst = (f64::NEG_INFINITY, 0.0);
        for i in 0..n {
            let x = step + (1.0 - 2.0 * step) * i as f64 / (n - 1) as f64;
            let fd = (self.eval(x + step) - self.eval(x - step)) / (2.0 * step);
            let d = self.deriv(x);
            let allowed = 1e-5 * d.abs() + 1e-8 * self.eval(x).abs();
            let excess = (fd - d).abs() - allowed;
            let excess = if excess.is_nan() { f64::INFINITY } else { excess };
            if excess > worst.0 {
                worst = (excess, x);
            }
        }
        worst
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("deriv2", &self.deriv2.is_some())
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_are_consistent() {
        let f = ScalarFunction::new(f64::sin, f64::cos);
        assert!(f.derivative_consistency(101).0 <= 0.0);
        let g = ScalarFunction::new(|x: f64| 0.01 * x.exp(), |x: f64| 0.01 * x.exp());
        assert!(g.derivative_consistency(101).0 <= 0.0);
    }

    #[test]
    fn wrong_derivative_is_detected() {
        let f = ScalarFunction::new(f64::sin, f64::sin);
        let (excess, _) = f.derivative_consistency(11);
        assert!(excess > 0.0);
    }

    #[test]
    fn numeric_derivative_is_accurate() {
        let f = ScalarFunction::numeric(|x: f64| x.powi(3));
        assert!((f.deriv(0.5) - 0.75).abs() < 1e-10);
        assert!(!f.has_deriv2());
    }
}
