use super::BoundCheckReport;
use crate::calculus::CumulativeIntegral;
use crate::error::{Error, Result};
use crate::problem::{CoefficientSet, ScalarFunction};

/// `phi(x) = amplitude * exp(-beta e(x))` with closed-form derivatives.
pub fn barrier_function(coeffs: &CoefficientSet, e: &CumulativeIntegral, amplitude: f64) -> ScalarFunction {
    let beta = coeffs.beta;
    let (e0, e1, e2) = (e.clone(), e.clone(), e.clone());
    let (eps1, eps2) = (coeffs.eps.clone(), coeffs.eps.clone());
    ScalarFunction::new(
        move |x| amplitude * (-beta * e0.eval(x)).exp(),
        move |x| -beta / eps1.eval(x) * amplitude * (-beta * e1.eval(x)).exp(),
    )
    .with_deriv2(move |x| {
        let eps = eps2.eval(x);
        beta * (beta + eps2.deriv(x)) / (eps * eps) * amplitude * (-beta * e2.eval(x)).exp()
    })
}

/// Samples `(L phi)(x) = amplitude (beta (b - beta) / eps + c) exp(-beta e(x))`
/// on an equispaced grid; the check passes when the minimum is at least
/// `-1e-12` times the largest term magnitude.
pub fn check_barrier_operator(
    coeffs: &CoefficientSet,
    e: &CumulativeIntegral,
    amplitude: f64,
    sample_count: usize,
) -> Result<BoundCheckReport> {
    if !(amplitude > 0.0) {
        return Err(Error::Parameter(format!("barrier amplitude {amplitude} must be positive")));
    }
    if sample_count < 2 {
        return Err(Error::Size { required: 2, got: sample_count });
    }
    if coeffs.sigma < 0.0 {
        return Err(Error::Parameter(format!("barrier argument needs eps' >= 0, sigma = {}", coeffs.sigma)));
    }
    let beta = coeffs.beta;
    let (mut min, mut at, mut scale) = (f64::INFINITY, 0.0, 0.0f64);
    for i in 0..sample_count {
        let x = i as f64 / (sample_count - 1) as f64;
        let (eps, b, c) = (coeffs.eps.eval(x), coeffs.b.eval(x), coeffs.c.eval(x));
        let decay = amplitude * (-beta * e.eval(x)).exp();
        let value = (beta * (b - beta) / eps + c) * decay;
        if !value.is_finite() {
            return Err(Error::NonFinite { what: "barrier operator", x, value });
        }
        scale = scale.max((beta * (b - beta).abs() / eps + c.abs()) * decay);
        if value < min {
            min = value;
            at = x;
        }
    }
    Ok(BoundCheckReport {
        name: "barrier-operator".into(),
        sample_count,
        worst_margin: min,
        worst_point: at,
        passed: min >= -1e-12 * scale,
        statistic: Some(scale),
    })
}
