use super::BoundCheckReport;
use crate::calculus::{integrate_with_breaks, layer_integral, CumulativeIntegral, LayerKind};
use crate::error::{Error, Result};
use crate::problem::CoefficientSet;

/// Relative slack allowed on the right-hand side.
pub const LEMMA_TOL: f64 = 1e-8;

const QUAD_TOL: f64 = 1e-10;
const SLOPE_SAMPLES: usize = 257;

/// Checks
///
/// ```text
/// int_a^x eps^l exp(g e_a(t)) dt <= (eps(x)^{l+1} exp(g e_a(x)) - eps(a)^{l+1}) / (g + (l+1) s0)
/// ```
///
/// with `e_a(t) = int_a^t 1/eps` and `s0` the smallest sampled `eps'` on
/// `[a, x]`, which must be non-negative, and `g > -(l+1) s0`.
///
/// Both sides are divided by `exp(g e_a(x))` before evaluation so that
/// large exponents do not overflow. The margin is `(RHS - LHS) / RHS`.
pub fn check_integral_lemma(coeffs: &CoefficientSet, a: f64, x: f64, ell: u32, gamma: f64) -> Result<BoundCheckReport> {
    let e = layer_integral(coeffs, LayerKind::E)?;
    check_integral_lemma_with(coeffs, &e, a, x, ell, gamma)
}

/// [`check_integral_lemma`] with a precomputed `e`.
pub fn check_integral_lemma_with(
    coeffs: &CoefficientSet,
    e: &CumulativeIntegral,
    a: f64,
    x: f64,
    ell: u32,
    gamma: f64,
) -> Result<BoundCheckReport> {
    if !(0.0 <= a && a < x && x <= 1.0) {
        return Err(Error::Parameter(format!("need 0 <= a < x <= 1, got a = {a}, x = {x}")));
    }
    let sigma0 = (0..SLOPE_SAMPLES)
        .map(|i| coeffs.eps.deriv(a + (x - a) * i as f64 / (SLOPE_SAMPLES - 1) as f64))
        .fold(f64::INFINITY, f64::min);
    if !(sigma0 >= 0.0) {
        return Err(Error::Parameter(format!("eps' must be non-negative on [{a}, {x}], min is {sigma0}")));
    }
    let power = ell as i32 + 1;
    let denom = gamma + power as f64 * sigma0;
    if !(denom > 0.0) {
        return Err(Error::Parameter(format!(
            "gamma = {gamma} must exceed -(l+1) sigma0 = {}",
            -(power as f64) * sigma0
        )));
    }

    let eps = &coeffs.eps;
    let integrand = |t: f64| eps.eval(t).powi(ell as i32) * (-gamma * e.difference(t, x)).exp();
    let lhs = integrate_with_breaks(integrand, &breaks(a, x, coeffs.eps_lower / gamma.abs()), QUAD_TOL)?;
    let rhs = (eps.eval(x).powi(power) - eps.eval(a).powi(power) * (-gamma * e.difference(a, x)).exp()) / denom;

    Ok(BoundCheckReport {
        name: format!("integral-lemma[a={a:.6},x={x:.6},l={ell},gamma={gamma:.6}]"),
        sample_count: 1,
        worst_margin: (rhs - lhs) / rhs.abs(),
        worst_point: x,
        passed: lhs <= rhs * (1.0 + LEMMA_TOL),
        statistic: Some(lhs / rhs),
    })
}

// Geometric breaks toward x resolving a boundary layer of width `width`.
fn breaks(a: f64, x: f64, width: f64) -> Vec<f64> {
    let mut pts = vec![x];
    let mut d = 0.25 * width;
    while d.is_finite() && d < x - a {
        pts.push(x - d);
        d *= 2.0;
    }
    pts.push(a);
    pts.reverse();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{scenario, ScenarioKind};

    #[test]
    fn constant_diffusion_is_the_equality_case() {
        let s = scenario(ScenarioKind::EpsConst, 1e-3).unwrap();
        for (a, x, gamma) in [(0.1, 0.6, 1.0), (0.0, 1.0, 2.5), (0.3, 0.30001, 0.1)] {
            let r = check_integral_lemma(&s.coeffs, a, x, 0, gamma).unwrap();
            assert!(r.passed);
            assert!(r.worst_margin.abs() <= 1e-8, "{}", r.worst_margin);
        }
    }

    #[test]
    fn linear_diffusion_is_also_sharp() {
        // eps' is constant, so the inequality is an identity.
        let s = scenario(ScenarioKind::EpsLinear, 1e-3).unwrap();
        for ell in [0, 1] {
            let r = check_integral_lemma(&s.coeffs, 0.0, 1.0, ell, 1.0).unwrap();
            assert!(r.passed);
            assert!(r.worst_margin.abs() < 1e-8);
        }
    }

    #[test]
    fn exponential_diffusion_strict() {
        let s = scenario(ScenarioKind::EpsExp, 1e-3).unwrap();
        let r = check_integral_lemma(&s.coeffs, 0.2, 0.9, 1, 0.5).unwrap();
        assert!(r.passed && r.worst_margin > 0.0);
    }

    #[test]
    fn precondition_violations() {
        let s = scenario(ScenarioKind::EpsConst, 1e-3).unwrap();
        // sigma0 = 0, so gamma = 0 is the boundary of validity
        assert!(matches!(check_integral_lemma(&s.coeffs, 0.0, 1.0, 0, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(check_integral_lemma(&s.coeffs, 0.5, 0.5, 0, 1.0), Err(Error::Parameter(_))));
        let lin = scenario(ScenarioKind::EpsLinear, 1e-3).unwrap();
        let boundary = -2.0 * 1e-3;
        assert!(matches!(check_integral_lemma(&lin.coeffs, 0.0, 1.0, 1, boundary), Err(Error::Parameter(_))));
        // just inside the range is accepted
        assert!(check_integral_lemma(&lin.coeffs, 0.0, 1.0, 1, 0.9 * boundary).unwrap().passed);
    }
}
