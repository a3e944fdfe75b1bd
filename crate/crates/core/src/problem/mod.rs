//! Problem instances for `-(eps u')' - b u' + c u = f` on `(0, 1)` with
//! homogeneous Dirichlet data, the standing assumptions on the coefficients,
//! and the built-in scenario catalogue.

mod function;
mod scenarios;

pub use function::ScalarFunction;
pub use scenarios::{
    builtin_scenarios, scenario, scenario_by_name, DiffusionProfile, ScenarioKind,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default grid size for sample-based assumption checks.
pub const DEFAULT_VALIDATION_SAMPLES: usize = 10_001;

/// Coefficients of the boundary value problem and the constants the
/// analysis relies on.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    /// Diffusion `eps(x)`.
    pub eps: ScalarFunction,
    /// Convection `b(x)`.
    pub b: ScalarFunction,
    /// Reaction `c(x)`.
    pub c: ScalarFunction,
    /// Right-hand side `f(x)`.
    pub f: ScalarFunction,
    /// Lower bound `0 < beta < b(x)`.
    pub beta: f64,
    /// Coercivity constant, `c + b'/2 >= gamma > 0`.
    pub gamma: f64,
    /// `min eps`.
    pub eps_lower: f64,
    /// `max eps`.
    pub eps_upper: f64,
    /// `min eps'`.
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsProvenance {
    Given,
    Manufactured,
}

/// A named problem instance, optionally with its exact solution and the
/// analytic exemplars used by the interpolation studies.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub eps0: f64,
    pub coeffs: CoefficientSet,
    pub exact: Option<ScalarFunction>,
    pub rhs_provenance: RhsProvenance,
    /// Smooth exemplar `S_ex` with bounded derivatives.
    pub smooth_exemplar: Option<ScalarFunction>,
    /// Layer exemplar `E_ex(x) = (exp(-beta e(x)) - exp(-beta e(1))) / (1 - exp(-beta e(1)))`.
    pub layer_exemplar: Option<ScalarFunction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assumption {
    FiniteValues,
    BetaPositive,
    BetaBelowConvection,
    EpsLowerPositive,
    EpsAboveLower,
    EpsBelowUpper,
    ReactionNonNegative,
    GammaPositive,
    Coercivity,
    EpsDerivativeConsistent,
    ConvectionDerivativeConsistent,
    SigmaMatchesMinSlope,
    SigmaAboveMinusBeta,
    /// Only a warning: the layer decomposition is established for `eps' >= 0`.
    DecompositionProven,
}

impl Assumption {
    pub fn describe(self) -> &'static str {
        match self {
            Assumption::FiniteValues => "coefficients finite",
            Assumption::BetaPositive => "0 < beta",
            Assumption::BetaBelowConvection => "beta < b",
            Assumption::EpsLowerPositive => "0 < eps_lower",
            Assumption::EpsAboveLower => "eps_lower <= eps",
            Assumption::EpsBelowUpper => "eps <= eps_upper",
            Assumption::ReactionNonNegative => "c >= 0",
            Assumption::GammaPositive => "0 < gamma",
            Assumption::Coercivity => "c + b'/2 >= gamma",
            Assumption::EpsDerivativeConsistent => "eps' consistent with eps",
            Assumption::ConvectionDerivativeConsistent => "b' consistent with b",
            Assumption::SigmaMatchesMinSlope => "sigma = min eps'",
            Assumption::SigmaAboveMinusBeta => "sigma > -beta",
            Assumption::DecompositionProven => "sigma >= 0 (decomposition proven)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub severity: Severity,
    pub passed: bool,
    /// Smallest margin over the sample grid; negative means violated.
    pub margin: f64,
    pub worst_point: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub sample_count: usize,
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    /// True when no error-severity check failed.
    pub fn is_valid(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Warning)
    }

    pub fn check(&self, assumption: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == assumption)
    }
}

// Running minimum of a sampled margin.
struct MinTracker {
    margin: f64,
    at: f64,
}

impl MinTracker {
    fn new() -> Self {
        Self { margin: f64::INFINITY, at: 0.0 }
    }

    fn push(&mut self, x: f64, value: f64) {
        if value.is_finite() && value < self.margin {
            self.margin = value;
            self.at = x;
        }
    }
}

/// Checks the standing assumptions on an equispaced grid of `sample_count`
/// points in `[0, 1]`.
pub fn validate_coefficients(coeffs: &CoefficientSet, sample_count: usize) -> Result<ValidationReport> {
    if sample_count < 2 {
        return Err(Error::Size { required: 2, got: sample_count });
    }
    let mut nonfinite: Option<f64> = None;
    let mut b_gap = MinTracker::new();
    let mut lower_gap = MinTracker::new();
    let mut upper_gap = MinTracker::new();
    let mut c_min = MinTracker::new();
    let mut coercive = MinTracker::new();
    let mut slope = MinTracker::new();

    for i in 0..sample_count {
        let x = i as f64 / (sample_count - 1) as f64;
        let eps = coeffs.eps.eval(x);
        let deps = coeffs.eps.deriv(x);
        let b = coeffs.b.eval(x);
        let db = coeffs.b.deriv(x);
        let c = coeffs.c.eval(x);
        let f = coeffs.f.eval(x);
        if [eps, deps, b, db, c, f].iter().any(|v| !v.is_finite()) && nonfinite.is_none() {
            nonfinite = Some(x);
        }
        b_gap.push(x, b - coeffs.beta);
        lower_gap.push(x, eps - coeffs.eps_lower);
        upper_gap.push(x, coeffs.eps_upper - eps);
        c_min.push(x, c);
        coercive.push(x, c + 0.5 * db - coeffs.gamma);
        slope.push(x, deps);
    }

    let eps_scale = 1e-12 * coeffs.eps_upper.abs().max(coeffs.eps_lower.abs());
    let unit_tol = 1e-12 * (1.0 + coeffs.gamma.abs());
    let mut checks = Vec::new();
    let mut push = |assumption, severity, margin: f64, at: f64, passed: bool| {
        checks.push(AssumptionCheck { assumption, severity, passed, margin, worst_point: at });
    };

    push(
        Assumption::FiniteValues,
        Severity::Error,
        if nonfinite.is_some() { -1.0 } else { 0.0 },
        nonfinite.unwrap_or(0.0),
        nonfinite.is_none(),
    );
    push(Assumption::BetaPositive, Severity::Error, coeffs.beta, 0.0, coeffs.beta > 0.0);
    push(Assumption::BetaBelowConvection, Severity::Error, b_gap.margin, b_gap.at, b_gap.margin > 0.0);
    push(
        Assumption::EpsLowerPositive,
        Severity::Error,
        coeffs.eps_lower,
        0.0,
        coeffs.eps_lower > 0.0,
    );
    push(
        Assumption::EpsAboveLower,
        Severity::Error,
        lower_gap.margin,
        lower_gap.at,
        lower_gap.margin >= -eps_scale,
    );
    push(
        Assumption::EpsBelowUpper,
        Severity::Error,
        upper_gap.margin,
        upper_gap.at,
        upper_gap.margin >= -eps_scale,
    );
    push(Assumption::ReactionNonNegative, Severity::Error, c_min.margin, c_min.at, c_min.margin >= -unit_tol);
    push(Assumption::GammaPositive, Severity::Error, coeffs.gamma, 0.0, coeffs.gamma > 0.0);
    push(Assumption::Coercivity, Severity::Error, coercive.margin, coercive.at, coercive.margin >= -unit_tol);

    let (eps_excess, eps_at) = coeffs.eps.derivative_consistency(sample_count.min(1001));
    push(Assumption::EpsDerivativeConsistent, Severity::Error, -eps_excess, eps_at, eps_excess <= 0.0);
    let (b_excess, b_at) = coeffs.b.derivative_consistency(sample_count.min(1001));
    push(
        Assumption::ConvectionDerivativeConsistent,
        Severity::Error,
        -b_excess,
        b_at,
        b_excess <= 0.0,
    );

    let sigma_margin = 1e-8 - (coeffs.sigma - slope.margin).abs();
    push(Assumption::SigmaMatchesMinSlope, Severity::Error, sigma_margin, slope.at, sigma_margin >= 0.0);
    let floor = coeffs.sigma + coeffs.beta;
    push(Assumption::SigmaAboveMinusBeta, Severity::Error, floor, slope.at, floor > 0.0);
    push(
        Assumption::DecompositionProven,
        Severity::Warning,
        coeffs.sigma,
        slope.at,
        coeffs.sigma >= 0.0,
    );

    Ok(ValidationReport { sample_count, checks })
}

/// Right-hand side `f = -eps u'' - (b + eps') u' + c u` for a closed-form `u`.
pub fn manufactured_rhs(u: &ScalarFunction, coeffs: &CoefficientSet) -> Result<ScalarFunction> {
    if !u.has_deriv2() {
        return Err(Error::Configuration(
            "manufactured right-hand side needs the second derivative of u".into(),
        ));
    }
    let u = u.clone();
    let eps = coeffs.eps.clone();
    let b = coeffs.b.clone();
    let c = coeffs.c.clone();
    Ok(ScalarFunction::numeric(move |x| strong_form(&u, &eps, &b, &c, x)))
}

fn strong_form(
    u: &ScalarFunction,
    eps: &ScalarFunction,
    b: &ScalarFunction,
    c: &ScalarFunction,
    x: f64,
) -> f64 {
    let u2 = u.deriv2(x).unwrap_or(f64::NAN);
    -eps.eval(x) * u2 - (b.eval(x) + eps.deriv(x)) * u.deriv(x) + c.eval(x) * u.eval(x)
}

/// `(L u)(x)` for a function with closed-form derivatives, or `None` when the
/// second derivative is unavailable.
pub fn apply_operator(coeffs: &CoefficientSet, u: &ScalarFunction, x: f64) -> Option<f64> {
    u.has_deriv2()
        .then(|| strong_form(u, &coeffs.eps, &coeffs.b, &coeffs.c, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_set(eps: f64, b: f64, c: f64, beta: f64, gamma: f64) -> CoefficientSet {
        CoefficientSet {
            eps: ScalarFunction::constant(eps),
            b: ScalarFunction::constant(b),
            c: ScalarFunction::constant(c),
            f: ScalarFunction::constant(1.0),
            beta,
            gamma,
            eps_lower: eps,
            eps_upper: eps,
            sigma: 0.0,
        }
    }

    #[test]
    fn constant_coefficients_pass() {
        let report = validate_coefficients(&constant_set(0.01, 2.0, 1.0, 1.0, 1.0), 101).unwrap();
        assert!(report.is_valid());
        assert_eq!(report.warnings().count(), 0);
        let gap = report.check(Assumption::BetaBelowConvection).unwrap();
        assert!((gap.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_convection_fails() {
        let report = validate_coefficients(&constant_set(0.01, 0.5, 1.0, 1.0, 1.0), 101).unwrap();
        assert!(!report.is_valid());
        let gap = report.check(Assumption::BetaBelowConvection).unwrap();
        assert!(!gap.passed);
        assert!((gap.margin + 0.5).abs() < 1e-15);
    }

    #[test]
    fn coercivity_margin_can_be_zero() {
        let coeffs = CoefficientSet {
            eps: ScalarFunction::linear(0.01, 0.01),
            b: ScalarFunction::linear(2.0, 1.0),
            c: ScalarFunction::constant(0.0),
            f: ScalarFunction::constant(1.0),
            beta: 1.0,
            gamma: 0.5,
            eps_lower: 0.01,
            eps_upper: 0.02,
            sigma: 0.01,
        };
        let report = validate_coefficients(&coeffs, 1001).unwrap();
        let check = report.check(Assumption::Coercivity).unwrap();
        assert!(check.passed);
        assert_eq!(check.margin, 0.0);
        assert!(report.is_valid());
    }

    #[test]
    fn negative_sigma_is_a_warning_only() {
        let coeffs = CoefficientSet {
            eps: ScalarFunction::linear(0.02, -0.01),
            sigma: -0.01,
            eps_lower: 0.01,
            eps_upper: 0.02,
            ..constant_set(0.01, 2.0, 1.0, 1.0, 1.0)
        };
        let report = validate_coefficients(&coeffs, 101).unwrap();
        assert!(report.is_valid());
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn sigma_mismatch_fails() {
        let coeffs = CoefficientSet {
            eps: ScalarFunction::linear(0.01, 0.01),
            eps_upper: 0.02,
            sigma: 0.0,
            ..constant_set(0.01, 2.0, 1.0, 1.0, 1.0)
        };
        let report = validate_coefficients(&coeffs, 101).unwrap();
        assert!(!report.check(Assumption::SigmaMatchesMinSlope).unwrap().passed);
    }

    #[test]
    fn non_finite_values_are_their_own_violation() {
        let coeffs = CoefficientSet {
            c: ScalarFunction::new(|x| if x > 0.5 { f64::NAN } else { 1.0 }, |_| 0.0),
            ..constant_set(0.01, 2.0, 1.0, 1.0, 1.0)
        };
        let report = validate_coefficients(&coeffs, 11).unwrap();
        let finite = report.check(Assumption::FiniteValues).unwrap();
        assert!(!finite.passed);
        assert!(finite.worst_point > 0.5);
    }

    #[test]
    fn too_few_samples() {
        assert!(validate_coefficients(&constant_set(0.01, 2.0, 1.0, 1.0, 1.0), 1).is_err());
    }

    #[test]
    fn manufactured_rhs_of_quadratic() {
        let u = ScalarFunction::new(|x| x * (1.0 - x), |x| 1.0 - 2.0 * x).with_deriv2(|_| -2.0);
        let coeffs = CoefficientSet { c: ScalarFunction::constant(0.0), ..constant_set(1.0, 1.0, 0.0, 0.5, 0.5) };
        let f = manufactured_rhs(&u, &coeffs).unwrap();
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((f.eval(x) - (1.0 + 2.0 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn manufactured_rhs_of_zero() {
        let zero = ScalarFunction::constant(0.0);
        let f = manufactured_rhs(&zero, &constant_set(0.01, 2.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(f.eval(0.3), 0.0);
    }

    #[test]
    fn manufactured_rhs_with_variable_diffusion() {
        use std::f64::consts::PI;
        let u = ScalarFunction::new(|x: f64| (PI * x).sin(), |x: f64| PI * (PI * x).cos())
            .with_deriv2(|x: f64| -PI * PI * (PI * x).sin());
        let coeffs = CoefficientSet {
            eps: ScalarFunction::linear(0.01, 0.01),
            eps_upper: 0.02,
            sigma: 0.01,
            ..constant_set(0.01, 2.0, 1.0, 1.0, 1.0)
        };
        let f = manufactured_rhs(&u, &coeffs).unwrap();
        // Oracle: flux form -(eps u')' by a high-order difference of the flux.
        let flux = |x: f64| 0.01 * (1.0 + x) * PI * (PI * x).cos();
        let x = 0.5;
        let h = 1e-3;
        let dflux = (-flux(x + 2.0 * h) + 8.0 * flux(x + h) - 8.0 * flux(x - h) + flux(x - 2.0 * h)) / (12.0 * h);
        let oracle = -dflux - 2.0 * PI * (PI * x).cos() + (PI * x).sin();
        assert!((f.eval(x) - oracle).abs() < 1e-12, "{} vs {}", f.eval(x), oracle);
        let closed = 0.015 * PI * PI + 1.0;
        assert!((f.eval(x) - closed).abs() < 1e-12);
    }

    #[test]
    fn missing_second_derivative_is_a_configuration_error() {
        let u = ScalarFunction::new(|x| x, |_| 1.0);
        let err = manufactured_rhs(&u, &constant_set(0.01, 2.0, 1.0, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }
}
