use std::f64::consts::{E, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{manufactured_rhs, CoefficientSet, RhsProvenance, ScalarFunction, Scenario};
use crate::error::{Error, Result};

/// Diffusion profiles with a closed-form layer integral `e(x) = int_0^x 1/eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffusionProfile {
    /// `eps(x) = eps0`
    Constant(f64),
    /// `eps(x) = eps0 (1 + x)`
    Linear(f64),
    /// `eps(x) = eps0 exp(x)`
    Exponential(f64),
}

impl DiffusionProfile {
    pub fn eps0(self) -> f64 {
        match self {
            Self::Constant(e) | Self::Linear(e) | Self::Exponential(e) => e,
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Constant(e) => e,
            Self::Linear(e) => e * (1.0 + x),
            Self::Exponential(e) => e * x.exp(),
        }
    }

    pub fn deriv(self, x: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear(e) => e,
            Self::Exponential(e) => e * x.exp(),
        }
    }

    pub fn deriv2(self, x: f64) -> f64 {
        match self {
            Self::Constant(_) | Self::Linear(_) => 0.0,
            Self::Exponential(e) => e * x.exp(),
        }
    }

    /// Closed form of `int_0^x dt / eps(t)`.
    pub fn layer_integral(self, x: f64) -> f64 {
        match self {
            Self::Constant(e) => x / e,
            Self::Linear(e) => x.ln_1p() / e,
            Self::Exponential(e) => -(-x).exp_m1() / e,
        }
    }

    pub fn lower(self) -> f64 {
        self.eps0()
    }

    pub fn upper(self) -> f64 {
        match self {
            Self::Constant(e) => e,
            Self::Linear(e) => 2.0 * e,
            Self::Exponential(e) => e * E,
        }
    }

    /// `min eps'` on `[0, 1]`.
    pub fn min_slope(self) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear(e) | Self::Exponential(e) => e,
        }
    }

    pub fn function(self) -> ScalarFunction {
        ScalarFunction::new(move |x| self.eval(x), move |x| self.deriv(x))
            .with_deriv2(move |x| self.deriv2(x))
    }

    /// The layer exemplar `E_ex` for decay rate `beta`, with `E_ex(0) = 1`
    /// and `E_ex(1) = 0`.
    pub fn layer_exemplar(self, beta: f64) -> ScalarFunction {
        let q = (-beta * self.layer_integral(1.0)).exp();
        let scale = 1.0 / (1.0 - q);
        let g = move |x: f64| (-beta * self.layer_integral(x)).exp();
        ScalarFunction::new(move |x| (g(x) - q) * scale, move |x| {
            -beta / self.eval(x) * g(x) * scale
        })
        .with_deriv2(move |x| {
            let eps = self.eval(x);
            beta * (beta + self.deriv(x)) / (eps * eps) * g(x) * scale
        })
    }
}

/// `cos(pi x / 2)`, the smooth exemplar.
pub fn smooth_exemplar() -> ScalarFunction {
    ScalarFunction::new(|x: f64| (FRAC_PI_2 * x).cos(), |x: f64| -FRAC_PI_2 * (FRAC_PI_2 * x).sin())
        .with_deriv2(|x: f64| -FRAC_PI_2 * FRAC_PI_2 * (FRAC_PI_2 * x).cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    EpsConst,
    EpsLinear,
    EpsExp,
    Manufactured,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::EpsConst,
        ScenarioKind::EpsLinear,
        ScenarioKind::EpsExp,
        ScenarioKind::Manufactured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::EpsConst => "eps-const",
            ScenarioKind::EpsLinear => "eps-linear",
            ScenarioKind::EpsExp => "eps-exp",
            ScenarioKind::Manufactured => "manufactured",
        }
    }

    pub fn profile(self, eps0: f64) -> DiffusionProfile {
        match self {
            ScenarioKind::EpsConst => DiffusionProfile::Constant(eps0),
            ScenarioKind::EpsLinear | ScenarioKind::Manufactured => DiffusionProfile::Linear(eps0),
            ScenarioKind::EpsExp => DiffusionProfile::Exponential(eps0),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown scenario '{s}'")))
    }
}

fn coefficients(
    profile: DiffusionProfile,
    b: ScalarFunction,
    c: ScalarFunction,
    f: ScalarFunction,
) -> CoefficientSet {
    CoefficientSet {
        eps: profile.function(),
        b,
        c,
        f,
        beta: 1.0,
        gamma: 1.0,
        eps_lower: profile.lower(),
        eps_upper: profile.upper(),
        sigma: profile.min_slope(),
    }
}

/// Exact solution of `-eps u'' - b u' + c u = f` with constant coefficients
/// and zero boundary values: `u = f/c + A exp(l1 x) + B exp(l2 (x - 1))`.
fn constant_coefficient_solution(eps: f64, b: f64, c: f64, f: f64) -> ScalarFunction {
    let root = (b * b + 4.0 * eps * c).sqrt();
    let l1 = -(b + root) / (2.0 * eps);
    let l2 = 2.0 * c / (b + root);
    let k = f / c;
    let r = l1.exp();
    let s = (-l2).exp();
    let det = 1.0 - r * s;
    let a = -k * (1.0 - s) / det;
    let bb = -k * (1.0 - r) / det;
    ScalarFunction::new(
        move |x| k + a * (l1 * x).exp() + bb * (l2 * (x - 1.0)).exp(),
        move |x| a * l1 * (l1 * x).exp() + bb * l2 * (l2 * (x - 1.0)).exp(),
    )
    .with_deriv2(move |x| a * l1 * l1 * (l1 * x).exp() + bb * l2 * l2 * (l2 * (x - 1.0)).exp())
}

/// Builds one catalogue scenario. `eps0` must lie in `(0, 0.1]`.
pub fn scenario(kind: ScenarioKind, eps0: f64) -> Result<Scenario> {
    if !(eps0 > 0.0 && eps0 <= 0.1) {
        return Err(Error::Parameter(format!("eps0 = {eps0} outside (0, 0.1]")));
    }
    let profile = kind.profile(eps0);
    let mut exact = None;
    let mut provenance = RhsProvenance::Given;
    let coeffs = match kind {
        ScenarioKind::EpsConst => {
            exact = Some(constant_coefficient_solution(eps0, 2.0, 1.0, 1.0));
            coefficients(
                profile,
                ScalarFunction::constant(2.0),
                ScalarFunction::constant(1.0),
                ScalarFunction::constant(1.0),
            )
        }
        ScenarioKind::EpsLinear => coefficients(
            profile,
            ScalarFunction::linear(2.0, 1.0),
            ScalarFunction::constant(1.0),
            ScalarFunction::new(f64::exp, f64::exp).with_deriv2(f64::exp),
        ),
        ScenarioKind::EpsExp => coefficients(
            profile,
            ScalarFunction::constant(2.0),
            ScalarFunction::linear(1.0, 1.0),
            ScalarFunction::new(|x| 1.0 + x * x, |x| 2.0 * x).with_deriv2(|_| 2.0),
        ),
        ScenarioKind::Manufactured => {
            let mut coeffs = coefficients(
                profile,
                ScalarFunction::constant(2.0),
                ScalarFunction::constant(1.0),
                ScalarFunction::constant(0.0),
            );
            // cos(pi/2) is not exactly zero in floating point; the affine
            // correction pins S(1) = 0.
            let s = smooth_exemplar();
            let tail = FRAC_PI_2.cos();
            let layer = profile.layer_exemplar(coeffs.beta);
            let (s1, s2, s3) = (s.clone(), s.clone(), s);
            let (e1, e2, e3) = (layer.clone(), layer.clone(), layer);
            let u = ScalarFunction::new(
                move |x| s1.eval(x) - tail * x - e1.eval(x),
                move |x| s2.deriv(x) - tail - e2.deriv(x),
            )
            .with_deriv2(move |x| {
                s3.deriv2(x).unwrap_or(f64::NAN) - e3.deriv2(x).unwrap_or(f64::NAN)
            });
            coeffs.f = manufactured_rhs(&u, &coeffs)?;
            exact = Some(u);
            provenance = RhsProvenance::Manufactured;
            coeffs
        }
    };
    let layer_exemplar = Some(profile.layer_exemplar(coeffs.beta));
    Ok(Scenario {
        name: kind.name().to_string(),
        eps0,
        coeffs,
        exact,
        rhs_provenance: provenance,
        smooth_exemplar: Some(smooth_exemplar()),
        layer_exemplar,
    })
}

/// The four catalogue scenarios in the order of [`ScenarioKind::ALL`].
pub fn builtin_scenarios(eps0: f64) -> Result<Vec<Scenario>> {
    ScenarioKind::ALL.into_iter().map(|k| scenario(k, eps0)).collect()
}

pub fn scenario_by_name(name: &str, eps0: f64) -> Result<Scenario> {
    scenario(name.parse()?, eps0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate_coefficients;

    #[test]
    fn constant_scenario_values() {
        let s = scenario(ScenarioKind::EpsConst, 0.01).unwrap();
        assert_eq!(s.coeffs.eps.eval(0.5), 0.01);
        assert_eq!(s.coeffs.sigma, 0.0);
    }

    #[test]
    fn linear_scenario_bounds() {
        let s = scenario(ScenarioKind::EpsLinear, 0.01).unwrap();
        assert!((s.coeffs.eps_upper - 0.02).abs() < 1e-18);
        assert_eq!(s.coeffs.sigma, 0.01);
    }

    #[test]
    fn manufactured_scenario_is_valid() {
        let s = scenario(ScenarioKind::Manufactured, 0.001).unwrap();
        let report = validate_coefficients(&s.coeffs, 10_001).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations().collect::<Vec<_>>());
        assert_eq!(report.warnings().count(), 0);
    }

    #[test]
    fn exact_solutions_vanish_on_the_boundary() {
        for eps0 in [0.1, 1e-3, 1e-8] {
            for s in builtin_scenarios(eps0).unwrap() {
                if let Some(u) = &s.exact {
                    assert!(u.eval(0.0).abs() <= 1e-12, "{} u(0) = {}", s.name, u.eval(0.0));
                    assert!(u.eval(1.0).abs() <= 1e-12, "{} u(1) = {}", s.name, u.eval(1.0));
                }
            }
        }
    }

    #[test]
    fn constant_coefficient_solution_satisfies_the_equation() {
        let s = scenario(ScenarioKind::EpsConst, 0.05).unwrap();
        let u = s.exact.unwrap();
        for x in [0.01, 0.2, 0.7, 0.99] {
            let residual = -0.05 * u.deriv2(x).unwrap() - 2.0 * u.deriv(x) + u.eval(x) - 1.0;
            assert!(residual.abs() < 1e-12, "residual {residual} at {x}");
        }
    }

    #[test]
    fn layer_integral_matches_quadrature() {
        for profile in [
            DiffusionProfile::Constant(0.01),
            DiffusionProfile::Linear(0.01),
            DiffusionProfile::Exponential(0.01),
        ] {
            // Simpson with many panels as an independent check.
            let n = 20_000;
            let h = 0.7 / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let a = i as f64 * h;
                acc += h / 6.0
                    * (1.0 / profile.eval(a) + 4.0 / profile.eval(a + h / 2.0) + 1.0 / profile.eval(a + h));
            }
            assert!((acc - profile.layer_integral(0.7)).abs() < 1e-9 * acc);
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in ScenarioKind::ALL {
            assert_eq!(kind.name().parse::<ScenarioKind>().unwrap(), kind);
        }
        assert!(scenario_by_name("nope", 0.01).is_err());
        assert!(scenario(ScenarioKind::EpsConst, 0.5).is_err());
    }
}
