use std::fmt;

use serde::Serialize;

use super::BoundCheckReport;
use crate::calculus::{differentiate_grid, layer_integral, DerivativeOrder, LayerKind};
use crate::error::{Error, Result};
use crate::fem::{galerkin_solve, FemSolution};
use crate::map_cells;
use crate::mesh::build_mesh;
use crate::problem::{scenario, Scenario, ScenarioKind};

/// A reference solution must come from a mesh with `h` at most this.
pub const MIN_REFERENCE_H: f64 = 1.0 / 512.0;

/// Largest accepted max/min ratio of sup-ratios across `eps0` values.
pub const UNIFORMITY_FACTOR: f64 = 4.0;

/// Derivative bounds with unit constant.
///
/// `U*` use the layer integral `e`; `T*` use `e~(x) = int_0^x (eps_upper eps)^{-1/2}`
/// and the constants `eps_lower`, `eps_upper`, `sigma = min eps'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundKind {
    /// `|u| <= 1`
    U0,
    /// `|u'| <= 1 + exp(-beta e) / eps`
    U1,
    /// `|u''| <= (1 + eps') / eps * (1 + exp(-beta e) / eps)`
    U2,
    /// `|u| <= 1 + D`, `D = exp(-(sigma + 2 beta)/2 e~)`
    T0,
    /// `|u'| <= sqrt(eps_upper / eps) (1 + D / eps_lower)`
    T1,
    /// `|u''| <= eps_upper/eps (1 + D/eps_lower^2) + eps_upper eps'/(2 eps^2) (1 + D/eps_lower)`
    T2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [Self::U0, Self::U1, Self::U2, Self::T0, Self::T1, Self::T2];

    pub fn order(self) -> usize {
        match self {
            Self::U0 | Self::T0 => 0,
            Self::U1 | Self::T1 => 1,
            Self::U2 | Self::T2 => 2,
        }
    }

    pub fn is_transformed(self) -> bool {
        matches!(self, Self::T0 | Self::T1 | Self::T2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::U0 => "U0",
            Self::U1 => "U1",
            Self::U2 => "U2",
            Self::T0 => "T0",
            Self::T1 => "T1",
            Self::T2 => "T2",
        }
    }

    /// First node index checked and number of trailing nodes skipped.
    fn skip(self) -> usize {
        self.order()
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the exponential layer term of a bound is weighted. The last two are
/// negative controls: weakened bounds that a layer solution should violate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundWeight {
    Standard,
    /// `beta` replaced by `2 beta` in the exponent.
    DoubledBeta,
    /// Layer term dropped.
    NoLayerTerm,
}

impl BoundWeight {
    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::DoubledBeta => "doubled-beta",
            Self::NoLayerTerm => "no-layer-term",
        }
    }

    fn beta_factor(self) -> f64 {
        match self {
            Self::Standard => 1.0,
            Self::DoubledBeta => 2.0,
            Self::NoLayerTerm => f64::INFINITY,
        }
    }
}

/// Right-hand side of the `U*` bounds, given `eps(x)`, `eps'(x)` and the
/// layer term `layer = exp(-beta e(x))`.
pub fn lemma_bound(kind: BoundKind, eps: f64, eps_prime: f64, layer: f64) -> f64 {
    match kind {
        BoundKind::U0 => 1.0,
        BoundKind::U1 => 1.0 + layer / eps,
        BoundKind::U2 => (1.0 + eps_prime) / eps * (1.0 + layer / eps),
        _ => panic!("{kind} is not a lemma bound"),
    }
}

/// Right-hand side of the `T*` bounds, given the decay term
/// `decay = exp(-(sigma + 2 beta)/2 e~(x))`.
pub fn transformed_bound(kind: BoundKind, eps: f64, eps_prime: f64, eps_lower: f64, eps_upper: f64, decay: f64) -> f64 {
    match kind {
        BoundKind::T0 => 1.0 + decay,
        BoundKind::T1 => (eps_upper / eps).sqrt() * (1.0 + decay / eps_lower),
        BoundKind::T2 => {
            eps_upper / eps * (1.0 + decay / (eps_lower * eps_lower))
                + eps_upper * eps_prime / (2.0 * eps * eps) * (1.0 + decay / eps_lower)
        }
        _ => panic!("{kind} is not a transformed bound"),
    }
}

/// `1 + eps^{-k} exp(-beta x / eps)`, the constant-diffusion form.
pub fn classical_bound(k: i32, eps: f64, beta: f64, x: f64) -> f64 {
    1.0 + eps.powi(-k) * (-beta * x / eps).exp()
}

/// Sup over interior nodes of `|u^(k)| / bound(x)` for a reference solution;
/// derivatives come from three-point differences. Passes when the sup is
/// finite; uniformity in `eps0` is judged by [`check_bound_uniformity`].
pub fn check_solution_bounds(
    scenario: &Scenario,
    reference: &FemSolution,
    kind: BoundKind,
    weight: BoundWeight,
) -> Result<BoundCheckReport> {
    if reference.mesh.h() > MIN_REFERENCE_H * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "reference mesh h = {} is coarser than {MIN_REFERENCE_H}",
            reference.mesh.h()
        )));
    }
    let coeffs = &scenario.coeffs;
    let nodes = reference.nodes();
    let values = match kind.order() {
        0 => reference.coefficients.clone(),
        1 => differentiate_grid(&reference.coefficients, nodes, DerivativeOrder::First)?.values,
        _ => differentiate_grid(&reference.coefficients, nodes, DerivativeOrder::Second)?.values,
    };
    let table = layer_integral(coeffs, if kind.is_transformed() { LayerKind::ETilde } else { LayerKind::E })?;
    let rate = if kind.is_transformed() { 0.5 * (coeffs.sigma + 2.0 * coeffs.beta) } else { coeffs.beta }
        * weight.beta_factor();

    let skip = kind.skip();
    let (mut sup, mut at) = (0.0f64, 0.0);
    let range = skip.max(1).min(nodes.len())..nodes.len().saturating_sub(skip.max(1));
    let count = range.len();
    for i in range {
        let x = nodes[i];
        let (eps, deps) = (coeffs.eps.eval(x), coeffs.eps.deriv(x));
        let decay = if rate.is_infinite() { 0.0 } else { (-rate * table.eval(x)).exp() };
        let bound = if kind.is_transformed() {
            transformed_bound(kind, eps, deps, coeffs.eps_lower, coeffs.eps_upper, decay)
        } else {
            lemma_bound(kind, eps, deps, decay)
        };
        let ratio = values[i].abs() / bound;
        if !ratio.is_finite() {
            return Err(Error::NonFinite { what: "bound ratio", x, value: ratio });
        }
        if ratio > sup {
            sup = ratio;
            at = x;
        }
    }
    Ok(BoundCheckReport {
        name: format!("{kind}[{},eps0={:e},{}]", scenario.name, scenario.eps0, weight.name()),
        sample_count: count,
        worst_margin: -sup,
        worst_point: at,
        passed: sup.is_finite(),
        statistic: Some(sup),
    })
}

/// [`check_solution_bounds`] for the transformed bound of order `k`.
pub fn check_transformed_bounds(scenario: &Scenario, reference: &FemSolution, k: usize) -> Result<BoundCheckReport> {
    let kind = match k {
        0 => BoundKind::T0,
        1 => BoundKind::T1,
        2 => BoundKind::T2,
        _ => return Err(Error::Parameter(format!("no transformed bound of order {k}"))),
    };
    check_solution_bounds(scenario, reference, kind, BoundWeight::Standard)
}

/// Solves the scenario family on a reference mesh for each `eps0` and
/// compares the resulting sup-ratios. Passes when max/min is at most
/// [`UNIFORMITY_FACTOR`]; the margin is `UNIFORMITY_FACTOR - max/min` and the
/// worst point is the `eps0` with the largest ratio.
pub fn check_bound_uniformity(
    kind: ScenarioKind,
    eps0_list: &[f64],
    bound: BoundKind,
    weight: BoundWeight,
    h_ref: f64,
) -> Result<BoundCheckReport> {
    if eps0_list.len() < 2 {
        return Err(Error::Size { required: 2, got: eps0_list.len() });
    }
    let reports = map_cells(eps0_list.to_vec(), |eps0| {
        let s = scenario(kind, eps0)?;
        let e = layer_integral(&s.coeffs, LayerKind::E)?;
        let mesh = build_mesh(&s.coeffs, &e, h_ref, 1.0)?;
        let reference = galerkin_solve(&s, &mesh)?;
        check_solution_bounds(&s, &reference, bound, weight)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let sups: Vec<f64> = reports.iter().map(|r| r.statistic.unwrap_or(f64::NAN)).collect();
    let (mut max, mut min, mut at) = (f64::NEG_INFINITY, f64::INFINITY, eps0_list[0]);
    for (&s, &eps0) in sups.iter().zip(eps0_list) {
        if s > max {
            max = s;
            at = eps0;
        }
        min = min.min(s);
    }
    let spread = max / min;
    Ok(BoundCheckReport {
        name: format!("{bound}-uniformity[{kind},{}]", weight.name()),
        sample_count: reports.iter().map(|r| r.sample_count).sum(),
        worst_margin: UNIFORMITY_FACTOR - spread,
        worst_point: at,
        passed: reports.iter().all(|r| r.passed) && spread.is_finite() && spread <= UNIFORMITY_FACTOR,
        statistic: Some(spread),
    })
}
