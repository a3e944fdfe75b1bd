use serde::Serialize;

use crate::calculus::gauss;
use crate::error::{finite, Error, Result};
use crate::fem::FemSolution;
use crate::problem::{CoefficientSet, ScalarFunction, Scenario};

/// Gauss points per element when measuring errors.
pub const ERROR_QUAD_POINTS: usize = 7;

/// A fine-mesh reference needs at least this many times the elements of the
/// solution it is compared against.
pub const MIN_REFERENCE_REFINEMENT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    ClosedForm,
    FineMesh,
}

/// Errors of a discrete solution in the energy norm and its two parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub node_count: usize,
    pub energy_error: f64,
    pub l2_error: f64,
    /// `||eps^{1/2} (u - u_h)'||`
    pub weighted_grad_error: f64,
    pub reference_kind: ReferenceKind,
}

impl ErrorReport {
    fn from_squares(sol: &FemSolution, grad_sq: f64, l2_sq: f64, kind: ReferenceKind) -> Self {
        Self {
            h: sol.mesh.h(),
            node_count: sol.mesh.len(),
            energy_error: (grad_sq + l2_sq).sqrt(),
            l2_error: l2_sq.sqrt(),
            weighted_grad_error: grad_sq.sqrt(),
            reference_kind: kind,
        }
    }
}

/// Error of `sol` against the scenario's exact solution or, when given, a
/// finite element reference on a finer mesh.
pub fn error_report(sol: &FemSolution, scenario: &Scenario, reference: Option<&FemSolution>) -> Result<ErrorReport> {
    match (reference, &scenario.exact) {
        (Some(r), _) => {
            if r.mesh.elements() < MIN_REFERENCE_REFINEMENT * sol.mesh.elements() {
                return Err(Error::Configuration(format!(
                    "reference has {} elements, need at least {} for a solution with {}",
                    r.mesh.elements(),
                    MIN_REFERENCE_REFINEMENT * sol.mesh.elements(),
                    sol.mesh.elements()
                )));
            }
            compare_fe(sol, r, &scenario.coeffs)
        }
        (None, Some(u)) => error_against(sol, u, &scenario.coeffs),
        (None, None) => Err(Error::Configuration(format!(
            "scenario '{}' has no exact solution and no reference was given",
            scenario.name
        ))),
    }
}

/// Element-wise Gauss quadrature of `u - sol` and `eps^{1/2} (u - sol)'`.
pub fn error_against(sol: &FemSolution, u: &ScalarFunction, coeffs: &CoefficientSet) -> Result<ErrorReport> {
    let nodes = sol.nodes();
    let (mut grad, mut l2) = (0.0, 0.0);
    for k in 0..nodes.len() - 1 {
        let slope = sol.slope_on(k);
        for (x, w) in gauss(ERROR_QUAD_POINTS).mapped(nodes[k], nodes[k + 1]) {
            let d = finite("exact solution", x, u.eval(x))? - sol.eval_on(k, x);
            let dd = finite("exact derivative", x, u.deriv(x))? - slope;
            grad += w * coeffs.eps.eval(x) * dd * dd;
            l2 += w * d * d;
        }
    }
    Ok(ErrorReport::from_squares(sol, grad, l2, ReferenceKind::ClosedForm))
}

/// Difference of two finite element functions, integrated on the union of
/// their node sets where both are linear.
pub fn compare_fe(sol: &FemSolution, reference: &FemSolution, coeffs: &CoefficientSet) -> Result<ErrorReport> {
    let (a, b) = (sol.nodes(), reference.nodes());
    if a[0] != b[0] || a[a.len() - 1] != b[b.len() - 1] {
        return Err(Error::Shape("meshes cover different intervals".into()));
    }
    let mut merged: Vec<f64> = a.iter().chain(b).copied().collect();
    merged.sort_by(f64::total_cmp);
    merged.dedup();

    let (mut i, mut j) = (0, 0);
    let (mut grad, mut l2) = (0.0, 0.0);
    for w in merged.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = 0.5 * (p + q);
        while a[i + 1] < mid {
            i += 1;
        }
        while b[j + 1] < mid {
            j += 1;
        }
        let dp = sol.eval_on(i, p) - reference.eval_on(j, p);
        let dq = sol.eval_on(i, q) - reference.eval_on(j, q);
        let ds = sol.slope_on(i) - reference.slope_on(j);
        l2 += (q - p) * (dp * dp + dp * dq + dq * dq) / 3.0;
        let eps_mean: f64 = gauss(ERROR_QUAD_POINTS).mapped(p, q).map(|(x, wt)| wt * coeffs.eps.eval(x)).sum();
        grad += eps_mean * ds * ds;
    }
    Ok(ErrorReport::from_squares(sol, grad, l2, ReferenceKind::FineMesh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::interpolate;
    use crate::fem::galerkin_solve;
    use crate::mesh::{build_layer_mesh, LayerMesh};
    use crate::problem::{scenario, ScenarioKind};

    #[test]
    fn self_comparison_is_zero() {
        let s = scenario(ScenarioKind::EpsExp, 1e-4).unwrap();
        let mesh = build_layer_mesh(&s.coeffs, 1.0 / 32.0, 1.0).unwrap();
        let u = galerkin_solve(&s, &mesh).unwrap();
        let r = compare_fe(&u, &u, &s.coeffs).unwrap();
        assert_eq!((r.energy_error, r.l2_error, r.weighted_grad_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn merged_nodes_are_exact_for_linear_difference() {
        // v = x on 2 elements vs 0 on 3 elements: ||v||^2 = 1/3, ||v'||^2 = eps
        let s = scenario(ScenarioKind::EpsConst, 0.05).unwrap();
        let v = interpolate(&ScalarFunction::linear(0.0, 1.0), &LayerMesh::uniform(2).unwrap()).unwrap();
        let z = FemSolution::zero(LayerMesh::uniform(3).unwrap());
        let r = compare_fe(&v, &z, &s.coeffs).unwrap();
        assert!((r.l2_error.powi(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.weighted_grad_error.powi(2) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pythagoras() {
        let s = scenario(ScenarioKind::Manufactured, 1e-5).unwrap();
        let mesh = build_layer_mesh(&s.coeffs, 1.0 / 16.0, 1.0).unwrap();
        let u = galerkin_solve(&s, &mesh).unwrap();
        let r = error_report(&u, &s, None).unwrap();
        assert_eq!(r.reference_kind, ReferenceKind::ClosedForm);
        let lhs = r.energy_error.powi(2);
        let rhs = r.weighted_grad_error.powi(2) + r.l2_error.powi(2);
        assert!((lhs - rhs).abs() <= 1e-10 * lhs);
        assert!(r.l2_error > 0.0 && r.weighted_grad_error > 0.0);
    }

    #[test]
    fn configuration_errors() {
        let s = scenario(ScenarioKind::EpsLinear, 1e-3).unwrap();
        let coarse = build_layer_mesh(&s.coeffs, 1.0 / 8.0, 1.0).unwrap();
        let u = galerkin_solve(&s, &coarse).unwrap();
        assert!(matches!(error_report(&u, &s, None), Err(Error::Configuration(_))));
        let fine = build_layer_mesh(&s.coeffs, 1.0 / 16.0, 1.0).unwrap();
        let r = galerkin_solve(&s, &fine).unwrap();
        assert!(matches!(error_report(&u, &s, Some(&r)), Err(Error::Configuration(_))));
        let finest = build_layer_mesh(&s.coeffs, 1.0 / 128.0, 1.0).unwrap();
        let r = galerkin_solve(&s, &finest).unwrap();
        let rep = error_report(&u, &s, Some(&r)).unwrap();
        assert_eq!(rep.reference_kind, ReferenceKind::FineMesh);
        assert!(rep.energy_error > 0.0);
    }
}
