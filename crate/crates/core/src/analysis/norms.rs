use crate::calculus::integrate_with_breaks;
use crate::error::{finite, Result};
use crate::fem::{energy_norm_squared, FemSolution};
use crate::mesh::LayerMesh;
use crate::problem::{CoefficientSet, ScalarFunction};

const EXACT_NORM_TOL: f64 = 1e-12;

/// Nodal interpolant. Boundary values are `f(0)` and `f(1)`, not forced to
/// zero.
pub fn interpolate(f: &ScalarFunction, mesh: &LayerMesh) -> Result<FemSolution> {
    let coefficients = mesh
        .nodes()
        .iter()
        .map(|&x| finite("interpolated function", x, f.eval(x)))
        .collect::<Result<Vec<_>>>()?;
    FemSolution::new(mesh.clone(), coefficients)
}

/// `||v||_eps` of a finite element function.
pub fn energy_norm(v: &FemSolution, coeffs: &CoefficientSet) -> f64 {
    let (grad, l2) = energy_norm_squared(v, coeffs);
    (grad + l2).sqrt()
}

/// Panel breaks resolving a layer of width `eps_lower` at `x = 0`.
fn layer_breaks(eps_lower: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut x = 0.25 * eps_lower;
    while x < 1.0 {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(1.0);
    breaks
}

/// `(||eps^{1/2} v'||^2, ||v||^2)` for a function in closed form, by
/// adaptive quadrature.
pub fn energy_norm_parts_exact(v: &ScalarFunction, coeffs: &CoefficientSet) -> Result<(f64, f64)> {
    let breaks = layer_breaks(coeffs.eps_lower);
    let grad = integrate_with_breaks(
        |x| {
            let d = v.deriv(x);
            coeffs.eps.eval(x) * d * d
        },
        &breaks,
        EXACT_NORM_TOL,
    )?;
    let l2 = integrate_with_breaks(|x| v.eval(x).powi(2), &breaks, EXACT_NORM_TOL)?;
    Ok((grad, l2))
}

/// `||v||_eps` for a function in closed form.
pub fn energy_norm_exact(v: &ScalarFunction, coeffs: &CoefficientSet) -> Result<f64> {
    let (grad, l2) = energy_norm_parts_exact(v, coeffs)?;
    Ok((grad + l2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_layer_mesh;
    use crate::problem::{scenario, ScenarioKind};

    #[test]
    fn linear_functions_are_reproduced() {
        let s = scenario(ScenarioKind::EpsLinear, 1e-3).unwrap();
        let mesh = build_layer_mesh(&s.coeffs, 1.0 / 16.0, 1.0).unwrap();
        let f = ScalarFunction::linear(0.3, -1.7);
        let fi = interpolate(&f, &mesh).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!((fi.eval(x) - f.eval(x)).abs() < 1e-14);
        }
        assert_eq!(fi.coefficients[0], 0.3);
    }

    #[test]
    fn square_on_two_elements() {
        let mesh = LayerMesh::uniform(2).unwrap();
        let f = ScalarFunction::new(|x| x * x, |x| 2.0 * x);
        let fi = interpolate(&f, &mesh).unwrap();
        for m in [0.25, 0.75] {
            assert!((fi.eval(m) - m * m - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_norm_of_identity() {
        let s = scenario(ScenarioKind::EpsConst, 0.01).unwrap();
        let v = ScalarFunction::linear(0.0, 1.0);
        let (g, l) = energy_norm_parts_exact(&v, &s.coeffs).unwrap();
        assert!((g - 0.01).abs() < 1e-14);
        assert!((l - 1.0 / 3.0).abs() < 1e-14);
        let mesh = LayerMesh::uniform(4).unwrap();
        let vi = interpolate(&v, &mesh).unwrap();
        assert!((energy_norm(&vi, &s.coeffs) - (0.01f64 + 1.0 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(energy_norm(&FemSolution::zero(mesh), &s.coeffs), 0.0);
    }

    #[test]
    fn layer_exemplar_gradient_norm() {
        // eps const: ||eps^{1/2} E'||^2 = (beta/2) (1 + q) / (1 - q), q = exp(-beta/eps)
        let eps0 = 1e-4;
        let s = scenario(ScenarioKind::EpsConst, eps0).unwrap();
        let e = s.layer_exemplar.as_ref().unwrap();
        let (g, _) = energy_norm_parts_exact(e, &s.coeffs).unwrap();
        let q = (-1.0 / eps0).exp();
        let exact = 0.5 * (1.0 + q) / (1.0 - q);
        assert!((g - exact).abs() < 1e-11, "{g} vs {exact}");
    }
}
