//! Linear Galerkin finite elements for the bilinear form
//! `a(v, w) = (eps v', w') - (b v', w) + (c v, w)` with homogeneous
//! Dirichlet conditions.

mod tridiagonal;

pub use tridiagonal::{solve_tridiagonal, TridiagonalSystem};

use crate::calculus::gauss;
use crate::error::{Error, Result};
use crate::mesh::LayerMesh;
use crate::problem::{CoefficientSet, Scenario};

/// Gauss points per element used for assembly and norm evaluation.
pub const DEFAULT_QUAD_POINTS: usize = 5;

/// A continuous piecewise-linear function on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct FemSolution {
    pub mesh: LayerMesh,
    pub coefficients: Vec<f64>,
}

impl FemSolution {
    pub fn new(mesh: LayerMesh, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != mesh.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} nodes",
                coefficients.len(),
                mesh.len()
            )));
        }
        Ok(Self { mesh, coefficients })
    }

    pub fn zero(mesh: LayerMesh) -> Self {
        let n = mesh.len();
        Self { mesh, coefficients: vec![0.0; n] }
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    /// Value on element `k` at `x`.
    #[inline]
    pub fn eval_on(&self, k: usize, x: f64) -> f64 {
        let n = self.mesh.nodes();
        let t = (x - n[k]) / (n[k + 1] - n[k]);
        self.coefficients[k] * (1.0 - t) + self.coefficients[k + 1] * t
    }

    /// Slope on element `k`.
    #[inline]
    pub fn slope_on(&self, k: usize) -> f64 {
        let n = self.mesh.nodes();
        (self.coefficients[k + 1] - self.coefficients[k]) / (n[k + 1] - n[k])
    }

    /// Piecewise-linear interpolation of the coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_on(self.mesh.locate(x), x)
    }
}

fn coefficient(what: &'static str, k: usize, x: f64, v: f64) -> Result<f64> {
    crate::error::finite(what, x, v).map_err(|e| Error::Assembly { element: k, reason: e.to_string() })
}

/// Sub-panels of `[left, right]` for assembly quadrature. An element wider
/// than a few multiples of the local diffusion can carry the exponential tail
/// of a layer in `f`; it is split geometrically from its left end, with
/// panel widths `eps(left) * 2^j`.
fn assembly_panels(coeffs: &CoefficientSet, left: f64, right: f64) -> Vec<(f64, f64)> {
    let scale = coeffs.eps.eval(left);
    if !(scale > 0.0) || right - left <= 4.0 * scale {
        return vec![(left, right)];
    }
    let mut panels = Vec::new();
    let (mut a, mut step) = (left, scale);
    while a + step < right - scale {
        panels.push((a, a + step));
        a += step;
        step *= 2.0;
    }
    panels.push((a, right));
    panels
}

type ElementSystem = ([[f64; 2]; 2], [f64; 2]);

/// Element contributions: 2x2 matrix `m[i][j] = a(phi_j, phi_i)` and load
/// vector for the two local hats.
fn element_system(
    coeffs: &CoefficientSet,
    left: f64,
    right: f64,
    k: usize,
    points: usize,
) -> Result<ElementSystem> {
    let width = right - left;
    let slope = [-1.0 / width, 1.0 / width];
    let mut m = [[0.0; 2]; 2];
    let mut load = [0.0; 2];
    let rule = gauss(points);
    let panels = assembly_panels(coeffs, left, right);
    for (x, w) in panels.iter().flat_map(|&(a, b)| rule.mapped(a, b)) {
        let eps = coefficient("diffusion", k, x, coeffs.eps.eval(x))?;
        let b = coefficient("convection", k, x, coeffs.b.eval(x))?;
        let c = coefficient("reaction", k, x, coeffs.c.eval(x))?;
        let f = coefficient("right-hand side", k, x, coeffs.f.eval(x))?;
        let t = (x - left) / width;
        let phi = [1.0 - t, t];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += w * (eps * slope[j] * slope[i] - b * slope[j] * phi[i] + c * phi[j] * phi[i]);
            }
            load[i] += w * f * phi[i];
        }
    }
    Ok((m, load))
}

/// Assembles the Galerkin system for the interior unknowns.
pub fn assemble(scenario: &Scenario, mesh: &LayerMesh, quad_points_per_element: usize) -> Result<TridiagonalSystem> {
    assemble_coefficients(&scenario.coeffs, mesh, quad_points_per_element)
}

pub fn assemble_coefficients(
    coeffs: &CoefficientSet,
    mesh: &LayerMesh,
    quad_points_per_element: usize,
) -> Result<TridiagonalSystem> {
    if quad_points_per_element < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 quadrature points per element, got {quad_points_per_element}"
        )));
    }
    let nodes = mesh.nodes();
    if nodes.len() < 3 {
        return Err(Error::Size { required: 3, got: nodes.len() });
    }
    let elements = element_contributions(coeffs, nodes, quad_points_per_element)?;

    // Unknown i corresponds to node i + 1.
    let n = nodes.len() - 2;
    let mut sys = TridiagonalSystem::zeros(n);
    for (k, (m, load)) in elements.into_iter().enumerate() {
        // local 0 = node k, local 1 = node k + 1
        let rows = [k.checked_sub(1), (k < n).then_some(k)];
        for (li, row) in rows.iter().enumerate() {
            let Some(i) = *row else { continue };
            sys.rhs[i] += load[li];
            for (lj, col) in rows.iter().enumerate() {
                let Some(j) = *col else { continue };
                sys.add(i, j, m[li][lj]);
            }
        }
    }
    Ok(sys)
}

#[cfg(feature = "parallel")]
fn element_contributions(
    coeffs: &CoefficientSet,
    nodes: &[f64],
    points: usize,
) -> Result<Vec<ElementSystem>> {
    use rayon::prelude::*;
    nodes
        .par_windows(2)
        .enumerate()
        .map(|(k, w)| element_system(coeffs, w[0], w[1], k, points))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn element_contributions(
    coeffs: &CoefficientSet,
    nodes: &[f64],
    points: usize,
) -> Result<Vec<ElementSystem>> {
    nodes
        .windows(2)
        .enumerate()
        .map(|(k, w)| element_system(coeffs, w[0], w[1], k, points))
        .collect()
}

/// Assembles and solves `a(u_h, v_h) = (f, v_h)` for all `v_h`.
pub fn galerkin_solve(scenario: &Scenario, mesh: &LayerMesh) -> Result<FemSolution> {
    galerkin_solve_with(&scenario.coeffs, mesh, DEFAULT_QUAD_POINTS)
}

pub fn galerkin_solve_with(coeffs: &CoefficientSet, mesh: &LayerMesh, quad_points: usize) -> Result<FemSolution> {
    let sys = assemble_coefficients(coeffs, mesh, quad_points)?;
    let interior = solve_tridiagonal(&sys)?;
    let mut coefficients = Vec::with_capacity(mesh.len());
    coefficients.push(0.0);
    coefficients.extend(interior);
    coefficients.push(0.0);
    Ok(FemSolution { mesh: mesh.clone(), coefficients })
}

/// `a(v, w)` by element-wise Gauss quadrature.
pub fn bilinear_form(v: &FemSolution, w: &FemSolution, scenario: &Scenario) -> Result<f64> {
    bilinear_form_coefficients(v, w, &scenario.coeffs)
}

pub fn bilinear_form_coefficients(v: &FemSolution, w: &FemSolution, coeffs: &CoefficientSet) -> Result<f64> {
    if v.nodes() != w.nodes() {
        return Err(Error::Shape("bilinear form of functions on different meshes".into()));
    }
    let nodes = v.nodes();
    let mut acc = 0.0;
    for k in 0..nodes.len() - 1 {
        let (dv, dw) = (v.slope_on(k), w.slope_on(k));
        for (x, q) in gauss(DEFAULT_QUAD_POINTS).mapped(nodes[k], nodes[k + 1]) {
            acc += q
                * (coeffs.eps.eval(x) * dv * dw - coeffs.b.eval(x) * dv * w.eval_on(k, x)
                    + coeffs.c.eval(x) * v.eval_on(k, x) * w.eval_on(k, x));
        }
    }
    Ok(acc)
}

/// `||v||_eps^2 = ||eps^{1/2} v'||^2 + ||v||^2` for a finite element function.
pub fn energy_norm_squared(v: &FemSolution, coeffs: &CoefficientSet) -> (f64, f64) {
    let nodes = v.nodes();
    let (mut grad, mut l2) = (0.0, 0.0);
    for k in 0..nodes.len() - 1 {
        let dv = v.slope_on(k);
        for (x, q) in gauss(DEFAULT_QUAD_POINTS).mapped(nodes[k], nodes[k + 1]) {
            let val = v.eval_on(k, x);
            grad += q * coeffs.eps.eval(x) * dv * dv;
            l2 += q * val * val;
        }
    }
    (grad, l2)
}
