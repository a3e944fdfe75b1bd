//! The layer-adapted mesh: a recursively graded part
//! `x_1 = h delta eps_lower`, `x_{i+1} = x_i + h x_i` up to the first node
//! at or beyond the transition point `tau*`, followed by an equidistant
//! part on `[tau, 1]`.

use serde::Serialize;

use crate::calculus::{invert_monotone, layer_integral, CumulativeIntegral, LayerKind, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::problem::CoefficientSet;

/// Default cap on the number of mesh nodes.
pub const DEFAULT_NODE_CAP: usize = 10_000_000;

/// Largest transition point accepted before the build is declared degenerate.
pub const MAX_TAU_STAR: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerMesh {
    nodes: Vec<f64>,
    h: f64,
    delta: f64,
    n_star: usize,
    tau_index: usize,
    tau_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Graded,
    Coarse,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Graded => "graded",
            Region::Coarse => "coarse",
        }
    }
}

impl LayerMesh {
    /// Equidistant mesh with `intervals` elements. Has no graded part.
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Size { required: 2, got: intervals });
        }
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 / intervals as f64).collect();
        nodes[intervals] = 1.0;
        Ok(Self {
            nodes,
            h: 1.0 / intervals as f64,
            delta: 0.0,
            n_star: 0,
            tau_index: 0,
            tau_star: 0.0,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of graded steps `N*`.
    pub fn n_star(&self) -> usize {
        self.n_star
    }

    /// Index of `tau = x_{N*+1}`, where the equidistant part starts.
    pub fn tau_index(&self) -> usize {
        self.tau_index
    }

    pub fn tau(&self) -> f64 {
        self.nodes[self.tau_index]
    }

    pub fn tau_star(&self) -> f64 {
        self.tau_star
    }

    pub fn is_graded(&self) -> bool {
        self.tau_index > 0
    }

    pub fn region(&self, index: usize) -> Region {
        if index < self.tau_index {
            Region::Graded
        } else {
            Region::Coarse
        }
    }

    /// Index `k` of the element `[x_k, x_{k+1}]` containing `x`.
    pub fn locate(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&n| n <= x);
        k.saturating_sub(1).min(self.elements() - 1)
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self, eps_lower: f64) -> std::result::Result<(), String> {
        let n = &self.nodes;
        if n.first() != Some(&0.0) || n.last() != Some(&1.0) {
            return Err("mesh must start at 0 and end at 1".into());
        }
        if n.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("nodes not strictly increasing".into());
        }
        if self.is_graded() {
            let x1 = self.h * self.delta * eps_lower;
            if n[1] != x1 {
                return Err(format!("x_1 = {} but h delta eps_lower = {x1}", n[1]));
            }
            for i in 1..=self.n_star {
                let expect = n[i] * (1.0 + self.h);
                if ((n[i + 1] - expect) / expect).abs() > 1e-14 {
                    return Err(format!("graded step {i} off: {} vs {expect}", n[i + 1]));
                }
            }
            if self.tau_index != self.n_star + 1 {
                return Err("tau index is not N* + 1".into());
            }
            if !(n[self.tau_index] >= self.tau_star && n[self.tau_index - 1] < self.tau_star) {
                return Err("tau is not the first node at or beyond tau*".into());
            }
        }
        let coarse = &n[self.tau_index..];
        let spacing = (1.0 - coarse[0]) / (coarse.len() - 1) as f64;
        for w in coarse.windows(2) {
            let d = w[1] - w[0];
            if (d - spacing).abs() > 1e-12 * spacing.max(1e-300) + 4.0 * f64::EPSILON {
                return Err(format!("coarse part not equidistant: {d} vs {spacing}"));
            }
        }
        if spacing > self.h * (1.0 + 1e-12) {
            return Err(format!("coarse spacing {spacing} exceeds h = {}", self.h));
        }
        Ok(())
    }
}

/// Solves `e(tau*) = -(2/beta) ln h`.
///
/// Fails with [`Error::DegenerateRegime`] when the solution would lie beyond
/// [`MAX_TAU_STAR`] (diffusion not small relative to `h`).
pub fn compute_tau_star(coeffs: &CoefficientSet, e: &CumulativeIntegral, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter(format!("mesh parameter h = {h} outside (0, 1)")));
    }
    let target = -2.0 / coeffs.beta * h.ln();
    let half = e.eval(MAX_TAU_STAR);
    if target > half {
        return Err(Error::DegenerateRegime(format!(
            "transition point exceeds {MAX_TAU_STAR}: e(tau*) = {target} > e({MAX_TAU_STAR}) = {half}"
        )));
    }
    invert_monotone(e, target, DEFAULT_ROOT_TOL)
}

/// Builds the graded-plus-equidistant mesh for parameter `h` and first-step
/// scale `delta`.
pub fn build_mesh(coeffs: &CoefficientSet, e: &CumulativeIntegral, h: f64, delta: f64) -> Result<LayerMesh> {
    build_mesh_capped(coeffs, e, h, delta, DEFAULT_NODE_CAP)
}

pub fn build_mesh_capped(
    coeffs: &CoefficientSet,
    e: &CumulativeIntegral,
    h: f64,
    delta: f64,
    node_cap: usize,
) -> Result<LayerMesh> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let tau_star = compute_tau_star(coeffs, e, h)?;
    let x1 = h * delta * coeffs.eps_lower;
    if !(x1 < 1.0) {
        return Err(Error::DegenerateRegime(format!("first node x_1 = {x1} is not inside (0, 1)")));
    }

    // Predict the size before allocating.
    let graded_estimate = if x1 >= tau_star {
        1.0
    } else {
        (tau_star / x1).ln() / h.ln_1p() + 2.0
    };
    let coarse_estimate = (1.0 / h).ceil() + 1.0;
    if graded_estimate + coarse_estimate > node_cap as f64 {
        return Err(Error::Resource(format!(
            "mesh would need about {:.0} nodes (cap {node_cap})",
            graded_estimate + coarse_estimate
        )));
    }

    let mut nodes = vec![0.0, x1];
    while *nodes.last().unwrap() < tau_star {
        let x = *nodes.last().unwrap();
        nodes.push(x + h * x);
    }
    let tau_index = nodes.len() - 1;
    let tau = nodes[tau_index];
    if !(tau < 1.0) {
        return Err(Error::DegenerateRegime(format!("graded part reaches {tau} >= 1")));
    }
    let m = ((1.0 - tau) / h).ceil().max(1.0) as usize;
    let spacing = (1.0 - tau) / m as f64;
    nodes.extend((1..m).map(|j| tau + j as f64 * spacing));
    nodes.push(1.0);

    Ok(LayerMesh {
        nodes,
        h,
        delta,
        n_star: tau_index - 1,
        tau_index,
        tau_star,
    })
}

/// [`build_mesh`] with the layer integral tabulated on the fly.
pub fn build_layer_mesh(coeffs: &CoefficientSet, h: f64, delta: f64) -> Result<LayerMesh> {
    let e = layer_integral(coeffs, LayerKind::E)?;
    build_mesh(coeffs, &e, h, delta)
}

/// Predicted mesh size `(ln(eps_upper/eps_lower) + ln(-ln h / h)) / h`, up
/// to a constant factor.
pub fn predict_cardinality(coeffs: &CoefficientSet, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter(format!("mesh parameter h = {h} outside (0, 1)")));
    }
    let log_ratio = -h.ln() / h;
    if log_ratio < 1.0 {
        return Err(Error::Parameter(format!("h = {h} too close to 1: -ln h / h = {log_ratio} < 1")));
    }
    let psi = (coeffs.eps_upper / coeffs.eps_lower).ln() + log_ratio.ln();
    Ok(psi / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{scenario, CoefficientSet, ScalarFunction, ScenarioKind};

    fn setup(kind: ScenarioKind, eps0: f64) -> (CoefficientSet, CumulativeIntegral) {
        let s = scenario(kind, eps0).unwrap();
        let e = layer_integral(&s.coeffs, LayerKind::E).unwrap();
        (s.coeffs, e)
    }

    #[test]
    fn tau_star_constant_diffusion() {
        let (c, e) = setup(ScenarioKind::EpsConst, 0.01);
        let tau = compute_tau_star(&c, &e, 0.1).unwrap();
        assert!((tau - 0.02 * 10f64.ln()).abs() < 1e-13);
        assert!((tau - 0.04605170).abs() < 1e-8);
    }

    #[test]
    fn tau_star_linear_diffusion() {
        let (c, e) = setup(ScenarioKind::EpsLinear, 0.01);
        let tau = compute_tau_star(&c, &e, 0.1).unwrap();
        let exact = 10f64.powf(0.02) - 1.0;
        assert!((tau - exact).abs() < 1e-13);
        assert!((tau - 0.0471285).abs() < 1e-7);
    }

    #[test]
    fn tau_star_degenerate_for_large_diffusion() {
        let coeffs = CoefficientSet {
            eps: ScalarFunction::constant(0.4),
            b: ScalarFunction::constant(2.0),
            c: ScalarFunction::constant(1.0),
            f: ScalarFunction::constant(1.0),
            beta: 1.0,
            gamma: 1.0,
            eps_lower: 0.4,
            eps_upper: 0.4,
            sigma: 0.0,
        };
        let e = layer_integral(&coeffs, LayerKind::E).unwrap();
        // tau* = 0.8 ln 2 = 0.5545 > 1/2
        assert!(matches!(compute_tau_star(&coeffs, &e, 0.5), Err(Error::DegenerateRegime(_))));
        assert!(matches!(build_mesh(&coeffs, &e, 0.5, 1.0), Err(Error::DegenerateRegime(_))));
    }

    #[test]
    fn tau_star_rejects_bad_h() {
        let (c, e) = setup(ScenarioKind::EpsConst, 0.01);
        assert!(matches!(compute_tau_star(&c, &e, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(compute_tau_star(&c, &e, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn geometric_sequence_oracle() {
        let (c, e) = setup(ScenarioKind::EpsConst, 0.01);
        let mesh = build_mesh(&c, &e, 0.1, 1.0).unwrap();
        // Oracle: walk 0.001 * 1.1^k until it reaches tau*.
        let tau_star = 0.02 * 10f64.ln();
        let mut k = 0;
        while 0.001 * 1.1f64.powi(k) < tau_star {
            k += 1;
        }
        assert_eq!(k, 41);
        assert_eq!(mesh.n_star(), k as usize);
        assert_eq!(mesh.tau_index(), k as usize + 1);
        assert!((mesh.tau() - 0.001 * 1.1f64.powi(41)).abs() < 1e-15);
        assert!((mesh.tau() - 0.0497852).abs() < 1e-6);
        assert_eq!(mesh.nodes()[1], 0.001);
        mesh.check_invariants(0.01).unwrap();
    }

    #[test]
    fn coarse_spacing_bounded_by_h() {
        let (c, e) = setup(ScenarioKind::EpsLinear, 0.01);
        let mesh = build_mesh(&c, &e, 0.05, 1.0).unwrap();
        let tau = mesh.tau();
        let m = ((1.0 - tau) / 0.05).ceil();
        let spacing = (1.0 - tau) / m;
        assert!(spacing <= 0.05);
        let nodes = mesh.nodes();
        assert_eq!(nodes.len() - 1 - mesh.tau_index(), m as usize);
        assert!((nodes[nodes.len() - 2] - (1.0 - spacing)).abs() < 1e-14);
        mesh.check_invariants(0.01).unwrap();
    }

    #[test]
    fn boundary_nodes_are_pinned() {
        for kind in ScenarioKind::ALL {
            for h in [0.2, 1.0 / 64.0, 1.0 / 300.0] {
                let (c, e) = setup(kind, 1e-6);
                let mesh = build_mesh(&c, &e, h, 1.0).unwrap();
                assert_eq!(mesh.nodes()[0], 0.0);
                assert_eq!(*mesh.nodes().last().unwrap(), 1.0);
                mesh.check_invariants(c.eps_lower).unwrap();
            }
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let (c, e) = setup(ScenarioKind::EpsConst, 1e-3);
        assert!(matches!(build_mesh_capped(&c, &e, 0.01, 1.0, 100), Err(Error::Resource(_))));
    }

    #[test]
    fn bad_delta() {
        let (c, e) = setup(ScenarioKind::EpsConst, 1e-3);
        assert!(matches!(build_mesh(&c, &e, 0.1, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn large_delta_gives_no_graded_steps() {
        let (c, e) = setup(ScenarioKind::EpsConst, 1e-3);
        // x_1 = 0.1 * 100 * 1e-3 = 0.01 > tau* = 0.0046
        let mesh = build_mesh(&c, &e, 0.1, 100.0).unwrap();
        assert_eq!(mesh.n_star(), 0);
        assert_eq!(mesh.tau_index(), 1);
        mesh.check_invariants(1e-3).unwrap();
    }

    #[test]
    fn cardinality_formula() {
        let (c, _) = setup(ScenarioKind::EpsConst, 0.01);
        let p = predict_cardinality(&c, 0.1).unwrap();
        let psi = (10f64.ln() / 0.1).ln();
        assert!((psi - 3.1366).abs() < 1e-4);
        assert!((p - psi / 0.1).abs() < 1e-12);
        assert!((p - 31.37).abs() < 0.01);

        let wide = CoefficientSet { eps_lower: 1e-6, eps_upper: 2e-6, ..c.clone() };
        let p = predict_cardinality(&wide, 0.1).unwrap();
        assert!((p * 0.1 - 3.8298).abs() < 1e-4);

        assert!(matches!(predict_cardinality(&c, 0.9), Err(Error::Parameter(_))));
        assert!(matches!(predict_cardinality(&c, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn uniform_mesh() {
        let mesh = LayerMesh::uniform(4).unwrap();
        assert_eq!(mesh.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(!mesh.is_graded());
        assert_eq!(mesh.region(0), Region::Coarse);
        mesh.check_invariants(1.0).unwrap();
    }

    #[test]
    fn locate_finds_the_element() {
        let mesh = LayerMesh::uniform(4).unwrap();
        assert_eq!(mesh.locate(0.0), 0);
        assert_eq!(mesh.locate(0.3), 1);
        assert_eq!(mesh.locate(1.0), 3);
    }
}
