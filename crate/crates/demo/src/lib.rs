//! WebAssembly bindings for the browser demo in `www/`. Each export takes
//! plain numbers and strings and returns a JSON document; the `compute_*`
//! functions hold the logic and are tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use layerfem::analysis::{convergence_study, error_report};
use layerfem::fem::galerkin_solve;
use layerfem::mesh::{build_layer_mesh, predict_cardinality};
use layerfem::problem::{scenario, ScenarioKind};

/// Upper limit on the total node count of one request, to keep the page
/// responsive.
pub const MAX_NODES: usize = 200_000;

/// Points used to draw the exact solution.
const EXACT_SAMPLES: usize = 400;

#[derive(Debug, Serialize)]
pub struct MeshView {
    pub nodes: Vec<f64>,
    pub n_star: usize,
    pub tau: f64,
    pub tau_star: f64,
    pub predicted: f64,
}

#[derive(Debug, Serialize)]
pub struct SolutionView {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Sample points clustered towards the layer, with exact values.
    pub exact: Option<(Vec<f64>, Vec<f64>)>,
    pub energy_error: f64,
    pub reference: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ConvergenceView {
    pub eps0: Vec<f64>,
    pub h: Vec<f64>,
    /// `energy_error[i][j]` for `eps0[i]` and `h[j]`; `None` for skipped cells.
    pub energy_error: Vec<Vec<Option<f64>>>,
    pub rate: Vec<Vec<Option<f64>>>,
}

fn kind(name: &str) -> Result<ScenarioKind, String> {
    name.parse().map_err(|e: layerfem::Error| e.to_string())
}

pub fn compute_mesh(name: &str, eps0: f64, h: f64) -> Result<MeshView, String> {
    let s = scenario(kind(name)?, eps0).map_err(|e| e.to_string())?;
    let predicted = predict_cardinality(&s.coeffs, h).map_err(|e| e.to_string())?;
    if predicted > MAX_NODES as f64 {
        return Err(format!("about {predicted:.0} nodes requested; the demo allows {MAX_NODES}"));
    }
    let mesh = build_layer_mesh(&s.coeffs, h, 1.0).map_err(|e| e.to_string())?;
    Ok(MeshView {
        n_star: mesh.n_star(),
        tau: mesh.tau(),
        tau_star: mesh.tau_star(),
        predicted,
        nodes: mesh.nodes().to_vec(),
    })
}

pub fn compute_solution(name: &str, eps0: f64, h: f64) -> Result<SolutionView, String> {
    let s = scenario(kind(name)?, eps0).map_err(|e| e.to_string())?;
    let mesh = build_layer_mesh(&s.coeffs, h, 1.0).map_err(|e| e.to_string())?;
    if 16 * mesh.len() > MAX_NODES && s.exact.is_none() {
        return Err(format!("reference mesh for h = {h} is too large for the demo"));
    }
    let u = galerkin_solve(&s, &mesh).map_err(|e| e.to_string())?;
    let report = match &s.exact {
        Some(_) => error_report(&u, &s, None),
        None => {
            let fine = build_layer_mesh(&s.coeffs, h / 16.0, 1.0).and_then(|m| galerkin_solve(&s, &m));
            fine.and_then(|r| error_report(&u, &s, Some(&r)))
        }
    }
    .map_err(|e| e.to_string())?;
    let exact = s.exact.as_ref().map(|f| {
        // Cubic clustering resolves the layer at x = 0.
        let xs: Vec<f64> = (0..=EXACT_SAMPLES).map(|i| (i as f64 / EXACT_SAMPLES as f64).powi(3)).collect();
        let ys = xs.iter().map(|&x| f.eval(x)).collect();
        (xs, ys)
    });
    Ok(SolutionView {
        nodes: u.nodes().to_vec(),
        values: u.coefficients.clone(),
        exact,
        energy_error: report.energy_error,
        reference: if s.exact.is_some() { "closed-form" } else { "fine-mesh" },
    })
}

/// Sweep over `eps0_list` and `levels` successive halvings of `h0`.
pub fn compute_convergence(name: &str, eps0_list: &[f64], h0: f64, levels: usize) -> Result<ConvergenceView, String> {
    let k = kind(name)?;
    if levels == 0 || levels > 10 {
        return Err(format!("levels = {levels} must lie in 1..=10"));
    }
    let h: Vec<f64> = (0..levels).map(|i| h0 / 2f64.powi(i as i32)).collect();
    let finest = scenario(k, eps0_list.iter().copied().fold(0.1, f64::min)).map_err(|e| e.to_string())?;
    let budget = if finest.exact.is_some() { 1.0 } else { 16.0 };
    let nodes = predict_cardinality(&finest.coeffs, h[levels - 1]).map_err(|e| e.to_string())? * budget;
    if nodes > MAX_NODES as f64 {
        return Err(format!("the finest level needs about {nodes:.0} nodes; the demo allows {MAX_NODES}"));
    }
    let table = convergence_study(|e| scenario(k, e), &h, eps0_list, 1.0).map_err(|e| e.to_string())?;
    let eps0 = table.eps0_values();
    let eps0 = if eps0.is_empty() {
        let mut v = eps0_list.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    } else {
        eps0
    };
    let lookup = |e: f64, f: &dyn Fn(&layerfem::analysis::ConvergenceRow) -> Option<f64>| -> Vec<Option<f64>> {
        h.iter().map(|&hh| table.row(e, hh).and_then(f)).collect()
    };
    Ok(ConvergenceView {
        energy_error: eps0.iter().map(|&e| lookup(e, &|r| Some(r.report.energy_error))).collect(),
        rate: eps0.iter().map(|&e| lookup(e, &|r| r.rate)).collect(),
        eps0,
        h,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mesh(scenario: &str, eps0: f64, h: f64) -> Result<String, JsValue> {
    to_js(compute_mesh(scenario, eps0, h))
}

#[wasm_bindgen]
pub fn solve(scenario: &str, eps0: f64, h: f64) -> Result<String, JsValue> {
    to_js(compute_solution(scenario, eps0, h))
}

#[wasm_bindgen]
pub fn converge(scenario: &str, eps0_list: Vec<f64>, h0: f64, levels: usize) -> Result<String, JsValue> {
    to_js(compute_convergence(scenario, &eps0_list, h0, levels))
}
