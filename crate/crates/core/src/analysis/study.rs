use serde::Serialize;

use super::report::{error_report, ErrorReport, ERROR_QUAD_POINTS};
use super::norms::interpolate;
use crate::calculus::{gauss, layer_integral, LayerKind};
use crate::error::{Error, Result};
use crate::fem::galerkin_solve;
use crate::map_cells;
use crate::mesh::{build_mesh, LayerMesh};
use crate::problem::{ScalarFunction, Scenario};

/// Fine-mesh references are built with `h / REFERENCE_REFINEMENT`.
pub const REFERENCE_REFINEMENT: f64 = 16.0;

// Samples per coarse element for the maximum-norm interpolation error.
const MAX_SAMPLES: usize = 32;

/// `ln(e_coarse / e_fine) / ln(h_coarse / h_fine)`; `log2` of the error
/// ratio when `h` is halved.
pub fn observed_rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps0: f64,
    pub h: f64,
    pub report: ErrorReport,
    /// Rate against the previous (coarser) row with the same `eps0`.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCell {
    pub eps0: f64,
    pub h: f64,
    pub reason: String,
}

/// Rows sorted by `eps0` ascending, then `h` descending.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub skipped: Vec<SkippedCell>,
}

impl ConvergenceTable {
    pub fn eps0_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.eps0).collect();
        v.dedup();
        v
    }

    pub fn rows_for(&self, eps0: f64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.eps0 == eps0)
    }

    pub fn rates_for(&self, eps0: f64) -> Vec<f64> {
        self.rows_for(eps0).filter_map(|r| r.rate).collect()
    }

    pub fn row(&self, eps0: f64, h: f64) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.eps0 == eps0 && r.h == h)
    }
}

fn sorted_unique(values: &[f64], descending: bool) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| if descending { b.total_cmp(a) } else { a.total_cmp(b) });
    v.dedup();
    v
}

/// Solves on the mesh for `h` and measures the error against the exact
/// solution, or against a solve at `h / 16` when there is none.
pub fn measure_error(scenario: &Scenario, h: f64, delta: f64) -> Result<ErrorReport> {
    let e = layer_integral(&scenario.coeffs, LayerKind::E)?;
    let mesh = build_mesh(&scenario.coeffs, &e, h, delta)?;
    let sol = galerkin_solve(scenario, &mesh)?;
    if scenario.exact.is_some() {
        return error_report(&sol, scenario, None);
    }
    let fine = build_mesh(&scenario.coeffs, &e, h / REFERENCE_REFINEMENT, delta)?;
    let reference = galerkin_solve(scenario, &fine)?;
    error_report(&sol, scenario, Some(&reference))
}

fn skippable(err: &Error) -> bool {
    matches!(err, Error::DegenerateRegime(_) | Error::Resource(_))
}

/// Solves and measures every `(eps0, h)` cell. Cells whose mesh cannot be
/// built (degenerate transition point, size cap) are recorded as skipped.
pub fn convergence_study<F>(family: F, h_list: &[f64], eps0_list: &[f64], delta: f64) -> Result<ConvergenceTable>
where
    F: Fn(f64) -> Result<Scenario> + Sync + Send,
{
    let hs = sorted_unique(h_list, true);
    let eps0s = sorted_unique(eps0_list, false);
    let cells: Vec<(f64, f64)> = eps0s.iter().flat_map(|&e| hs.iter().map(move |&h| (e, h))).collect();
    let results = map_cells(cells.clone(), |(eps0, h)| family(eps0).and_then(|s| measure_error(&s, h, delta)));

    let mut table = ConvergenceTable::default();
    let mut previous: Option<ConvergenceRow> = None;
    for ((eps0, h), result) in cells.into_iter().zip(results) {
        match result {
            Ok(report) => {
                let rate = previous
                    .as_ref()
                    .filter(|p| p.eps0 == eps0)
                    .map(|p| observed_rate(p.report.energy_error, report.energy_error, p.h, h));
                let row = ConvergenceRow { eps0, h, report, rate };
                previous = Some(row.clone());
                table.rows.push(row);
            }
            Err(e) if skippable(&e) => table.skipped.push(SkippedCell { eps0, h, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    Ok(table)
}

/// Interpolation errors of the smooth and layer exemplars on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationRow {
    pub h: f64,
    pub node_count: usize,
    pub tau: f64,
    /// `||S - S^I||` on `[0, 1]`
    pub smooth_l2: f64,
    /// `|S - S^I|_1` on `[0, 1]`
    pub smooth_h1: f64,
    /// `||E - E^I||` on `[tau, 1]`
    pub layer_l2_coarse: f64,
    /// `max |E - E^I|` on `[tau, 1]`
    pub layer_max_coarse: f64,
    /// `||eps^{-1/2} (E - E^I)||` on `[0, tau]`
    pub layer_weighted_l2_fine: f64,
    /// `||eps^{1/2} (E - E^I)'||` on `[0, tau]`
    pub layer_weighted_grad_fine: f64,
}

/// Observed rates between consecutive rows of an interpolation study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationRates {
    pub h_coarse: f64,
    pub h_fine: f64,
    pub smooth_l2: f64,
    pub smooth_h1: f64,
    pub layer_l2_coarse: f64,
    pub layer_max_coarse: f64,
    pub layer_weighted_l2_fine: f64,
    pub layer_weighted_grad_fine: f64,
}

impl InterpolationRates {
    fn between(a: &InterpolationRow, b: &InterpolationRow) -> Self {
        let r = |x: f64, y: f64| observed_rate(x, y, a.h, b.h);
        Self {
            h_coarse: a.h,
            h_fine: b.h,
            smooth_l2: r(a.smooth_l2, b.smooth_l2),
            smooth_h1: r(a.smooth_h1, b.smooth_h1),
            layer_l2_coarse: r(a.layer_l2_coarse, b.layer_l2_coarse),
            layer_max_coarse: r(a.layer_max_coarse, b.layer_max_coarse),
            layer_weighted_l2_fine: r(a.layer_weighted_l2_fine, b.layer_weighted_l2_fine),
            layer_weighted_grad_fine: r(a.layer_weighted_grad_fine, b.layer_weighted_grad_fine),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationTable {
    pub scenario: String,
    pub eps0: f64,
    /// Sorted by `h` descending.
    pub rows: Vec<InterpolationRow>,
    pub rates: Vec<InterpolationRates>,
}

fn exemplars(scenario: &Scenario) -> Result<(&ScalarFunction, &ScalarFunction)> {
    match (&scenario.smooth_exemplar, &scenario.layer_exemplar) {
        (Some(s), Some(e)) => Ok((s, e)),
        _ => Err(Error::Configuration(format!(
            "scenario '{}' lacks the smooth or layer exemplar",
            scenario.name
        ))),
    }
}

/// Interpolation errors on a given mesh.
pub fn interpolation_row(scenario: &Scenario, mesh: &LayerMesh) -> Result<InterpolationRow> {
    let (smooth, layer) = exemplars(scenario)?;
    let eps = &scenario.coeffs.eps;
    let si = interpolate(smooth, mesh)?;
    let ei = interpolate(layer, mesh)?;
    let nodes = mesh.nodes();
    let rule = gauss(ERROR_QUAD_POINTS);

    let mut acc = [0.0f64; 5];
    let mut max_coarse = 0.0f64;
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let (s_slope, e_slope) = (si.slope_on(k), ei.slope_on(k));
        let fine = k < mesh.tau_index();
        for (x, w) in rule.mapped(a, b) {
            let ds = smooth.eval(x) - si.eval_on(k, x);
            let dds = smooth.deriv(x) - s_slope;
            acc[0] += w * ds * ds;
            acc[1] += w * dds * dds;
            let de = layer.eval(x) - ei.eval_on(k, x);
            if fine {
                let dde = layer.deriv(x) - e_slope;
                let ex = eps.eval(x);
                acc[3] += w * de * de / ex;
                acc[4] += w * ex * dde * dde;
            } else {
                acc[2] += w * de * de;
            }
        }
        if !fine {
            for j in 1..MAX_SAMPLES {
                let x = a + (b - a) * j as f64 / MAX_SAMPLES as f64;
                max_coarse = max_coarse.max((layer.eval(x) - ei.eval_on(k, x)).abs());
            }
        }
    }
    if let Some(bad) = acc.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "interpolation error", x: f64::NAN, value: *bad });
    }
    Ok(InterpolationRow {
        h: mesh.h(),
        node_count: mesh.len(),
        tau: mesh.tau(),
        smooth_l2: acc[0].sqrt(),
        smooth_h1: acc[1].sqrt(),
        layer_l2_coarse: acc[2].sqrt(),
        layer_max_coarse: max_coarse,
        layer_weighted_l2_fine: acc[3].sqrt(),
        layer_weighted_grad_fine: acc[4].sqrt(),
    })
}

/// Interpolation errors of the scenario's exemplars on the layer-adapted
/// meshes for each `h`.
pub fn interpolation_study(scenario: &Scenario, h_list: &[f64], delta: f64) -> Result<InterpolationTable> {
    exemplars(scenario)?;
    let e = layer_integral(&scenario.coeffs, LayerKind::E)?;
    let hs = sorted_unique(h_list, true);
    let rows = map_cells(hs, |h| {
        build_mesh(&scenario.coeffs, &e, h, delta).and_then(|m| interpolation_row(scenario, &m))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rates = rows.windows(2).map(|w| InterpolationRates::between(&w[0], &w[1])).collect();
    Ok(InterpolationTable { scenario: scenario.name.clone(), eps0: scenario.eps0, rows, rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{scenario, ScenarioKind};

    #[test]
    fn rate_definition() {
        assert!((observed_rate(4.0, 1.0, 0.5, 0.25) - 2.0).abs() < 1e-15);
        assert!((observed_rate(1.0, 1.0, 0.5, 0.25)).abs() < 1e-15);
    }

    #[test]
    fn empty_h_list_gives_empty_table() {
        let t = convergence_study(|e| scenario(ScenarioKind::Manufactured, e), &[], &[1e-4], 1.0).unwrap();
        assert!(t.rows.is_empty() && t.skipped.is_empty());
    }

    #[test]
    fn sorted_and_rated_per_eps0() {
        let t = convergence_study(
            |e| scenario(ScenarioKind::Manufactured, e),
            &[1.0 / 16.0, 1.0 / 8.0],
            &[1e-4, 1e-6],
            1.0,
        )
        .unwrap();
        let keys: Vec<(f64, f64)> = t.rows.iter().map(|r| (r.eps0, r.h)).collect();
        assert_eq!(keys, vec![(1e-6, 0.125), (1e-6, 0.0625), (1e-4, 0.125), (1e-4, 0.0625)]);
        assert!(t.rows[0].rate.is_none() && t.rows[2].rate.is_none());
        assert!(t.rows[1].rate.unwrap() > 0.7);
        assert_eq!(t.rates_for(1e-4).len(), 1);
    }

    #[test]
    fn degenerate_cells_are_skipped() {
        // eps = 0.1: e(1/2) = 5; h = 1/4 needs e(tau*) = 2.77, h = 0.01 needs 9.2
        let t = convergence_study(|e| scenario(ScenarioKind::EpsConst, e), &[0.01, 0.25], &[0.1], 1.0).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.skipped.len(), 1);
        assert_eq!(t.skipped[0].h, 0.01);
    }

    #[test]
    fn fine_mesh_reference_when_no_exact() {
        let t = convergence_study(|e| scenario(ScenarioKind::EpsLinear, e), &[1.0 / 8.0], &[1e-4], 1.0).unwrap();
        assert_eq!(t.rows[0].report.reference_kind, super::super::ReferenceKind::FineMesh);
    }

    #[test]
    fn smooth_interpolation_quarters() {
        let s = scenario(ScenarioKind::EpsConst, 1e-6).unwrap();
        let t = interpolation_study(&s, &[1.0 / 32.0, 1.0 / 64.0], 1.0).unwrap();
        let ratio = t.rows[0].smooth_l2 / t.rows[1].smooth_l2;
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }
}
