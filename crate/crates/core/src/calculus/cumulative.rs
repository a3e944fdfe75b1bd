use std::sync::Arc;

use serde::Serialize;

use super::quadrature::{gauss, integrate};
use crate::error::{Error, Result};
use crate::problem::CoefficientSet;

/// Default number of stored breakpoints.
pub const DEFAULT_BREAKPOINTS: usize = 4096;

// Clustering strength of the breakpoint distribution near x = 0.
const CLUSTERING: f64 = 8.0;

// Per-panel tolerance; the panels are short so this is met almost always
// with a single refinement.
const PANEL_TOL: f64 = 1e-14;

/// Which layer integral to tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    /// `e(x) = int_0^x 1/eps`
    E,
    /// `int_0^x 1/sqrt(eps_upper * eps)`
    ETilde,
    /// Coordinate map `T(x) = int_0^x sqrt(eps_lower / eps)`
    T,
}

type Integrand = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A tabulated antiderivative on `[0, 1]` with `G(0) = 0`.
///
/// Point evaluation adds a short local quadrature to the nearest stored
/// partial sum to the left.
#[derive(Clone)]
pub struct CumulativeIntegral {
    breakpoints: Vec<f64>,
    partial_sums: Vec<f64>,
    integrand: Integrand,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("breakpoints", &self.breakpoints.len())
            .field("total", &self.total())
            .finish()
    }
}

/// Breakpoints `(exp(c k/n) - 1) / (exp(c) - 1)`, dense near zero.
pub fn clustered_breakpoints(count: usize) -> Vec<f64> {
    let n = count.max(2) - 1;
    let denom = CLUSTERING.exp_m1();
    let mut pts: Vec<f64> = (0..=n)
        .map(|k| (CLUSTERING * k as f64 / n as f64).exp_m1() / denom)
        .collect();
    pts[0] = 0.0;
    pts[n] = 1.0;
    pts
}

impl CumulativeIntegral {
    pub fn new<F>(integrand: F, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if breakpoints.len() < 2 {
            return Err(Error::Size { required: 2, got: breakpoints.len() });
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Parameter("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("breakpoints must be strictly increasing".into()));
        }
        let integrand: Integrand = Arc::new(integrand);
        let mut partial_sums = Vec::with_capacity(breakpoints.len());
        partial_sums.push(0.0);
        let mut acc = 0.0;
        for w in breakpoints.windows(2) {
            acc += integrate(|t| integrand(t), w[0], w[1], PANEL_TOL)?;
            partial_sums.push(acc);
        }
        Ok(Self { breakpoints, partial_sums, integrand })
    }

    pub fn with_default_breakpoints<F>(integrand: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(integrand, clustered_breakpoints(DEFAULT_BREAKPOINTS))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.integrand)(x)
    }

    /// `G(1)`.
    pub fn total(&self) -> f64 {
        *self.partial_sums.last().unwrap()
    }

    /// `G(x)` for `x` in `[0, 1]`; arguments outside are clamped.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let k = self.breakpoints.partition_point(|&b| b <= x).saturating_sub(1);
        let left = self.breakpoints[k];
        if x == left {
            return self.partial_sums[k];
        }
        // A 10-point rule is exact to round-off on these short panels for
        // smooth integrands; fall back to adaptive quadrature otherwise.
        let coarse = gauss(8).apply(|t| (self.integrand)(t), left, x);
        let fine = gauss(10).apply(|t| (self.integrand)(t), left, x);
        let local = if (fine - coarse).abs() <= 1e-14 * fine.abs() {
            fine
        } else {
            integrate(|t| (self.integrand)(t), left, x, PANEL_TOL).unwrap_or(fine)
        };
        self.partial_sums[k] + local
    }

    /// `G(x) - G(t)` for `t <= x`, accurate even when both values are large.
    pub fn difference(&self, t: f64, x: f64) -> f64 {
        let kt = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
        let kx = self.breakpoints.partition_point(|&b| b <= x).saturating_sub(1);
        if kt == kx {
            integrate(|s| (self.integrand)(s), t, x, PANEL_TOL)
                .unwrap_or_else(|_| self.eval(x) - self.eval(t))
        } else {
            self.eval(x) - self.eval(t)
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.partial_sums.windows(2).all(|w| w[1] > w[0])
    }
}

/// Tabulates `e`, `e~` or `T` for the given coefficients.
pub fn layer_integral(coeffs: &CoefficientSet, kind: LayerKind) -> Result<CumulativeIntegral> {
    let eps = coeffs.eps.clone();
    let upper = coeffs.eps_upper;
    let lower = coeffs.eps_lower;
    // Fail early with a located error rather than inside the tabulation.
    for x in clustered_breakpoints(257) {
        let v = eps.eval(x);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonFinite { what: "diffusion", x, value: v });
        }
    }
    match kind {
        LayerKind::E => CumulativeIntegral::with_default_breakpoints(move |t| 1.0 / eps.eval(t)),
        LayerKind::ETilde => {
            CumulativeIntegral::with_default_breakpoints(move |t| 1.0 / (upper * eps.eval(t)).sqrt())
        }
        LayerKind::T => {
            CumulativeIntegral::with_default_breakpoints(move |t| (lower / eps.eval(t)).sqrt())
        }
    }
}
