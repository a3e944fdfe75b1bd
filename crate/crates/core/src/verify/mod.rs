//! Numerical checks of the analytic estimates behind the method: the
//! weighted exponential integral inequality, positivity of the barrier
//! operator, and derivative bounds of computed solutions.

mod barrier;
mod bounds;
mod lemma;
mod suite;

pub use barrier::{barrier_function, check_barrier_operator};
pub use bounds::{
    check_bound_uniformity, check_solution_bounds, check_transformed_bounds, classical_bound, lemma_bound,
    transformed_bound, BoundKind, BoundWeight, MIN_REFERENCE_H, UNIFORMITY_FACTOR,
};
pub use lemma::{check_integral_lemma, check_integral_lemma_with, LEMMA_TOL};
pub use suite::{run_suite, Suite, DEFAULT_SEED, LEMMA_EPS0, LEMMA_TUPLES};

use serde::Serialize;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheckReport {
    pub name: String,
    pub sample_count: usize,
    /// Smallest margin (right-hand side minus left-hand side, or the checked
    /// expression itself); negative values indicate a violation.
    pub worst_margin: f64,
    pub worst_point: f64,
    pub passed: bool,
    /// Check-specific summary value, e.g. the sup ratio of a bounded-ratio
    /// check or the cross-eps spread of a uniformity check.
    pub statistic: Option<f64>,
}

impl BoundCheckReport {
    /// `name worst_margin worst_point PASS|FAIL`
    pub fn line(&self) -> String {
        format!(
            "{} {:.16e} {:.16e} {}",
            self.name,
            self.worst_margin,
            self.worst_point,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}
