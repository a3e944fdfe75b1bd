//! Interpolants, energy-norm errors, convergence tables and interpolation
//! studies.

mod norms;
mod report;
mod study;

pub use norms::{energy_norm, energy_norm_exact, energy_norm_parts_exact, interpolate};
pub use report::{
    compare_fe, error_against, error_report, ErrorReport, ReferenceKind, ERROR_QUAD_POINTS,
    MIN_REFERENCE_REFINEMENT,
};
pub use study::{
    convergence_study, interpolation_row, interpolation_study, measure_error, observed_rate, ConvergenceRow,
    ConvergenceTable, InterpolationRates, InterpolationRow, InterpolationTable, SkippedCell, REFERENCE_REFINEMENT,
};
