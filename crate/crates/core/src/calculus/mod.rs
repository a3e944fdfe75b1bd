//! Quadrature, tabulated layer integrals, monotone inversion and grid
//! differentiation.

mod cumulative;
mod diff;
mod quadrature;
mod root;

pub use cumulative::{clustered_breakpoints, layer_integral, CumulativeIntegral, LayerKind, DEFAULT_BREAKPOINTS};
pub use diff::{differentiate_grid, DerivativeOrder, GridDerivative};
pub use quadrature::{gauss, integrate, integrate_with_breaks, QuadratureRule, DEFAULT_REFINEMENT_BUDGET};
pub use root::{invert_monotone, solve_increasing, DEFAULT_ROOT_TOL};
