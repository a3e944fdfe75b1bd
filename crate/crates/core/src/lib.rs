//! Layer-adapted finite elements for the one-dimensional convection-diffusion
//! problem
//!
//! ```text
//! -(eps u')' - b u' + c u = f  in (0, 1),   u(0) = u(1) = 0,
//! ```
//!
//! with a small, variable diffusion `eps(x)` producing a boundary layer at
//! `x = 0`.
//!
//! The pieces, bottom-up:
//!
//! * [`problem`]: coefficients, assumption checks, the scenario catalogue.
//! * [`calculus`]: adaptive quadrature, the layer integral `e(x)` and
//!   relatives, monotone inversion, grid derivatives.
//! * [`mesh`]: the graded/equidistant layer-adapted mesh.
//! * [`fem`]: Galerkin assembly with linear elements and the tridiagonal solve.
//! * [`analysis`]: interpolants, energy-norm errors, convergence studies.
//! * [`verify`]: numerical checks of the a priori bounds behind the method.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calculus;
mod error;
pub mod fem;
pub mod mesh;
pub mod problem;
pub mod verify;

pub use error::{Error, Result};

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order matches input order.
#[cfg(feature = "parallel")]
pub(crate) fn map_cells<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_cells<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
