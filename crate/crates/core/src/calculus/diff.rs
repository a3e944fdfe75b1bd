use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Finite-difference derivative estimates at every node.
///
/// Entries outside `interior` come from one-sided stencils and are less
/// accurate.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDerivative {
    pub values: Vec<f64>,
    pub interior: Range<usize>,
}

/// Three-point derivative estimates on a nonuniform grid.
pub fn differentiate_grid(values: &[f64], nodes: &[f64], order: DerivativeOrder) -> Result<GridDerivative> {
    let n = nodes.len();
    if n < 5 {
        return Err(Error::Size { required: 5, got: n });
    }
    if values.len() != n {
        return Err(Error::Shape(format!("{} values for {} nodes", values.len(), n)));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("nodes must be strictly increasing".into()));
    }

    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = stencil(order, &nodes[i - 1..=i + 1], &values[i - 1..=i + 1], 1);
    }
    out[0] = stencil(order, &nodes[0..3], &values[0..3], 0);
    out[n - 1] = stencil(order, &nodes[n - 3..], &values[n - 3..], 2);
    Ok(GridDerivative { values: out, interior: 1..n - 1 })
}

// Derivative of the quadratic through three points, evaluated at x[at].
fn stencil(order: DerivativeOrder, x: &[f64], f: &[f64], at: usize) -> f64 {
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    let s = h1 + h2;
    match order {
        DerivativeOrder::Second => 2.0 * (f[0] / (h1 * s) - f[1] / (h1 * h2) + f[2] / (h2 * s)),
        DerivativeOrder::First => match at {
            0 => -(2.0 * h1 + h2) / (h1 * s) * f[0] + s / (h1 * h2) * f[1] - h1 / (h2 * s) * f[2],
            1 => -h2 / (h1 * s) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * s) * f[2],
            _ => h2 / (h1 * s) * f[0] - s / (h1 * h2) * f[1] + (h2 + s) / (h2 * s) * f[2],
        },
    }
}
