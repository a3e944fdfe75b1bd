use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly, `2n - 1`.
    pub order: usize,
}

impl QuadratureRule {
    /// The `n`-point Gauss–Legendre rule, computed by Newton iteration on
    /// the Legendre polynomial `P_n`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights, order: 2 * n - 1 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the rule on `[a, b]`.
    #[inline]
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += w * f(mid + half * p);
        }
        acc * half
    }

    /// Physical points and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(p, w)| (mid + half * p, w * half))
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule for `n` in `1..=16`.
pub fn gauss(n: usize) -> &'static QuadratureRule {
    static RULES: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=16).map(QuadratureRule::gauss_legendre).collect());
    &rules[n.clamp(1, 16) - 1]
}

/// Maximum bisection depth of a panel.
pub const DEFAULT_REFINEMENT_BUDGET: u32 = 24;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let rule = gauss(5);
    let mid = 0.5 * (a + b);
    let coarse = rule.apply(f, a, b);
    let fine = rule.apply(f, a, mid) + rule.apply(f, mid, b);
    if !fine.is_finite() || !coarse.is_finite() {
        // Locate the offending sample for the error message.
        for (x, _) in rule.mapped(a, b).chain(rule.mapped(a, mid)).chain(rule.mapped(mid, b)) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "integrand", x, value: v });
            }
        }
        return Err(Error::NonFinite { what: "integrand", x: mid, value: f64::NAN });
    }
    Ok(Panel { a, b, value: fine, error: (fine - coarse).abs(), depth })
}

/// `int_a^b f` by globally adaptive composite 5-point Gauss–Legendre.
///
/// The panel with the largest disagreement between its one-panel and
/// two-panel estimates is bisected until the summed disagreement falls
/// below `rel_tol` times the integral. Panels may be bisected at most
/// [`DEFAULT_REFINEMENT_BUDGET`] times.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], rel_tol)
}

/// Like [`integrate`], starting from the panels delimited by `breaks`
/// (sorted, at least two entries).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    if breaks.len() < 2 {
        return Err(Error::Size { required: 2, got: breaks.len() });
    }
    let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
    if !(a <= b) {
        return Err(Error::Parameter(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(panel(&f, w[0], w[1], 0)?);
        }
    }
    const MAX_PANELS: usize = 2_000_000;
    let (mut total, mut error, mut magnitude) = (0.0, 0.0, 0.0);
    for p in heap.iter() {
        total += p.value;
        error += p.error;
        magnitude += p.value.abs();
    }
    loop {
        let tol = rel_tol * total.abs();
        if error <= tol || error <= 1e-15 * magnitude || magnitude == 0.0 {
            // The running totals drift; confirm with an exact re-sum.
            (total, error, magnitude) = heap.iter().fold((0.0, 0.0, 0.0), |(t, e, m), p| {
                (t + p.value, e + p.error, m + p.value.abs())
            });
            if error <= rel_tol * total.abs() || error <= 1e-15 * magnitude || magnitude == 0.0 {
                return Ok(total);
            }
        }
        let worst = heap.pop().expect("non-empty panel set");
        if worst.depth >= DEFAULT_REFINEMENT_BUDGET || heap.len() > MAX_PANELS {
            return Err(Error::Convergence { a, b, budget: DEFAULT_REFINEMENT_BUDGET });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = panel(&f, worst.a, mid, worst.depth + 1)?;
        let right = panel(&f, mid, worst.b, worst.depth + 1)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.value.abs() + right.value.abs() - worst.value.abs();
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=16 {
            let rule = QuadratureRule::gauss_legendre(n);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n = {n}: {sum}");
            assert!(rule.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn monomials_are_exact_up_to_the_order() {
        for n in 1..=12 {
            let rule = QuadratureRule::gauss_legendre(n);
            for k in 0..=rule.order {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.apply(|x| x.powi(k as i32), -1.0, 1.0);
                assert!((got - exact).abs() < 1e-12, "n = {n}, k = {k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn five_point_nodes() {
        let rule = gauss(5);
        let outer = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        assert!((rule.points[4] - outer).abs() < 1e-15);
        assert!((rule.weights[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_constant() {
        assert!((integrate(|_| 1.0, 0.0, 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_reciprocal_diffusion() {
        let got = integrate(|t| 1.0 / (0.01 * (1.0 + t)), 0.0, 1.0, 1e-12).unwrap();
        let exact = 100.0 * 2f64.ln();
        assert!((got - exact).abs() < 1e-10 * exact);
        assert!((got - 69.31471805599453).abs() < 1e-9);
    }

    #[test]
    fn integrates_layer() {
        let got = integrate(|t: f64| (-100.0 * t).exp(), 0.0, 0.5, 1e-12).unwrap();
        let exact = -(-50.0f64).exp_m1() / 100.0;
        assert!((got - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 0.3, 0.3, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(|x| if x > 0.5 { f64::INFINITY } else { 1.0 }, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn singular_integrand_exhausts_the_budget() {
        let err = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-15).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }), "{err:?}");
    }
}
