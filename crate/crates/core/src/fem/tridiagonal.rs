use crate::error::{Error, Result};

/// `A x = rhs` with `A` tridiagonal: `sub[i]` is `A[i+1][i]`, `sup[i]` is
/// `A[i][i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

const TINY_PIVOT: f64 = 1e-300;

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Self { sub: vec![0.0; off], diag: vec![0.0; n], sup: vec![0.0; off], rhs: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds `value` to entry `(row, col)`; `|row - col| <= 1`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        if row == col {
            self.diag[row] += value;
        } else if col == row + 1 {
            self.sup[row] += value;
        } else if row == col + 1 {
            self.sub[col] += value;
        } else {
            panic!("entry ({row}, {col}) outside the band");
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diag[row]
        } else if col == row + 1 {
            self.sup[row]
        } else if row == col + 1 {
            self.sub[col]
        } else {
            0.0
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Row-sum norm of `A`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < self.len() {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        let off = n.saturating_sub(1);
        if self.sub.len() != off || self.sup.len() != off || self.rhs.len() != n {
            return Err(Error::Shape(format!(
                "tridiagonal bands of lengths {}/{}/{} with rhs {}",
                self.sub.len(),
                n,
                self.sup.len(),
                self.rhs.len()
            )));
        }
        let all = self.sub.iter().chain(&self.diag).chain(&self.sup).chain(&self.rhs);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite entry in tridiagonal system".into()));
        }
        Ok(())
    }

    fn residual_ok(&self, x: &[f64]) -> bool {
        let ax = self.apply(x);
        let res = ax.iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let bn = self.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        res.is_finite() && res <= 1e-10 * (self.norm_inf() * xn + bn)
    }
}

// Thomas algorithm; None on a tiny pivot.
fn thomas(sys: &TridiagonalSystem) -> Option<Vec<f64>> {
    let n = sys.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = sys.diag[0];
    if pivot.abs() < TINY_PIVOT {
        return None;
    }
    if n > 1 {
        c[0] = sys.sup[0] / pivot;
    }
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i - 1] * c[i - 1];
        if pivot.abs() < TINY_PIVOT {
            return None;
        }
        if i + 1 < n {
            c[i] = sys.sup[i] / pivot;
        }
        d[i] = (sys.rhs[i] - sys.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

// Gaussian elimination with partial pivoting restricted to the band; row
// swaps fill in one extra superdiagonal.
fn pivoted(sys: &TridiagonalSystem) -> Option<Vec<f64>> {
    let n = sys.len();
    let mut dl = sys.sub.clone();
    let mut d = sys.diag.clone();
    let mut du = sys.sup.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = sys.rhs.clone();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < TINY_PIVOT {
                return None;
            }
            let m = dl[i] / d[i];
            d[i + 1] -= m * du[i];
            b[i + 1] -= m * b[i];
            dl[i] = 0.0;
        } else {
            // swap rows i and i + 1
            let m = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - m * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
            dl[i] = 0.0;
        }
    }
    if d[n - 1].abs() < TINY_PIVOT {
        return None;
    }
    let mut x = b;
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Some(x)
}

/// Solves by the Thomas sweep, falling back to a partially pivoted band
/// elimination when a pivot is tiny or the residual check fails.
pub fn solve_tridiagonal(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    system.validate()?;
    if system.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(x) = thomas(system) {
        if system.residual_ok(&x) {
            return Ok(x);
        }
    }
    match pivoted(system) {
        Some(x) if system.residual_ok(&x) => Ok(x),
        _ => Err(Error::Singular(format!("tridiagonal system of size {} is singular", system.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let mut sys = TridiagonalSystem::zeros(5);
        sys.diag.fill(1.0);
        sys.rhs[3] = 1.0;
        assert_eq!(solve_tridiagonal(&sys).unwrap(), vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn three_by_three_by_hand() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3]  ->  x = (1, 1, 1)
        let sys = TridiagonalSystem {
            sub: vec![1.0, 1.0],
            diag: vec![2.0, 3.0, 2.0],
            sup: vec![1.0, 1.0],
            rhs: vec![3.0, 5.0, 3.0],
        };
        let x = solve_tridiagonal(&sys).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_leading_pivot_uses_fallback() {
        // [0 1 0; 1 0 1; 0 1 1] x = [2, 4, 5]  ->  x = (1, 2, 3)
        let sys = TridiagonalSystem {
            sub: vec![1.0, 1.0],
            diag: vec![0.0, 0.0, 1.0],
            sup: vec![1.0, 1.0],
            rhs: vec![2.0, 4.0, 5.0],
        };
        let x = solve_tridiagonal(&sys).unwrap();
        for (v, e) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let sys = TridiagonalSystem {
            sub: vec![1.0],
            diag: vec![1.0, 1.0],
            sup: vec![1.0],
            rhs: vec![1.0, 2.0],
        };
        assert!(matches!(solve_tridiagonal(&sys), Err(Error::Singular(_))));
    }

    #[test]
    fn malformed_bands() {
        let sys = TridiagonalSystem { sub: vec![1.0], diag: vec![1.0; 3], sup: vec![1.0; 2], rhs: vec![0.0; 3] };
        assert!(matches!(solve_tridiagonal(&sys), Err(Error::Shape(_))));
    }

    #[test]
    fn single_unknown() {
        let sys = TridiagonalSystem { sub: vec![], diag: vec![4.0], sup: vec![], rhs: vec![2.0] };
        assert_eq!(solve_tridiagonal(&sys).unwrap(), vec![0.5]);
    }
}
