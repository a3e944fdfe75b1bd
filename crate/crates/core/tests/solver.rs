use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use layerfem::analysis::{compare_fe, error_against, interpolate};
use layerfem::calculus::integrate;
use layerfem::fem::{
    bilinear_form, galerkin_solve, galerkin_solve_with, solve_tridiagonal, FemSolution, TridiagonalSystem,
    DEFAULT_QUAD_POINTS,
};
use layerfem::mesh::build_layer_mesh;
use layerfem::problem::{builtin_scenarios, scenario, ScalarFunction, ScenarioKind};

fn hat(mesh: &layerfem::mesh::LayerMesh, i: usize) -> FemSolution {
    let mut c = vec![0.0; mesh.len()];
    c[i] = 1.0;
    FemSolution::new(mesh.clone(), c).unwrap()
}

#[test]
fn galerkin_orthogonality() {
    let s = scenario(ScenarioKind::Manufactured, 1e-3).unwrap();
    let u = s.exact.clone().unwrap();
    let mesh = build_layer_mesh(&s.coeffs, 1.0 / 16.0, 1.0).unwrap();
    let uh = galerkin_solve(&s, &mesh).unwrap();
    let x = mesh.nodes();
    for i in 1..mesh.len() - 1 {
        // a(u, phi_i) with phi_i in closed form on its two elements.
        let mut a_u = 0.0;
        let mut scale = 0.0;
        for (lo, hi, slope) in [(x[i - 1], x[i], 1.0), (x[i], x[i + 1], -1.0)] {
            let w = hi - lo;
            let phi = move |t: f64| if slope > 0.0 { (t - lo) / w } else { (hi - t) / w };
            let integrand = |t: f64| {
                let (eps, b, c) = (s.coeffs.eps.eval(t), s.coeffs.b.eval(t), s.coeffs.c.eval(t));
                eps * u.deriv(t) * slope / w - b * u.deriv(t) * phi(t) + c * u.eval(t) * phi(t)
            };
            a_u += integrate(integrand, lo, hi, 1e-13).unwrap();
            scale += integrate(|t| s.coeffs.f.eval(t).abs() * phi(t), lo, hi, 1e-10).unwrap();
        }
        let a_uh = bilinear_form(&uh, &hat(&mesh, i), &s).unwrap();
        assert!((a_u - a_uh).abs() <= 1e-8 * scale.max(1e-300), "node {i}: {a_u} vs {a_uh} (scale {scale})");
    }
}

#[test]
fn doubling_quadrature_points_changes_little() {
    for s in builtin_scenarios(1e-4).unwrap() {
        let mesh = build_layer_mesh(&s.coeffs, 1.0 / 32.0, 1.0).unwrap();
        let a = galerkin_solve_with(&s.coeffs, &mesh, DEFAULT_QUAD_POINTS).unwrap();
        let b = galerkin_solve_with(&s.coeffs, &mesh, 2 * DEFAULT_QUAD_POINTS).unwrap();
        let max = a.coefficients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((p - q).abs() <= 1e-8 * max, "{}", s.name);
        }
    }
}

#[test]
fn error_halves_with_h() {
    let s = scenario(ScenarioKind::Manufactured, 1e-5).unwrap();
    let u = s.exact.as_ref().unwrap();
    let err = |h: f64| {
        let mesh = build_layer_mesh(&s.coeffs, h, 1.0).unwrap();
        error_against(&galerkin_solve(&s, &mesh).unwrap(), u, &s.coeffs).unwrap().energy_error
    };
    let ratio = err(1.0 / 64.0) / err(1.0 / 128.0);
    assert!((1.7..=2.3).contains(&ratio), "{ratio}");
}

#[test]
fn galerkin_error_is_near_best_approximation() {
    let h = 1.0 / 32.0;
    for s in builtin_scenarios(1e-4).unwrap() {
        let mesh = build_layer_mesh(&s.coeffs, h, 1.0).unwrap();
        let uh = galerkin_solve(&s, &mesh).unwrap();
        let (fem, interp) = match &s.exact {
            Some(u) => (
                error_against(&uh, u, &s.coeffs).unwrap().energy_error,
                error_against(&interpolate(u, &mesh).unwrap(), u, &s.coeffs).unwrap().energy_error,
            ),
            None => {
                let fine = galerkin_solve(&s, &build_layer_mesh(&s.coeffs, h / 16.0, 1.0).unwrap()).unwrap();
                let (f1, f2) = (fine.clone(), fine.clone());
                let as_fn = ScalarFunction::new(move |x| f1.eval(x), move |x| f2.slope_on(f2.mesh.locate(x)));
                (
                    compare_fe(&uh, &fine, &s.coeffs).unwrap().energy_error,
                    compare_fe(&interpolate(&as_fn, &mesh).unwrap(), &fine, &s.coeffs).unwrap().energy_error,
                )
            }
        };
        assert!(fem <= 10.0 * interp, "{}: {fem} vs {interp}", s.name);
    }
}

fn to_dense(sys: &TridiagonalSystem) -> DMatrix<f64> {
    let n = sys.len();
    DMatrix::from_fn(n, n, |i, j| sys.get(i, j))
}

proptest! {
    #[test]
    fn tridiagonal_matches_dense_lu(
        bands in (1usize..60).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(prop_oneof![-4.0f64..-2.5, 2.5f64..4.0], n),
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(-5.0f64..5.0, n),
        )),
    ) {
        let (sub, diag, sup, rhs) = bands;
        let sys = TridiagonalSystem { sub, diag, sup, rhs };
        let x = solve_tridiagonal(&sys).unwrap();
        let oracle = to_dense(&sys).lu().solve(&DVector::from_vec(sys.rhs.clone())).unwrap();
        let scale = oracle.amax().max(1e-300);
        for (a, b) in x.iter().zip(oracle.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn pivoting_handles_weak_diagonals(
        bands in (2usize..40).prop_flat_map(|n| (
            prop::collection::vec(0.5f64..2.0, n - 1),
            prop::collection::vec(-0.1f64..0.1, n),
            prop::collection::vec(0.5f64..2.0, n - 1),
            prop::collection::vec(-5.0f64..5.0, n),
        )),
    ) {
        let (sub, diag, sup, rhs) = bands;
        let sys = TridiagonalSystem { sub, diag, sup, rhs };
        let lu = to_dense(&sys).lu();
        prop_assume!(lu.determinant().abs() > 1e-6);
        let oracle = lu.solve(&DVector::from_vec(sys.rhs.clone())).unwrap();
        let x = solve_tridiagonal(&sys).unwrap();
        let r = DVector::from_vec(sys.apply(&x)) - DVector::from_vec(sys.rhs.clone());
        prop_assert!(r.amax() <= 1e-9 * (1.0 + oracle.amax()));
    }
}
