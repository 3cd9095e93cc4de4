mod common;

use common::Outcome;
use ndspline::bernstein::{de_casteljau, dim, BForm};
use ndspline::constraints::ConstraintSystem;
use ndspline::{Point, Triangulation};
use proptest::prelude::*;

fn check(o: Outcome) {
    assert!(o.pass, "{}: {}", o.name, o.detail);
}

#[test]
fn partition_of_unity() {
    check(common::partition_of_unity());
}

#[test]
fn derivatives_vs_finite_differences() {
    check(common::derivatives_vs_finite_differences());
}

#[test]
fn integrals_vs_quadrature() {
    check(common::integrals_vs_quadrature());
}

#[test]
fn smoothness_annihilates_polynomials() {
    check(common::smoothness_annihilates_polynomials());
}

#[test]
fn boundary_rows_are_exact() {
    check(common::boundary_rows_are_exact());
}

#[test]
fn mass_matrix_spd() {
    check(common::mass_matrix_spd());
}

#[test]
fn assembly_exactness() {
    check(common::assembly_exactness());
}

#[test]
fn direct_solve_reproduces_polynomials() {
    check(common::kkt_reproduces_polynomials(ndspline::SolverMethod::Direct));
}

#[test]
fn iterative_solve_reproduces_polynomials() {
    check(common::kkt_reproduces_polynomials(ndspline::SolverMethod::Iterative));
}

/// Smoothness rows are written in barycentric form, so they are unchanged by
/// translating and dilating the mesh.
#[test]
fn smoothness_rows_are_similarity_invariant() {
    let mut r = common::rng(12);
    let mesh = common::jittered_mesh(3, &mut r);
    let moved = Triangulation::new(
        mesh.vertices().iter().map(|v| Point::new(3.0 * v.x - 7.0, 3.0 * v.y + 2.5)).collect(),
        mesh.triangles().to_vec(),
    )
    .unwrap();
    for k in 2..=5 {
        let a = ConstraintSystem::build(&mesh, k, |_| 0.0).unwrap().h.to_dense();
        let b = ConstraintSystem::build(&moved, k, |_| 0.0).unwrap().h.to_dense();
        assert!((a - b).amax() < 1e-12, "k = {k}");
    }
}

fn bary() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(s, t)| {
        let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
        [1.0 - s - t, s, t]
    })
}

proptest! {
    #[test]
    fn de_casteljau_matches_explicit_sum(d in 0usize..9, b in bary(), seed in 0u64..1000) {
        let mut r = common::rng(seed);
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let u = common::random_form(tri, d, &mut r);
        let explicit = common::bernstein_sum(d, u.coeffs(), b);
        prop_assert!((de_casteljau(u.coeffs(), d, b) - explicit).abs() < 1e-13);
    }

    #[test]
    fn elevation_keeps_the_polynomial(d in 0usize..8, b in bary(), seed in 0u64..1000) {
        let mut r = common::rng(seed);
        let tri = common::random_triangle(&mut r);
        let u = common::random_form(tri, d, &mut r);
        let e = u.elevate();
        prop_assert_eq!(e.coeffs().len(), dim(d + 1));
        prop_assert!((e.eval(b) - u.eval(b)).abs() < 1e-13);
    }

    #[test]
    fn basis_forms_sum_to_one(d in 0usize..9, b in bary()) {
        let tri = [Point::new(-1.0, 0.5), Point::new(2.0, 0.0), Point::new(0.3, 3.0)];
        let s: f64 = (0..dim(d)).map(|a| BForm::basis(tri, d, a).eval(b)).sum();
        prop_assert!((s - 1.0).abs() < 1e-14);
    }
}
