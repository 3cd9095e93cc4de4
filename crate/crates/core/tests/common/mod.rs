//! Property checks shared by the property tests and the acceptance target.
//!
//! Every check builds its own meshes and functions and compares the library
//! against oracles written here: a tensor Gauss–Legendre rule on the collapsed
//! square, the explicit Bernstein formula, and polynomials written as sums of
//! powers of linear forms, whose Bernstein coefficients are known in closed
//! form.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ndspline::assembly::{mass_matrix, CoefficientField, DiscreteOperator, Discretization};
use ndspline::bernstein::{self, dim, multi_indices, BForm, Direction};
use ndspline::constraints::ConstraintSystem;
use ndspline::solver::{assemble_kkt, solve, SolverMethod, SolverOptions};
use ndspline::{Point, Triangulation};

pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(name: &'static str, worst: f64, tol: f64) -> Self {
        Outcome {
            name,
            pass: worst <= tol,
            detail: format!("worst {worst:.3e}, tolerance {tol:.0e}"),
        }
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// oracles

/// Gauss–Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
pub fn gauss01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push(((1.0 - x) / 2.0, 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_T f` by a collapsed n×n Gauss rule (exact to degree 2n − 2).
pub fn integrate(tri: [Point; 3], n: usize, f: impl Fn(Point, [f64; 3]) -> f64) -> f64 {
    let g = gauss01(n);
    let area2 = ((tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) - (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y)).abs();
    let mut sum = 0.0;
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            let b = [1.0 - s, s * (1.0 - t), s * t];
            sum += ws * wt * s * f(at(tri, b), b);
        }
    }
    sum * area2
}

pub fn at(tri: [Point; 3], b: [f64; 3]) -> Point {
    Point::new(
        b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x,
        b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y,
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `d!/(i!j!k!) b0^i b1^j b2^k` straight from the definition.
pub fn bernstein_basis(m: [usize; 3], b: [f64; 3]) -> f64 {
    let d = m[0] + m[1] + m[2];
    factorial(d) / (factorial(m[0]) * factorial(m[1]) * factorial(m[2]))
        * b[0].powi(m[0] as i32)
        * b[1].powi(m[1] as i32)
        * b[2].powi(m[2] as i32)
}

pub fn bernstein_sum(d: usize, coeffs: &[f64], b: [f64; 3]) -> f64 {
    multi_indices(d).iter().zip(coeffs).map(|(&m, c)| c * bernstein_basis(m, b)).sum()
}

/// `Σ w_r (α_r x + β_r y + γ_r)^d`, which spans all polynomials of degree ≤ d.
#[derive(Clone)]
pub struct PowerSum {
    pub d: usize,
    pub terms: Vec<(f64, [f64; 3])>,
}

impl PowerSum {
    pub fn random(d: usize, r: &mut StdRng) -> Self {
        let terms = (0..dim(d) + 2)
            .map(|_| {
                let w = r.gen_range(-1.0..1.0);
                (w, [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)])
            })
            .collect();
        PowerSum { d, terms }
    }

    fn lin(l: [f64; 3], p: Point) -> f64 {
        l[0] * p.x + l[1] * p.y + l[2]
    }

    pub fn value(&self, p: Point) -> f64 {
        self.terms.iter().map(|&(w, l)| w * Self::lin(l, p).powi(self.d as i32)).sum()
    }

    /// `(u, ux, uy, uxx, uxy, uyy)`.
    pub fn jet(&self, p: Point) -> [f64; 6] {
        let d = self.d as f64;
        let mut j = [0.0; 6];
        for &(w, l) in &self.terms {
            let v = Self::lin(l, p);
            let p1 = if self.d >= 1 { d * v.powi(self.d as i32 - 1) } else { 0.0 };
            let p2 = if self.d >= 2 { d * (d - 1.0) * v.powi(self.d as i32 - 2) } else { 0.0 };
            j[0] += w * v.powi(self.d as i32);
            j[1] += w * p1 * l[0];
            j[2] += w * p1 * l[1];
            j[3] += w * p2 * l[0] * l[0];
            j[4] += w * p2 * l[0] * l[1];
            j[5] += w * p2 * l[1] * l[1];
        }
        j
    }

    /// Bernstein coefficients on `tri`: `ℓ^d = (Σ b_i ℓ(v_i))^d`, so the
    /// coefficient of `B_m` is `Π ℓ(v_i)^{m_i}`.
    pub fn bcoeffs(&self, tri: [Point; 3]) -> Vec<f64> {
        multi_indices(self.d)
            .iter()
            .map(|m| {
                self.terms
                    .iter()
                    .map(|&(w, l)| {
                        w * (0..3).map(|i| Self::lin(l, tri[i]).powi(m[i] as i32)).product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn spline_coeffs(&self, mesh: &Triangulation) -> Vec<f64> {
        (0..mesh.num_triangles()).flat_map(|t| self.bcoeffs(mesh.corners(t))).collect()
    }
}

/// The unit square cut into `n×n` cells with interior vertices moved at random.
pub fn jittered_mesh(n: usize, r: &mut StdRng) -> Triangulation {
    let base = Triangulation::rectangle(0.0, 0.0, 1.0, 1.0, n, n).unwrap();
    let amp = 0.2 / n as f64;
    let verts = base
        .vertices()
        .iter()
        .map(|v| {
            let interior = v.x > 1e-12 && v.x < 1.0 - 1e-12 && v.y > 1e-12 && v.y < 1.0 - 1e-12;
            if interior {
                Point::new(v.x + r.gen_range(-amp..amp), v.y + r.gen_range(-amp..amp))
            } else {
                *v
            }
        })
        .collect();
    Triangulation::new(verts, base.triangles().to_vec()).unwrap()
}

pub fn random_triangle(r: &mut StdRng) -> [Point; 3] {
    loop {
        let t = [0; 3].map(|_| Point::new(r.gen_range(-1.0..2.0), r.gen_range(-1.0..2.0)));
        let a2 = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y);
        if a2.abs() > 0.5 {
            return t;
        }
    }
}

pub fn random_bary(r: &mut StdRng) -> [f64; 3] {
    let (s, t): (f64, f64) = (r.gen(), r.gen());
    let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
    [1.0 - s - t, s, t]
}

pub fn random_form(tri: [Point; 3], d: usize, r: &mut StdRng) -> BForm {
    BForm::new(tri, d, (0..dim(d)).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// checks

pub fn partition_of_unity() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for d in 0..=10 {
        for _ in 0..50 {
            let b = random_bary(&mut r);
            let vals = bernstein::basis_values(d, b);
            worst = worst.max((vals.iter().sum::<f64>() - 1.0).abs());
            for (m, v) in multi_indices(d).into_iter().zip(&vals) {
                worst = worst.max((v - bernstein_basis(m, b)).abs());
            }
        }
    }
    Outcome::new("Bernstein partition of unity", worst, 1e-14)
}

/// Fourth-order central differences of `f` along `dir`.
fn central_difference(f: impl Fn(Point) -> f64, p: Point, dir: [f64; 2]) -> f64 {
    let h = 1e-3;
    let s = |k: f64| f(Point::new(p.x + k * h * dir[0], p.y + k * h * dir[1]));
    (-s(2.0) + 8.0 * s(1.0) - 8.0 * s(-1.0) + s(-2.0)) / (12.0 * h)
}

pub fn derivatives_vs_finite_differences() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for d in 1..=8 {
        for _ in 0..5 {
            let tri = random_triangle(&mut r);
            let u = random_form(tri, d, &mut r);
            for (dir, v) in [(Direction::X, [1.0, 0.0]), (Direction::Y, [0.0, 1.0])] {
                let du = u.derivative(dir).unwrap();
                let pts: Vec<_> = (0..20).map(|_| at(tri, random_bary(&mut r))).collect();
                let exact: Vec<f64> = pts.iter().map(|&p| du.eval_at(p)).collect();
                let scale = exact.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1e-300);
                for (&p, e) in pts.iter().zip(&exact) {
                    let fd = central_difference(|q| u.eval_at(q), p, v);
                    worst = worst.max((fd - e).abs() / scale);
                }
            }
        }
    }
    Outcome::new("derivatives vs finite differences", worst, 1e-6)
}

pub fn integrals_vs_quadrature() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let rel = |got: f64, oracle: f64, abs_oracle: f64| (got - oracle).abs() / abs_oracle.max(1e-300);
    for d in 0..=6 {
        for _ in 0..4 {
            let tri = random_triangle(&mut r);
            let u = random_form(tri, d, &mut r);
            let v = random_form(tri, d + 1, &mut r);
            let w = random_form(tri, (d + 2) % 5, &mut r);
            let n = 16;
            let bu = |b: [f64; 3]| bernstein_sum(u.degree(), u.coeffs(), b);
            let bv = |b: [f64; 3]| bernstein_sum(v.degree(), v.coeffs(), b);
            let bw = |b: [f64; 3]| bernstein_sum(w.degree(), w.coeffs(), b);
            worst = worst.max(rel(u.integral(), integrate(tri, n, |_, b| bu(b)), integrate(tri, n, |_, b| bu(b).abs())));
            worst = worst.max(rel(
                u.product_integral(&v).unwrap(),
                integrate(tri, n, |_, b| bu(b) * bv(b)),
                integrate(tri, n, |_, b| (bu(b) * bv(b)).abs()),
            ));
            worst = worst.max(rel(
                w.triple_product_integral(&u, &v).unwrap(),
                integrate(tri, n, |_, b| bw(b) * bu(b) * bv(b)),
                integrate(tri, n, |_, b| (bw(b) * bu(b) * bv(b)).abs()),
            ));
            let uv = u.product(&v).unwrap();
            for _ in 0..10 {
                let b = random_bary(&mut r);
                let e = bu(b) * bv(b);
                worst = worst.max((uv.eval(b) - e).abs() / e.abs().max(1.0));
            }
        }
    }
    Outcome::new("integral, product and triple product vs quadrature", worst, 1e-12)
}

pub fn smoothness_annihilates_polynomials() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for k in 2..=7 {
        let mesh = jittered_mesh(3, &mut r);
        let p = PowerSum::random(k, &mut r);
        let u = p.spline_coeffs(&mesh);
        let scale = u.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cons = ConstraintSystem::build(&mesh, k, |q| p.value(q)).unwrap();
        let hu = cons.h.mul_vec(&u);
        worst = worst.max(hu.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale);
    }
    Outcome::new("H u = 0 on global polynomials", worst, 1e-13)
}

pub fn boundary_rows_are_exact() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for k in 2..=7 {
        let mesh = jittered_mesh(3, &mut r);
        let p = PowerSum::random(k, &mut r);
        let u = p.spline_coeffs(&mesh);
        let scale = u.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cons = ConstraintSystem::build(&mesh, k, |q| p.value(q)).unwrap();
        let bu = cons.b.mul_vec(&u);
        for (x, g) in bu.iter().zip(&cons.g) {
            worst = worst.max((x - g).abs() / scale);
        }
    }
    Outcome::new("B u = g for polynomial boundary data", worst, 1e-12)
}

pub fn mass_matrix_spd() -> Outcome {
    let mut r = rng(6);
    let mesh = jittered_mesh(2, &mut r);
    let mut worst: f64 = 0.0;
    let mut spd = true;
    for k1 in 0..=6 {
        let m = mass_matrix(&mesh, k1);
        let idx = multi_indices(k1);
        for t in 0..mesh.num_triangles() {
            let tri = mesh.corners(t);
            let block: &DMatrix<f64> = m.block(t);
            let oracle = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
                integrate(tri, 12, |_, b| bernstein_basis(idx[i], b) * bernstein_basis(idx[j], b))
            });
            let scale = oracle.amax();
            worst = worst.max((block - &oracle).amax() / scale);
            worst = worst.max((block - block.transpose()).amax() / scale);
            spd &= block.clone().symmetric_eigenvalues().min() > 0.0 && block.clone().cholesky().is_some();
        }
    }
    let mut o = Outcome::new("mass matrix SPD and exact", worst, 1e-12);
    o.pass &= spd;
    if !spd {
        o.detail.push_str(", a block is not positive definite");
    }
    o
}

/// `⟨(K + Kc) u, q⟩` for polynomial coefficients of degree ≤ 2 against
/// quadrature of `(a : D²u + c u) q`.
pub fn assembly_exactness() -> Outcome {
    let mut r = rng(7);
    let mesh = jittered_mesh(2, &mut r);
    let a11 = |p: Point| 2.0 + p.x * p.x + 0.3 * p.y;
    let a12 = |p: Point| 0.2 * p.x * p.y - 0.1;
    let a22 = |p: Point| 1.5 + p.y - 0.5 * p.x * p.x;
    let c = |p: Point| -(1.0 + p.x * p.y);
    let field = CoefficientField::new(a11, a12, a22, c);
    let mut worst: f64 = 0.0;
    for (k, k1) in [(3, 1), (4, 4), (5, 3), (6, 6)] {
        let disc = Discretization::new(k, k1);
        let op = DiscreteOperator::assemble(&mesh, &field, &|_| 0.0, &disc).unwrap();
        let total = op.total();
        for _ in 0..5 {
            // a different polynomial on every triangle, so u is a genuine
            // discontinuous spline
            let pieces: Vec<PowerSum> = (0..mesh.num_triangles()).map(|_| PowerSum::random(k, &mut r)).collect();
            let u: Vec<f64> = pieces.iter().enumerate().flat_map(|(t, p)| p.bcoeffs(mesh.corners(t))).collect();
            let q: Vec<f64> = (0..total.nrows()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let ku = total.mul_vec(&u);
            let got: f64 = ku.iter().zip(&q).map(|(a, b)| a * b).sum();
            let (mut oracle, mut abs) = (0.0, 0.0);
            for (t, p) in pieces.iter().enumerate() {
                let tri = mesh.corners(t);
                let qt = &q[t * dim(k1)..(t + 1) * dim(k1)];
                let integrand = |x: Point, b: [f64; 3]| {
                    let j = p.jet(x);
                    let lu = a11(x) * j[3] + 2.0 * a12(x) * j[4] + a22(x) * j[5] + c(x) * j[0];
                    lu * bernstein_sum(k1, qt, b)
                };
                oracle += integrate(tri, 14, integrand);
                abs += integrate(tri, 14, |x, b| integrand(x, b).abs());
            }
            worst = worst.max((got - oracle).abs() / abs);
        }
    }
    Outcome::new("assembly exact for polynomial coefficients", worst, 1e-11)
}

/// Solves a problem whose solution is a polynomial of the trial degree. The
/// exact solution is feasible and has zero jumps and boundary mismatch, so the
/// discrete minimizer must reproduce it.
pub fn kkt_reproduces_polynomials(method: SolverMethod) -> Outcome {
    let mut r = rng(8);
    let field = CoefficientField::constant(2.0, 0.5, 1.0, -1.0);
    let mut worst: f64 = 0.0;
    let mut kkt_worst: f64 = 0.0;
    for (k, k1) in [(3, 1), (4, 2), (5, 5)] {
        let mesh = jittered_mesh(2, &mut r);
        let p = PowerSum::random(k, &mut r);
        let f = {
            let (p, field) = (p.clone(), field.clone());
            move |x: Point| field.apply(x, p.jet(x))
        };
        let cons = ConstraintSystem::build(&mesh, k, |x| p.value(x)).unwrap();
        let op = DiscreteOperator::assemble(&mesh, &field, &f, &Discretization::new(k, k1)).unwrap();
        let kkt = assemble_kkt(&cons, &op, mesh.metrics().h).unwrap();
        let opts = SolverOptions { method, ..SolverOptions::default() };
        let rep = solve(&kkt, &opts).unwrap();
        let exact = p.spline_coeffs(&mesh);
        let scale = exact.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (a, b) in rep.u.iter().zip(&exact) {
            worst = worst.max((a - b).abs() / scale);
        }
        kkt_worst = kkt_worst.max(rep.kkt_residual);
    }
    let name = match method {
        SolverMethod::Direct => "direct solve reproduces polynomials",
        SolverMethod::Iterative => "iterative solve reproduces polynomials",
    };
    let tol = match method {
        SolverMethod::Direct => 1e-9,
        SolverMethod::Iterative => 1e-7,
    };
    let mut o = Outcome::new(name, worst, tol);
    o.pass &= kkt_worst <= 1e-8;
    o.detail.push_str(&format!(", KKT residual {kkt_worst:.2e}"));
    o
}

pub fn all() -> Vec<Outcome> {
    vec![
        partition_of_unity(),
        derivatives_vs_finite_differences(),
        integrals_vs_quadrature(),
        smoothness_annihilates_polynomials(),
        boundary_rows_are_exact(),
        mass_matrix_spd(),
        assembly_exactness(),
        kkt_reproduces_polynomials(SolverMethod::Direct),
        kkt_reproduces_polynomials(SolverMethod::Iterative),
    ]
}
