//! Discrete PDE operator: stiffness `K`, zero-order part `Kc`, mass `M` and
//! load `M f`, all block diagonal with one block per triangle.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bernstein::{self, dim};
use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};
use crate::quadrature::TriangleRule;
use crate::sparse::BlockDiagonal;
use crate::spline::Spline;

/// Relative distance by which sample points are pulled toward the triangle
/// centroid, so coefficients with kinks along edges take their one-sided
/// values.
pub const INTERIOR_NUDGE: f64 = 1e-13;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Coefficients of `a11 uxx + 2 a12 uxy + a22 uyy + c u`.
#[derive(Clone)]
pub struct CoefficientField {
    pub a11: ScalarFn,
    pub a12: ScalarFn,
    pub a22: ScalarFn,
    pub c: ScalarFn,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientField { .. }")
    }
}

impl CoefficientField {
    pub fn new(
        a11: impl Fn(Point) -> f64 + Send + Sync + 'static,
        a12: impl Fn(Point) -> f64 + Send + Sync + 'static,
        a22: impl Fn(Point) -> f64 + Send + Sync + 'static,
        c: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientField {
            a11: Arc::new(a11),
            a12: Arc::new(a12),
            a22: Arc::new(a22),
            c: Arc::new(c),
        }
    }

    pub fn constant(a11: f64, a12: f64, a22: f64, c: f64) -> Self {
        Self::new(move |_| a11, move |_| a12, move |_| a22, move |_| c)
    }

    /// `[a11, a12, a22, c]` at `p`.
    pub fn eval(&self, p: Point) -> [f64; 4] {
        [(self.a11)(p), (self.a12)(p), (self.a22)(p), (self.c)(p)]
    }

    /// Applies the operator to a jet `(u, ux, uy, uxx, uxy, uyy)`.
    pub fn apply(&self, p: Point, jet: [f64; 6]) -> f64 {
        let [a11, a12, a22, c] = self.eval(p);
        a11 * jet[3] + 2.0 * a12 * jet[4] + a22 * jet[5] + c * jet[0]
    }

    /// False if `a` fails to be positive definite or `c > 0` at `p`.
    pub fn is_elliptic_at(&self, p: Point) -> bool {
        let [a11, a12, a22, c] = self.eval(p);
        a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0 && c <= 0.0
    }
}

/// How a function is turned into per-triangle polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approximation {
    /// Nodal interpolation at the domain points.
    Interpolate,
    /// Local L2 projection.
    Project,
}

impl Approximation {
    pub fn apply(self, f: &(dyn Fn(Point) -> f64 + Sync), mesh: &Triangulation, m: usize) -> Result<Spline> {
        match self {
            Approximation::Interpolate => interpolate_to_space(f, mesh, m),
            Approximation::Project => project_to_space(f, mesh, m),
        }
    }
}

impl std::str::FromStr for Approximation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolate" => Ok(Approximation::Interpolate),
            "project" => Ok(Approximation::Project),
            _ => Err(Error::InvalidConfig(format!("unknown approximation `{s}`"))),
        }
    }
}

/// Degrees and approximation choices of the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    /// Degree of the trial space.
    pub k: usize,
    /// Degree of the test (dual) space.
    pub k1: usize,
    /// Degree of the coefficient approximation.
    pub k2: usize,
    pub coefficients: Approximation,
    /// Approximation of `f` in the test space.
    pub load: Approximation,
}

impl Discretization {
    pub fn new(k: usize, k1: usize) -> Self {
        Discretization {
            k,
            k1,
            k2: 2,
            coefficients: Approximation::Interpolate,
            load: Approximation::Project,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::DegreeTooLow(self.k));
        }
        if self.k1 > self.k {
            return Err(Error::InvalidConfig(format!("dual degree {} exceeds degree {}", self.k1, self.k)));
        }
        Ok(())
    }
}

/// Per-triangle polynomial approximations of the coefficients.
#[derive(Debug, Clone)]
pub struct CoefficientSplines {
    pub a11: Spline,
    pub a12: Spline,
    pub a22: Spline,
    pub c: Spline,
}

impl CoefficientSplines {
    pub fn degree(&self) -> usize {
        self.a11.degree()
    }
}

/// Local L2 projection of `f` onto polynomials of degree `m` on every
/// triangle.
pub fn project_to_space(f: &(dyn Fn(Point) -> f64 + Sync), mesh: &Triangulation, m: usize) -> Result<Spline> {
    let gram = bernstein::gram_normalized(m, m)
        .cholesky()
        .ok_or(Error::SingularLocalMass)?;
    // coefficients and loads may have cusps along element edges, where Gauss
    // rules converge only algebraically; a generous rule keeps the
    // quadrature error below the projection error
    let rule = TriangleRule::with_exactness(m + 40);
    let basis: Vec<Vec<f64>> = rule.points.iter().map(|&b| bernstein::basis_values(m, b)).collect();
    let pieces: Vec<Vec<f64>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.corners(t);
            let mut mom = DVector::zeros(dim(m));
            for ((p, w), bv) in rule.map(tri).zip(&rule.weights).zip(&basis) {
                let fw = w * f(p);
                for (a, v) in mom.iter_mut().zip(bv) {
                    *a += fw * v;
                }
            }
            // both sides carry the area; it cancels
            gram.solve(&mom).iter().copied().collect()
        })
        .collect();
    Spline::new(mesh, m, pieces.concat())
}

/// Nodal interpolation of `f` at the degree-`m` domain points of every
/// triangle, sampling slightly inside the triangle.
pub fn interpolate_to_space(f: &(dyn Fn(Point) -> f64 + Sync), mesh: &Triangulation, m: usize) -> Result<Spline> {
    let lu = bernstein::collocation_matrix(m).lu();
    let pieces: Vec<Vec<f64>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let centre = mesh.centroid(t);
            let vals: Vec<f64> = bernstein::domain_points(mesh.corners(t), m)
                .into_iter()
                .map(|p| f(p.toward(centre, INTERIOR_NUDGE)))
                .collect();
            lu.solve(&DVector::from_vec(vals))
                .expect("collocation matrix is invertible")
                .iter()
                .copied()
                .collect()
        })
        .collect();
    Spline::new(mesh, m, pieces.concat())
}

pub fn interpolate_coefficients(field: &CoefficientField, mesh: &Triangulation, k2: usize) -> Result<CoefficientSplines> {
    approximate_coefficients(field, mesh, k2, Approximation::Interpolate)
}

pub fn approximate_coefficients(
    field: &CoefficientField,
    mesh: &Triangulation,
    k2: usize,
    mode: Approximation,
) -> Result<CoefficientSplines> {
    let run = |f: &ScalarFn| mode.apply(f.as_ref(), mesh, k2);
    Ok(CoefficientSplines {
        a11: run(&field.a11)?,
        a12: run(&field.a12)?,
        a22: run(&field.a22)?,
        c: run(&field.c)?,
    })
}

/// `A Σ_g w_g T[g]^T`, the matrix of `q ↦ ∫ w · B_β · q` for a degree-`k2`
/// weight `w`.
fn weighted(tensor: &[DMatrix<f64>], w: &[f64], area: f64) -> DMatrix<f64> {
    let (r, c) = tensor[0].shape();
    let mut out = DMatrix::zeros(c, r);
    for (t, &wg) in tensor.iter().zip(w) {
        if wg != 0.0 {
            out += t.transpose() * (wg * area);
        }
    }
    out
}

/// Principal part: block `(β, α) = Σ ∫ S_ij ∂²_ij B^k_α B^{k1}_β`.
pub fn stiffness_matrix(mesh: &Triangulation, k: usize, k1: usize, s: &CoefficientSplines) -> Result<BlockDiagonal> {
    if k < 2 {
        return Err(Error::DegreeTooLow(k));
    }
    let k2 = s.degree();
    let tensor = bernstein::triple_normalized(k2, k - 2, k1);
    let blocks: Result<Vec<DMatrix<f64>>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.corners(t);
            let area = mesh.area(t);
            let [dxx, dxy, dyy] = bernstein::hessian_matrices(tri, k)?;
            let a12x2: Vec<f64> = s.a12.piece(t).iter().map(|v| 2.0 * v).collect();
            Ok(weighted(&tensor, s.a11.piece(t), area) * dxx
                + weighted(&tensor, &a12x2, area) * dxy
                + weighted(&tensor, s.a22.piece(t), area) * dyy)
        })
        .collect();
    BlockDiagonal::new(dim(k1), dim(k), blocks?)
}

/// Zero-order part: block `(β, α) = ∫ S_c B^k_α B^{k1}_β`.
pub fn zero_order_matrix(mesh: &Triangulation, k: usize, k1: usize, c: &Spline) -> Result<BlockDiagonal> {
    let tensor = bernstein::triple_normalized(c.degree(), k, k1);
    let blocks = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| weighted(&tensor, c.piece(t), mesh.area(t)))
        .collect();
    BlockDiagonal::new(dim(k1), dim(k), blocks)
}

pub fn mass_matrix(mesh: &Triangulation, k1: usize) -> BlockDiagonal {
    let g = bernstein::gram_normalized(k1, k1);
    let blocks = (0..mesh.num_triangles()).map(|t| &g * mesh.area(t)).collect();
    BlockDiagonal::new(dim(k1), dim(k1), blocks).expect("uniform block shapes")
}

/// `M f` with `f` the local L2 projection onto degree `k1`.
pub fn load_vector(mesh: &Triangulation, k1: usize, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
    load_vector_with(mesh, k1, f, Approximation::Project)
}

pub fn load_vector_with(
    mesh: &Triangulation,
    k1: usize,
    f: &(dyn Fn(Point) -> f64 + Sync),
    mode: Approximation,
) -> Result<Vec<f64>> {
    let fh = mode.apply(f, mesh, k1)?;
    Ok(mass_matrix(mesh, k1).mul_vec(fh.coeffs()))
}

/// Smallest Cordès margin `(tr a)² / |a|² − 1` over the sample points.
pub fn cordes_diagnostic(field: &CoefficientField, samples: &[Point]) -> f64 {
    samples
        .iter()
        .map(|&p| {
            let [a11, a12, a22, _] = field.eval(p);
            let norm2 = a11 * a11 + 2.0 * a12 * a12 + a22 * a22;
            if norm2 == 0.0 {
                return 0.0;
            }
            (a11 + a22).powi(2) / norm2 - 1.0
        })
        .fold(f64::INFINITY, f64::min)
}

/// The discretized equation `(K + Kc) u = M f`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub k: BlockDiagonal,
    pub kc: BlockDiagonal,
    pub m: BlockDiagonal,
    pub f_vec: Vec<f64>,
}

impl DiscreteOperator {
    pub fn assemble(
        mesh: &Triangulation,
        field: &CoefficientField,
        f: &(dyn Fn(Point) -> f64 + Sync),
        disc: &Discretization,
    ) -> Result<Self> {
        disc.validate()?;
        let Discretization { k, k1, k2, .. } = *disc;
        let s = approximate_coefficients(field, mesh, k2, disc.coefficients)?;
        Ok(DiscreteOperator {
            k: stiffness_matrix(mesh, k, k1, &s)?,
            kc: zero_order_matrix(mesh, k, k1, &s.c)?,
            m: mass_matrix(mesh, k1),
            f_vec: load_vector_with(mesh, k1, f, disc.load)?,
        })
    }

    /// `K + Kc`.
    pub fn total(&self) -> BlockDiagonal {
        self.k.add(&self.kc).expect("K and Kc share their shape")
    }
}
