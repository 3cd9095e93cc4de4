//! Discontinuous piecewise polynomials over a triangulation.

use crate::bernstein::{self, BForm, Direction};
use crate::error::{Error, Result};
use crate::mesh::{Point, PointLocator, Triangulation};

/// Per-triangle B-form coefficients concatenated in triangle order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Spline {
    pub fn new(mesh: &Triangulation, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let want = bernstein::dim(degree) * mesh.num_triangles();
        if coeffs.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "spline of degree {degree} on {} triangles needs {want} coefficients, got {}",
                mesh.num_triangles(),
                coeffs.len()
            )));
        }
        Ok(Spline { degree, coeffs })
    }

    pub fn zeros(mesh: &Triangulation, degree: usize) -> Self {
        Spline {
            degree,
            coeffs: vec![0.0; bernstein::dim(degree) * mesh.num_triangles()],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn piece(&self, t: usize) -> &[f64] {
        let m = bernstein::dim(self.degree);
        &self.coeffs[t * m..(t + 1) * m]
    }

    pub fn bform(&self, mesh: &Triangulation, t: usize) -> BForm {
        BForm::new(mesh.corners(t), self.degree, self.piece(t).to_vec())
            .expect("piece length matches degree")
    }

    /// Piecewise derivative; one degree lower.
    pub fn derivative(&self, mesh: &Triangulation, dir: Direction) -> Result<Spline> {
        if self.degree == 0 {
            return Err(Error::DegreeTooLow(0));
        }
        let mut coeffs = Vec::with_capacity(bernstein::dim(self.degree - 1) * mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            coeffs.extend(self.bform(mesh, t).derivative(dir)?.into_coeffs());
        }
        Ok(Spline {
            degree: self.degree - 1,
            coeffs,
        })
    }

    /// Value of piece `t` at barycentric coordinates `bary`.
    pub fn eval_piece(&self, t: usize, bary: [f64; 3]) -> f64 {
        bernstein::de_casteljau(self.piece(t), self.degree, bary)
    }

    pub fn eval(&self, locator: &PointLocator<'_>, p: Point) -> Result<f64> {
        let (t, b) = locator.locate(p)?;
        Ok(self.eval_piece(t, b))
    }
}

/// A spline together with its first and second derivative splines.
#[derive(Debug, Clone)]
pub struct SplineJet {
    pub value: Spline,
    pub dx: Spline,
    pub dy: Spline,
    pub dxx: Spline,
    pub dxy: Spline,
    pub dyy: Spline,
}

impl SplineJet {
    pub fn new(mesh: &Triangulation, s: &Spline) -> Result<Self> {
        if s.degree() < 2 {
            return Err(Error::DegreeTooLow(s.degree()));
        }
        let dx = s.derivative(mesh, Direction::X)?;
        let dy = s.derivative(mesh, Direction::Y)?;
        let dxx = dx.derivative(mesh, Direction::X)?;
        let dxy = dx.derivative(mesh, Direction::Y)?;
        let dyy = dy.derivative(mesh, Direction::Y)?;
        Ok(SplineJet {
            value: s.clone(),
            dx,
            dy,
            dxx,
            dxy,
            dyy,
        })
    }

    /// (u, ux, uy, uxx, uxy, uyy) of piece `t` at `bary`.
    pub fn eval_piece(&self, t: usize, bary: [f64; 3]) -> [f64; 6] {
        [
            self.value.eval_piece(t, bary),
            self.dx.eval_piece(t, bary),
            self.dy.eval_piece(t, bary),
            self.dxx.eval_piece(t, bary),
            self.dxy.eval_piece(t, bary),
            self.dyy.eval_piece(t, bary),
        ]
    }
}
