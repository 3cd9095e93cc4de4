//! Gauss–Legendre rules and collapsed (conical product) rules on triangles.

use crate::mesh::{signed_area2, Point};

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// A quadrature rule on a triangle in barycentric coordinates; weights sum
/// to one and are scaled by the area at integration time.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed Gauss rule exact for polynomials of total degree `degree`.
    pub fn with_exactness(degree: usize) -> Self {
        // the Duffy Jacobian adds one degree in the collapsed direction
        let n = (degree + 3) / 2;
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (s, ws) in x.iter().zip(&w) {
            for (t, wt) in x.iter().zip(&w) {
                let b1 = *s;
                let b2 = (1.0 - s) * t;
                points.push([b1, b2, 1.0 - b1 - b2]);
                weights.push(2.0 * ws * wt * (1.0 - s));
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cartesian quadrature points on `tri`.
    pub fn map(&self, tri: [Point; 3]) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().map(move |b| {
            Point::new(
                b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x,
                b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y,
            )
        })
    }

    pub fn integrate(&self, tri: [Point; 3], f: impl Fn(Point) -> f64) -> f64 {
        let area = 0.5 * signed_area2(tri[0], tri[1], tri[2]).abs();
        area * self
            .map(tri)
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum::<f64>()
    }
}
