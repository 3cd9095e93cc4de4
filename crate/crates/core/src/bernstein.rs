//! Bernstein–Bézier polynomials on a single triangle.
//!
//! Coefficients of a degree-`d` form are stored in lexicographic order of the
//! multi-index `(i, j, k)`, `i + j + k = d`, with `i` descending and then `j`
//! descending:
//!
//! ```text
//! (d,0,0), (d-1,1,0), (d-1,0,1), (d-2,2,0), (d-2,1,1), (d-2,0,2), ...
//! ```
//!
//! With `s = j + k` the position of `(i, j, k)` is `s (s + 1) / 2 + k`, which
//! does not depend on `d`. Every matrix assembled by this crate uses this
//! order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{signed_area2, Point};

/// Number of coefficients of a degree-`d` form.
pub const fn dim(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Position of `(i, j, k)` in the coefficient vector.
#[inline]
pub const fn index(_i: usize, j: usize, k: usize) -> usize {
    let s = j + k;
    s * (s + 1) / 2 + k
}

#[inline]
const fn index_sk(s: usize, k: usize) -> usize {
    s * (s + 1) / 2 + k
}

/// All multi-indices of degree `d` in storage order.
pub fn multi_indices(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(dim(d));
    for s in 0..=d {
        for k in 0..=s {
            out.push([d - s, s - k, k]);
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as f64
}

/// `d! / (i! j! k!)` with `d = i + j + k`.
pub fn multinomial(m: [usize; 3]) -> f64 {
    let d = m[0] + m[1] + m[2];
    binomial(d, m[0]) * binomial(m[1] + m[2], m[1])
}

/// Barycentric coordinates of `p` with respect to `tri`.
pub fn barycentric_coords(tri: [Point; 3], p: Point) -> Result<[f64; 3]> {
    let [a, b, c] = tri;
    let area2 = signed_area2(a, b, c);
    if area2 == 0.0 || !area2.is_finite() {
        return Err(Error::DegenerateTriangle(0));
    }
    let b1 = signed_area2(p, b, c) / area2;
    let b2 = signed_area2(a, p, c) / area2;
    Ok([b1, b2, 1.0 - b1 - b2])
}

/// Gradients of the three barycentric coordinate functions.
pub fn barycentric_gradients(tri: [Point; 3]) -> [[f64; 2]; 3] {
    let [a, b, c] = tri;
    let area2 = signed_area2(a, b, c);
    [
        [(b.y - c.y) / area2, (c.x - b.x) / area2],
        [(c.y - a.y) / area2, (a.x - c.x) / area2],
        [(a.y - b.y) / area2, (b.x - a.x) / area2],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

impl Direction {
    fn vector(self) -> [f64; 2] {
        match self {
            Direction::X => [1.0, 0.0],
            Direction::Y => [0.0, 1.0],
        }
    }
}

/// Directional coordinates of a vector `v`: `a_i = grad(b_i) . v`.
pub fn directional_coords(tri: [Point; 3], v: [f64; 2]) -> [f64; 3] {
    let g = barycentric_gradients(tri);
    [
        g[0][0] * v[0] + g[0][1] * v[1],
        g[1][0] * v[0] + g[1][1] * v[1],
        g[2][0] * v[0] + g[2][1] * v[1],
    ]
}

/// A polynomial of fixed degree on one triangle, in B-form.
#[derive(Debug, Clone, PartialEq)]
pub struct BForm {
    degree: usize,
    triangle: [Point; 3],
    coeffs: Vec<f64>,
}

impl BForm {
    pub fn new(triangle: [Point; 3], degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dim(degree) {
            return Err(Error::DimensionMismatch(format!(
                "degree {degree} needs {} coefficients, got {}",
                dim(degree),
                coeffs.len()
            )));
        }
        Ok(BForm {
            degree,
            triangle,
            coeffs,
        })
    }

    pub fn constant(triangle: [Point; 3], degree: usize, value: f64) -> Self {
        BForm {
            degree,
            triangle,
            coeffs: vec![value; dim(degree)],
        }
    }

    /// The basis polynomial `B^d_alpha` for storage position `alpha`.
    pub fn basis(triangle: [Point; 3], degree: usize, alpha: usize) -> Self {
        let mut coeffs = vec![0.0; dim(degree)];
        coeffs[alpha] = 1.0;
        BForm {
            degree,
            triangle,
            coeffs,
        }
    }

    /// The B-form of a linear function `c0 + cx x + cy y`, elevated to `degree`.
    pub fn linear(triangle: [Point; 3], degree: usize, c0: f64, cx: f64, cy: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::DegreeTooLow(0));
        }
        let v: Vec<f64> = triangle.iter().map(|p| c0 + cx * p.x + cy * p.y).collect();
        let mut b = BForm {
            degree: 1,
            triangle,
            coeffs: v,
        };
        while b.degree < degree {
            b = b.elevate();
        }
        Ok(b)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn triangle(&self) -> [Point; 3] {
        self.triangle
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.triangle;
        0.5 * signed_area2(a, b, c).abs()
    }

    /// de Casteljau evaluation at barycentric coordinates.
    pub fn eval(&self, bary: [f64; 3]) -> f64 {
        de_casteljau(&self.coeffs, self.degree, bary)
    }

    /// Evaluation at a Cartesian point.
    pub fn eval_at(&self, p: Point) -> f64 {
        let b = barycentric_coords(self.triangle, p).expect("nondegenerate triangle");
        self.eval(b)
    }

    pub fn derivative(&self, dir: Direction) -> Result<BForm> {
        self.directional_derivative(dir.vector())
    }

    /// Exact B-form (degree d - 1) of the derivative along `v`.
    pub fn directional_derivative(&self, v: [f64; 2]) -> Result<BForm> {
        let d = self.degree;
        if d == 0 {
            return Err(Error::DegreeTooLow(0));
        }
        let a = directional_coords(self.triangle, v);
        let scale = d as f64;
        let mut out = Vec::with_capacity(dim(d - 1));
        for s in 0..d {
            for k in 0..=s {
                let c1 = self.coeffs[index_sk(s, k)];
                let c2 = self.coeffs[index_sk(s + 1, k)];
                let c3 = self.coeffs[index_sk(s + 1, k + 1)];
                out.push(scale * (a[0] * c1 + a[1] * c2 + a[2] * c3));
            }
        }
        Ok(BForm {
            degree: d - 1,
            triangle: self.triangle,
            coeffs: out,
        })
    }

    /// Same polynomial written with degree d + 1.
    pub fn elevate(&self) -> BForm {
        let d = self.degree;
        let n = (d + 1) as f64;
        let mut out = Vec::with_capacity(dim(d + 1));
        for [i, j, k] in multi_indices(d + 1) {
            let s = j + k;
            let mut v = 0.0;
            if i > 0 {
                v += i as f64 * self.coeffs[index_sk(s, k)];
            }
            if j > 0 {
                v += j as f64 * self.coeffs[index_sk(s - 1, k)];
            }
            if k > 0 {
                v += k as f64 * self.coeffs[index_sk(s - 1, k - 1)];
            }
            out.push(v / n);
        }
        BForm {
            degree: d + 1,
            triangle: self.triangle,
            coeffs: out,
        }
    }

    /// Exact integral over the triangle.
    pub fn integral(&self) -> f64 {
        self.area() * self.coeffs.iter().sum::<f64>() / dim(self.degree) as f64
    }

    /// Exact product, a form of degree `d1 + d2`.
    pub fn product(&self, other: &BForm) -> Result<BForm> {
        if self.triangle != other.triangle {
            return Err(Error::TriangleMismatch);
        }
        let (d1, d2) = (self.degree, other.degree);
        let mut out = vec![0.0; dim(d1 + d2)];
        let ia = multi_indices(d1);
        let ib = multi_indices(d2);
        let wa: Vec<f64> = ia.iter().map(|&m| multinomial(m)).collect();
        let wb: Vec<f64> = ib.iter().map(|&m| multinomial(m)).collect();
        for (p, a) in ia.iter().enumerate() {
            let ca = self.coeffs[p] * wa[p];
            if ca == 0.0 {
                continue;
            }
            for (q, b) in ib.iter().enumerate() {
                let g = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                out[index(g[0], g[1], g[2])] += ca * other.coeffs[q] * wb[q] / multinomial(g);
            }
        }
        Ok(BForm {
            degree: d1 + d2,
            triangle: self.triangle,
            coeffs: out,
        })
    }

    pub fn product_integral(&self, other: &BForm) -> Result<f64> {
        Ok(self.product(other)?.integral())
    }

    pub fn triple_product_integral(&self, b1: &BForm, b2: &BForm) -> Result<f64> {
        Ok(self.product(b1)?.product(b2)?.integral())
    }
}

/// de Casteljau evaluation of raw coefficients.
pub fn de_casteljau(coeffs: &[f64], degree: usize, bary: [f64; 3]) -> f64 {
    let mut w: [f64; 64] = [0.0; 64];
    let n = coeffs.len();
    if n <= w.len() {
        w[..n].copy_from_slice(coeffs);
        de_casteljau_in_place(&mut w[..n], degree, bary)
    } else {
        let mut v = coeffs.to_vec();
        de_casteljau_in_place(&mut v, degree, bary)
    }
}

fn de_casteljau_in_place(w: &mut [f64], degree: usize, [b1, b2, b3]: [f64; 3]) -> f64 {
    for r in (1..=degree).rev() {
        // reduce degree r to r - 1; writes never overtake pending reads
        for s in 0..r {
            for k in 0..=s {
                let lo = index_sk(s, k);
                let hi = index_sk(s + 1, k);
                w[lo] = b1 * w[lo] + b2 * w[hi] + b3 * w[hi + 1];
            }
        }
    }
    w[0]
}

/// Values of all degree-`d` basis polynomials at `bary`.
pub fn basis_values(d: usize, bary: [f64; 3]) -> Vec<f64> {
    let pow = |b: f64, e: usize| b.powi(e as i32);
    multi_indices(d)
        .into_iter()
        .map(|m| multinomial(m) * pow(bary[0], m[0]) * pow(bary[1], m[1]) * pow(bary[2], m[2]))
        .collect()
}

/// Matrix taking degree-`d` coefficients to the coefficients of the
/// derivative along `v` (shape `dim(d-1) x dim(d)`).
pub fn derivative_matrix(tri: [Point; 3], d: usize, v: [f64; 2]) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::DegreeTooLow(0));
    }
    let a = directional_coords(tri, v);
    let scale = d as f64;
    let mut m = DMatrix::zeros(dim(d - 1), dim(d));
    for s in 0..d {
        for k in 0..=s {
            let row = index_sk(s, k);
            m[(row, index_sk(s, k))] += scale * a[0];
            m[(row, index_sk(s + 1, k))] += scale * a[1];
            m[(row, index_sk(s + 1, k + 1))] += scale * a[2];
        }
    }
    Ok(m)
}

/// Second-derivative matrices (xx, xy, yy), each `dim(d-2) x dim(d)`.
pub fn hessian_matrices(tri: [Point; 3], d: usize) -> Result<[DMatrix<f64>; 3]> {
    if d < 2 {
        return Err(Error::DegreeTooLow(d));
    }
    let dx = derivative_matrix(tri, d, [1.0, 0.0])?;
    let dy = derivative_matrix(tri, d, [0.0, 1.0])?;
    let dx1 = derivative_matrix(tri, d - 1, [1.0, 0.0])?;
    let dy1 = derivative_matrix(tri, d - 1, [0.0, 1.0])?;
    Ok([&dx1 * &dx, &dy1 * &dx, &dy1 * &dy])
}

/// `∫ B^{d1}_a B^{d2}_b / area`, shape `dim(d1) x dim(d2)`.
pub fn gram_normalized(d1: usize, d2: usize) -> DMatrix<f64> {
    let ia = multi_indices(d1);
    let ib = multi_indices(d2);
    let norm = dim(d1 + d2) as f64;
    DMatrix::from_fn(ia.len(), ib.len(), |p, q| {
        let (a, b) = (ia[p], ib[q]);
        let g = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        multinomial(a) * multinomial(b) / multinomial(g) / norm
    })
}

/// `∫ B^{d0}_g B^{d1}_a B^{d2}_b / area`, laid out as one `dim(d1) x dim(d2)`
/// matrix per `g`.
pub fn triple_normalized(d0: usize, d1: usize, d2: usize) -> Vec<DMatrix<f64>> {
    let i0 = multi_indices(d0);
    let ia = multi_indices(d1);
    let ib = multi_indices(d2);
    let norm = dim(d0 + d1 + d2) as f64;
    i0.iter()
        .map(|&g| {
            DMatrix::from_fn(ia.len(), ib.len(), |p, q| {
                let (a, b) = (ia[p], ib[q]);
                let t = [g[0] + a[0] + b[0], g[1] + a[1] + b[1], g[2] + a[2] + b[2]];
                multinomial(g) * multinomial(a) * multinomial(b) / multinomial(t) / norm
            })
        })
        .collect()
}

/// Domain points `(i v1 + j v2 + k v3) / d` in storage order. Degree 0 uses
/// the centroid.
pub fn domain_points(tri: [Point; 3], d: usize) -> Vec<Point> {
    if d == 0 {
        let [a, b, c] = tri;
        return vec![Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)];
    }
    multi_indices(d)
        .into_iter()
        .map(|[i, j, k]| {
            let (bi, bj, bk) = (i as f64 / d as f64, j as f64 / d as f64, k as f64 / d as f64);
            Point::new(
                bi * tri[0].x + bj * tri[1].x + bk * tri[2].x,
                bi * tri[0].y + bj * tri[1].y + bk * tri[2].y,
            )
        })
        .collect()
}

/// Collocation matrix `[B_a(xi_b)]` at the domain points; the same for every
/// triangle.
pub fn collocation_matrix(d: usize) -> DMatrix<f64> {
    let n = dim(d);
    let mut m = DMatrix::zeros(n, n);
    let idx = multi_indices(d);
    for (row, &[i, j, k]) in idx.iter().enumerate() {
        let bary = if d == 0 {
            [1.0 / 3.0; 3]
        } else {
            [i as f64 / d as f64, j as f64 / d as f64, k as f64 / d as f64]
        };
        for (col, v) in basis_values(d, bary).into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    m
}
