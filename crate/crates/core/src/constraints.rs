//! Smoothness (C0/C1 across interior edges) and Dirichlet boundary rows.

use crate::bernstein::{self, barycentric_coords, basis_values, dim};
use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};
use crate::sparse::CsrMatrix;

/// Smoothness matrix `H = [H0; H1]`, boundary matrix `B` and boundary data `g`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub h: CsrMatrix,
    pub b: CsrMatrix,
    pub g: Vec<f64>,
}

impl ConstraintSystem {
    pub fn build(mesh: &Triangulation, k: usize, g: impl Fn(Point) -> f64) -> Result<Self> {
        let h0 = smoothness_matrix(mesh, k, 0)?;
        let h1 = smoothness_matrix(mesh, k, 1)?;
        let (b, g) = boundary_matrix(mesh, k, g);
        Ok(ConstraintSystem {
            h: h0.vstack(&h1)?,
            b,
            g,
        })
    }

    pub fn ncols(&self) -> usize {
        self.h.ncols()
    }
}

/// Local index (0, 1 or 2) of vertex `v` in `tri`.
fn local_of(tri: [usize; 3], v: usize) -> usize {
    tri.iter().position(|&w| w == v).expect("vertex belongs to triangle")
}

/// Coefficient index in a triangle given the exponents of its local
/// vertices as (opposite, a, b) triples.
fn coeff_at(local: [usize; 3], pows: [usize; 3]) -> usize {
    let mut m = [0usize; 3];
    for (l, p) in local.iter().zip(pows) {
        m[*l] = p;
    }
    bernstein::index(m[0], m[1], m[2])
}

/// Order-`r` smoothness conditions across all interior edges.
pub fn smoothness_matrix(mesh: &Triangulation, k: usize, r: usize) -> Result<CsrMatrix> {
    if r > 1 {
        return Err(Error::UnsupportedOrder(r));
    }
    let m = dim(k);
    let ncols = m * mesh.num_triangles();
    if r == 1 && k == 0 {
        return Ok(CsrMatrix::zeros(0, ncols));
    }
    let mut trip = Vec::new();
    let mut row = 0;
    for e in mesh.interior_edges() {
        let edge = &mesh.edges()[e];
        let (t1, t2) = (edge.left, edge.right.expect("interior edge"));
        let [va, vb] = edge.vertices;
        let tri1 = mesh.triangles()[t1];
        let tri2 = mesh.triangles()[t2];
        let (a1, b1) = (local_of(tri1, va), local_of(tri1, vb));
        let (a2, b2) = (local_of(tri2, va), local_of(tri2, vb));
        let o1 = 3 - a1 - b1;
        let o2 = 3 - a2 - b2;
        let l1 = [o1, a1, b1];
        let l2 = [o2, a2, b2];
        let (off1, off2) = (t1 * m, t2 * m);
        if r == 0 {
            for j in 0..=k {
                let p = [0, j, k - j];
                trip.push((row, off2 + coeff_at(l2, p), 1.0));
                trip.push((row, off1 + coeff_at(l1, p), -1.0));
                row += 1;
            }
        } else {
            let w = mesh.vertices()[tri2[o2]];
            let beta = barycentric_coords(mesh.corners(t1), w)?;
            let (bo, ba, bb) = (beta[o1], beta[a1], beta[b1]);
            for j in 0..k {
                trip.push((row, off2 + coeff_at(l2, [1, j, k - 1 - j]), 1.0));
                trip.push((row, off1 + coeff_at(l1, [1, j, k - 1 - j]), -bo));
                trip.push((row, off1 + coeff_at(l1, [0, j + 1, k - 1 - j]), -ba));
                trip.push((row, off1 + coeff_at(l1, [0, j, k - j]), -bb));
                row += 1;
            }
        }
    }
    Ok(CsrMatrix::from_triplets(row, ncols, &trip))
}

/// Interpolation of `g` at `k + 1` equally spaced points (endpoints
/// included) on every boundary edge.
pub fn boundary_matrix(mesh: &Triangulation, k: usize, g: impl Fn(Point) -> f64) -> (CsrMatrix, Vec<f64>) {
    let m = dim(k);
    let ncols = m * mesh.num_triangles();
    let mut trip = Vec::new();
    let mut gv = Vec::new();
    let n = k.max(1);
    for &e in mesh.boundary_edges() {
        let edge = &mesh.edges()[e];
        let t = edge.left;
        let tri = mesh.triangles()[t];
        let [va, vb] = edge.vertices;
        let (la, lb) = (local_of(tri, va), local_of(tri, vb));
        let (pa, pb) = (mesh.vertices()[va], mesh.vertices()[vb]);
        let npts = if k == 0 { 1 } else { k + 1 };
        for s in 0..npts {
            let tb = s as f64 / n as f64;
            let mut bary = [0.0; 3];
            bary[la] = 1.0 - tb;
            bary[lb] = tb;
            let p = Point::new(pa.x + tb * (pb.x - pa.x), pa.y + tb * (pb.y - pa.y));
            let row = gv.len();
            for (c, v) in basis_values(k, bary).into_iter().enumerate() {
                if v != 0.0 {
                    trip.push((row, t * m + c, v));
                }
            }
            gv.push(g(p));
        }
    }
    (CsrMatrix::from_triplets(gv.len(), ncols, &trip), gv)
}
