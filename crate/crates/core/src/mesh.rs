//! Triangulations: storage, edge topology, uniform refinement, metrics and
//! point location.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Barycentric coordinates at or above this value count as "inside".
pub const LOCATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Moves `self` a relative distance `eta` toward `target`.
    pub fn toward(self, target: Point, eta: f64) -> Point {
        Point::new(
            self.x + eta * (target.x - self.x),
            self.y + eta * (target.y - self.y),
        )
    }
}

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, stored as (min, max) vertex index.
    pub vertices: [usize; 2],
    /// First triangle that discovered the edge.
    pub left: usize,
    /// Second adjacent triangle, `None` on the boundary.
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// A straight-edged, counterclockwise-oriented triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    boundary_edges: Vec<usize>,
    /// `triangle_edges[t][i]` is the edge opposite local vertex `i`.
    triangle_edges: Vec<[usize; 3]>,
    /// Parent triangle of each triangle (empty at level 0).
    parents: Vec<usize>,
    level: usize,
}

impl Triangulation {
    /// Builds a triangulation, reorienting triangles counterclockwise and
    /// deriving edge adjacency.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut triangles = triangles;
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(Error::IndexOutOfRange { index: v, count: nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle(t));
            }
            let a2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let scale = vertices[tri[0]]
                .dist(vertices[tri[1]])
                .max(vertices[tri[1]].dist(vertices[tri[2]]))
                .max(vertices[tri[2]].dist(vertices[tri[0]]));
            if a2.abs() <= 1e-14 * scale * scale || !a2.is_finite() {
                return Err(Error::DegenerateTriangle(t));
            }
            if a2 < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (i, slot) in te.iter_mut().enumerate() {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(Error::NonManifoldEdge(key.0, key.1));
                        }
                        edge.right = Some(t);
                        *slot = e;
                    }
                    None => {
                        let e = edges.len();
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            left: t,
                            right: None,
                        });
                        edge_map.insert(key, e);
                        *slot = e;
                    }
                }
            }
            triangle_edges.push(te);
        }
        let boundary_edges = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| i)
            .collect();

        Ok(Triangulation {
            vertices,
            triangles,
            edges,
            boundary_edges,
            triangle_edges,
            parents: Vec::new(),
            level: 0,
        })
    }

    /// Builds from 1-based index triples, as in the plain-text mesh format.
    pub fn from_one_based(vertices: Vec<Point>, triangles: &[[usize; 3]]) -> Result<Self> {
        let nv = vertices.len();
        let mut zero = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let mut z = [0usize; 3];
            for (slot, &v) in z.iter_mut().zip(tri.iter()) {
                if v == 0 || v > nv {
                    return Err(Error::IndexOutOfRange { index: v, count: nv });
                }
                *slot = v - 1;
            }
            zero.push(z);
        }
        Triangulation::new(vertices, zero)
    }

    /// Axis-aligned rectangle split into `nx * ny` cells, each cut along the
    /// diagonal from its lower-left to its upper-right corner.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig("rectangle needs at least one cell".into()));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * i as f64 / nx as f64;
                let y = y0 + (y1 - y0) * j as f64 / ny as f64;
                vertices.push(Point::new(x, y));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Triangulation::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_boundary())
            .map(|(i, _)| i)
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * signed_area2(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Bounding box as (min, max) corners.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Splits every triangle into four through its edge midpoints. Child
    /// `4t + i` belongs to parent `t`; the last child is the middle one.
    pub fn uniform_refine(&self) -> Triangulation {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| {
            self.vertices[e.vertices[0]].midpoint(self.vertices[e.vertices[1]])
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut parents = Vec::with_capacity(4 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let te = self.triangle_edges[t];
            // midpoint opposite local vertex i
            let m = [nv + te[0], nv + te[1], nv + te[2]];
            let [v0, v1, v2] = *tri;
            triangles.push([v0, m[2], m[1]]);
            triangles.push([m[2], v1, m[0]]);
            triangles.push([m[1], m[0], v2]);
            triangles.push([m[2], m[0], m[1]]);
            parents.extend_from_slice(&[t; 4]);
        }
        let mut refined = Triangulation::new(vertices, triangles)
            .expect("refinement of a valid triangulation is valid");
        refined.parents = parents;
        refined.level = self.level + 1;
        refined
    }

    /// Applies `uniform_refine` `times` times.
    pub fn refined(&self, times: usize) -> Triangulation {
        let mut t = self.clone();
        for _ in 0..times {
            t = t.uniform_refine();
        }
        t
    }

    pub fn metrics(&self) -> MeshMetrics {
        let n = self.num_triangles();
        let mut h_t = Vec::with_capacity(n);
        let mut rho_t = Vec::with_capacity(n);
        for t in 0..n {
            let [a, b, c] = self.corners(t);
            let (la, lb, lc) = (b.dist(c), c.dist(a), a.dist(b));
            h_t.push(la.max(lb).max(lc));
            rho_t.push(self.area(t) / (0.5 * (la + lb + lc)));
        }
        let h = h_t.iter().cloned().fold(0.0, f64::max);
        let shape_parameter = h_t
            .iter()
            .zip(&rho_t)
            .map(|(h, r)| h / r)
            .fold(0.0, f64::max);
        MeshMetrics {
            h,
            h_t,
            rho_t,
            shape_parameter,
        }
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.corners(t);
        crate::bernstein::barycentric_coords([a, b, c], p)
            .expect("triangulation holds no degenerate triangles")
    }

    /// Linear scan point location; the lowest containing triangle index wins.
    pub fn locate_point(&self, p: Point) -> Result<(usize, [f64; 3])> {
        for t in 0..self.num_triangles() {
            let b = self.barycentric(t, p);
            if b.iter().all(|&v| v >= -LOCATE_TOL) {
                return Ok((t, b));
            }
        }
        Err(Error::PointOutsideDomain(p.x, p.y))
    }

    /// Reads the plain-text format: "V T", V lines "x y", T lines "i j k"
    /// with 1-based indices.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::MeshParse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let counts = parse_fields::<usize>(header, 2, ln)?;
        let (nv, nt) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or(Error::MeshParse {
                line: ln,
                msg: "unexpected end of file in vertex block".into(),
            })?;
            let xy = parse_fields::<f64>(l, 2, ln)?;
            vertices.push(Point::new(xy[0], xy[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or(Error::MeshParse {
                line: ln,
                msg: "unexpected end of file in triangle block".into(),
            })?;
            let ijk = parse_fields::<usize>(l, 3, ln)?;
            triangles.push([ijk[0], ijk[1], ijk[2]]);
        }
        Triangulation::from_one_based(vertices, &triangles)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Triangulation::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.num_vertices(), self.num_triangles());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

fn parse_fields<T: std::str::FromStr>(line: &str, n: usize, ln: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != n {
        return Err(Error::MeshParse {
            line: ln,
            msg: format!("expected {n} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>().map_err(|_| Error::MeshParse {
                line: ln,
                msg: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

/// Size and shape measures of a triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshMetrics {
    /// Longest edge over all triangles.
    pub h: f64,
    pub h_t: Vec<f64>,
    /// Inradius per triangle.
    pub rho_t: Vec<f64>,
    /// max h_T / rho_T
    pub shape_parameter: f64,
}

/// Bucket grid over the bounding box for fast point location. Gives the same
/// answers as [`Triangulation::locate_point`].
#[derive(Debug, Clone)]
pub struct PointLocator<'a> {
    mesh: &'a Triangulation,
    lo: Point,
    cell: (f64, f64),
    dims: (usize, usize),
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Triangulation) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let n = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = (n, n);
        let w = ((hi.x - lo.x) / n as f64).max(f64::MIN_POSITIVE);
        let hgt = ((hi.y - lo.y) / n as f64).max(f64::MIN_POSITIVE);
        let mut buckets = vec![Vec::new(); n * n];
        let pad = 1e-9 * ((hi.x - lo.x).abs() + (hi.y - lo.y).abs());
        for t in 0..mesh.num_triangles() {
            let c = mesh.corners(t);
            let (mut x0, mut y0, mut x1, mut y1) = (c[0].x, c[0].y, c[0].x, c[0].y);
            for p in &c[1..] {
                x0 = x0.min(p.x);
                y0 = y0.min(p.y);
                x1 = x1.max(p.x);
                y1 = y1.max(p.y);
            }
            let i0 = bucket_coord(x0 - pad, lo.x, w, n);
            let i1 = bucket_coord(x1 + pad, lo.x, w, n);
            let j0 = bucket_coord(y0 - pad, lo.y, hgt, n);
            let j1 = bucket_coord(y1 + pad, lo.y, hgt, n);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * n + i].push(t);
                }
            }
        }
        PointLocator {
            mesh,
            lo,
            cell: (w, hgt),
            dims,
            buckets,
        }
    }

    pub fn mesh(&self) -> &'a Triangulation {
        self.mesh
    }

    pub fn locate(&self, p: Point) -> Result<(usize, [f64; 3])> {
        let (nx, ny) = self.dims;
        let fx = (p.x - self.lo.x) / self.cell.0;
        let fy = (p.y - self.lo.y) / self.cell.1;
        if !(fx > -1.0 && fy > -1.0 && fx < nx as f64 + 1.0 && fy < ny as f64 + 1.0) {
            return Err(Error::PointOutsideDomain(p.x, p.y));
        }
        let i = bucket_coord(p.x, self.lo.x, self.cell.0, nx);
        let j = bucket_coord(p.y, self.lo.y, self.cell.1, ny);
        // buckets hold ascending triangle indices, so the first hit is the
        // lowest-index containing triangle
        for &t in &self.buckets[j * nx + i] {
            let b = self.mesh.barycentric(t, p);
            if b.iter().all(|&v| v >= -LOCATE_TOL) {
                return Ok((t, b));
            }
        }
        Err(Error::PointOutsideDomain(p.x, p.y))
    }
}

fn bucket_coord(v: f64, lo: f64, w: f64, n: usize) -> usize {
    let f = ((v - lo) / w).floor();
    if f < 0.0 {
        0
    } else {
        (f as usize).min(n - 1)
    }
}
