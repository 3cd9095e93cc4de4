//! Built-in benchmark problems with manufactured exact solutions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::assembly::{CoefficientField, ScalarFn};
use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};

/// `(u, ux, uy, uxx, uxy, uyy)` at a point.
pub type JetFn = Arc<dyn Fn(Point) -> [f64; 6] + Send + Sync>;

pub const PROBLEM_IDS: [&str; 6] = ["ex1", "ex1-2pi", "ex3", "ex51", "ex52", "ex53"];

#[derive(Clone)]
pub struct ProblemDefinition {
    pub id: String,
    /// Lower-left and upper-right corners of the rectangular domain.
    pub domain: (Point, Point),
    /// Level-0 mesh; level `l` is its `l`-th uniform refinement.
    pub base_mesh: Triangulation,
    pub coefficients: CoefficientField,
    pub exact: Option<JetFn>,
    pub f: ScalarFn,
    pub g: ScalarFn,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("triangles", &self.base_mesh.num_triangles())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemDefinition {
    pub fn mesh(&self, level: usize) -> Triangulation {
        self.base_mesh.refined(level)
    }

    /// Operator applied to the exact solution at `p`.
    pub fn apply_operator_to_exact(&self, p: Point) -> Result<f64> {
        let jet = exact_derivatives(self, p)?;
        Ok(self.coefficients.apply(p, jet))
    }
}

pub fn exact_derivatives(p: &ProblemDefinition, at: Point) -> Result<[f64; 6]> {
    p.exact.as_ref().map(|e| e(at)).ok_or(Error::NoExactSolution)
}

/// `sign` with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sin(wx) sin(wy)` and its derivatives.
fn sine_jet(w: f64) -> impl Fn(Point) -> [f64; 6] + Copy {
    move |p: Point| {
        let (sx, cx) = (w * p.x).sin_cos();
        let (sy, cy) = (w * p.y).sin_cos();
        let w2 = w * w;
        [sx * sy, w * cx * sy, w * sx * cy, -w2 * sx * sy, w2 * cx * cy, -w2 * sx * sy]
    }
}

/// `phi(t) = t (e^{1-|t|} - 1)` with first and second derivatives.
fn phi(t: f64) -> [f64; 3] {
    let e = (1.0 - t.abs()).exp();
    [t * (e - 1.0), e * (1.0 - t.abs()) - 1.0, -sign(t) * e * (2.0 - t.abs())]
}

fn kink_jet(p: Point) -> [f64; 6] {
    let [fx, dfx, ddfx] = phi(p.x);
    let [fy, dfy, ddfy] = phi(p.y);
    [fx * fy, dfx * fy, fx * dfy, ddfx * fy, dfx * dfy, fx * ddfy]
}

fn ex1_tensor() -> (f64, f64, f64) {
    (3.0, 1.0, 2.0)
}

fn reaction(p: Point) -> f64 {
    -(1.0 + p.x * p.x + p.y * p.y)
}

fn build(
    id: &str,
    domain: (Point, Point),
    base_mesh: Triangulation,
    coefficients: CoefficientField,
    exact: impl Fn(Point) -> [f64; 6] + Send + Sync + Copy + 'static,
) -> ProblemDefinition {
    let field = coefficients.clone();
    ProblemDefinition {
        id: id.to_string(),
        domain,
        base_mesh,
        coefficients,
        exact: Some(Arc::new(exact)),
        f: Arc::new(move |p| field.apply(p, exact(p))),
        g: Arc::new(move |p| exact(p)[0]),
    }
}

/// Closed-form right-hand sides, independent of [`CoefficientField::apply`].
pub fn closed_form_rhs(id: &str, p: Point) -> Result<f64> {
    let (x, y) = (p.x, p.y);
    let r = 1.0 + x * x + y * y;
    Ok(match id {
        "ex1" => -5.0 * x.sin() * y.sin() + 2.0 * x.cos() * y.cos(),
        "ex1-2pi" => {
            let u = (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            -20.0 * PI * PI * u + 8.0 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
        }
        "ex51" | "ex52" => {
            let u = (PI * x).sin() * (PI * y).sin();
            let cc = (PI * x).cos() * (PI * y).cos();
            if id == "ex51" {
                -5.0 * PI * PI * u + 2.0 * PI * PI * cc - r * u
            } else {
                -(2.0 + x.abs() + y.abs()) * PI * PI * u + (x * y).cbrt() * PI * PI * cc - r * u
            }
        }
        "ex3" | "ex53" => {
            let [fx, dfx, ddfx] = phi(x);
            let [fy, dfy, ddfy] = phi(y);
            let lu = 2.0 * ddfx * fy + 2.0 * sign(x) * sign(y) * dfx * dfy + 2.0 * fx * ddfy;
            if id == "ex3" {
                lu
            } else {
                lu - r * fx * fy
            }
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    })
}

pub fn get_problem(id: &str) -> Result<ProblemDefinition> {
    let unit = (Point::new(0.0, 0.0), Point::new(1.0, 1.0));
    let big = (Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
    let two = || Triangulation::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1).expect("unit square mesh");
    let eight = || Triangulation::rectangle(-1.0, -1.0, 1.0, 1.0, 2, 2).expect("square mesh");
    let (a11, a12, a22) = ex1_tensor();
    let kink_field = |c: fn(Point) -> f64| {
        CoefficientField::new(|_| 2.0, |p: Point| sign(p.x) * sign(p.y), |_| 2.0, c)
    };
    Ok(match id {
        "ex1" => build(id, unit, two(), CoefficientField::constant(a11, a12, a22, 0.0), sine_jet(1.0)),
        "ex1-2pi" => build(id, unit, two(), CoefficientField::constant(a11, a12, a22, 0.0), sine_jet(2.0 * PI)),
        "ex3" => build(id, big, eight(), kink_field(|_| 0.0), kink_jet),
        "ex51" => build(
            id,
            big,
            eight(),
            CoefficientField::new(move |_| a11, move |_| a12, move |_| a22, reaction),
            sine_jet(PI),
        ),
        "ex52" => build(
            id,
            big,
            eight(),
            CoefficientField::new(
                |p: Point| 1.0 + p.x.abs(),
                |p: Point| 0.5 * (p.x * p.y).cbrt(),
                |p: Point| 1.0 + p.y.abs(),
                reaction,
            ),
            sine_jet(PI),
        ),
        "ex53" => build(id, big, eight(), kink_field(reaction), kink_jet),
        other => return Err(Error::UnknownProblem(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let ex1 = get_problem("ex1").unwrap();
        let j = exact_derivatives(&ex1, Point::new(PI / 2.0, PI / 2.0)).unwrap();
        assert!((j[0] - 1.0).abs() < 1e-15);
        assert_eq!(exact_derivatives(&ex1, Point::new(0.0, 0.0)).unwrap(), [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(((ex1.f)(Point::new(0.0, 0.0)) - 2.0).abs() < 1e-15);

        let ex3 = get_problem("ex3").unwrap();
        assert_eq!((ex3.g)(Point::new(1.0, 0.3)), 0.0);
        let u = exact_derivatives(&ex3, Point::new(0.5, 0.5)).unwrap()[0];
        let e = 0.5f64.exp() - 1.0;
        assert!((u - 0.25 * e * e).abs() < 1e-15);

        let ex51 = get_problem("ex51").unwrap();
        assert_eq!(exact_derivatives(&ex51, Point::new(0.0, 0.0)).unwrap()[0], 0.0);
        assert!(matches!(get_problem("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn base_meshes() {
        assert_eq!(get_problem("ex1").unwrap().base_mesh.num_triangles(), 2);
        for id in ["ex3", "ex51", "ex52", "ex53"] {
            let p = get_problem(id).unwrap();
            assert_eq!(p.base_mesh.num_triangles(), 8);
            assert!((p.mesh(1).metrics().h - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }
}
