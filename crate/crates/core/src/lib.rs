//! Primal-dual discontinuous bivariate spline solver for second-order
//! elliptic equations in non-divergence form,
//!
//! ```text
//! Σ a_ij ∂²_ij u + c u = f  in Ω,    u = g  on ∂Ω.
//! ```
//!
//! The solution is sought in discontinuous splines of degree `k` in
//! Bernstein–Bézier form. Jumps of the value and gradient across interior
//! edges and the boundary mismatch are minimized in least squares subject
//! to the discretized equation tested against discontinuous splines of
//! degree `k1`.
//!
//! ```no_run
//! use ndspline::harness::{emit_table, run_study, StudyConfig, TableFormat};
//!
//! let cfg = StudyConfig::new("ex1", 5, 5, vec![1, 2, 3]);
//! let rows = run_study(&cfg).unwrap();
//! print!("{}", emit_table(&rows, TableFormat::Text).unwrap());
//! ```

pub mod assembly;
pub mod bernstein;
pub mod constraints;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod spline;

pub use assembly::{Approximation, CoefficientField, DiscreteOperator, Discretization};
pub use bernstein::{BForm, Direction};
pub use constraints::ConstraintSystem;
pub use error::{Error, Result};
pub use harness::{ConvergenceRow, StudyConfig, TableFormat};
pub use mesh::{MeshMetrics, Point, PointLocator, Triangulation};
pub use problems::{get_problem, ProblemDefinition};
pub use solver::{KKTSystem, SolveReport, SolverMethod, SolverOptions};
pub use spline::Spline;
