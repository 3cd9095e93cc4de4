use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("triangle {0} is degenerate (zero area)")]
    DegenerateTriangle(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("vertex index {index} out of range (have {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("point ({0}, {1}) lies outside the triangulated domain")]
    PointOutsideDomain(f64, f64),
    #[error("polynomial degree {0} is too low for this operation")]
    DegreeTooLow(usize),
    #[error("B-forms live on different triangles")]
    TriangleMismatch,
    #[error("smoothness order {0} is not supported (only 0 and 1)")]
    UnsupportedOrder(usize),
    #[error("local mass matrix is singular")]
    SingularLocalMass,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("saddle-point system is singular: {0}")]
    SingularSystem(String),
    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
    #[error("problem has no exact solution")]
    NoExactSolution,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
