//! C interface to the `ndspline` solver.
//!
//! Meshes and solutions are opaque handles created and released through
//! this API. Every fallible call returns an [`NdsStatus`]; on failure the
//! message is available from [`nds_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndspline::harness::{emit_table, evaluate_errors, run_study, solve_problem, StudyConfig, TableFormat};
use ndspline::{get_problem, Error, Point, PointLocator, ProblemDefinition, SolverMethod, Triangulation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMesh = 3,
    PointOutsideDomain = 4,
    UnknownProblem = 5,
    SingularSystem = 6,
    NoConvergence = 7,
    Io = 8,
    Panic = 9,
}

/// Triangulation handle.
pub struct NdsMesh {
    inner: Triangulation,
}

/// Spline solution of a built-in problem on a mesh.
pub struct NdsSolution {
    problem: ProblemDefinition,
    inner: ndspline::harness::Solution,
}

/// Discretization and solver settings.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NdsSolveOptions {
    pub degree: u32,
    pub dual_degree: u32,
    /// Degree of the coefficient interpolant.
    pub k2: u32,
    /// 0 = direct, 1 = iterative.
    pub method: u32,
    pub tol: f64,
    pub max_it: u32,
    pub rho: f64,
    pub rank_tol: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NdsStatus {
    match e {
        Error::DegenerateTriangle(_) | Error::NonManifoldEdge(..) | Error::IndexOutOfRange { .. } | Error::MeshParse { .. } => {
            NdsStatus::InvalidMesh
        }
        Error::PointOutsideDomain(..) => NdsStatus::PointOutsideDomain,
        Error::UnknownProblem(_) | Error::NoExactSolution => NdsStatus::UnknownProblem,
        Error::SingularSystem(_) | Error::SingularLocalMass => NdsStatus::SingularSystem,
        Error::NoConvergence { .. } => NdsStatus::NoConvergence,
        Error::Io(_) => NdsStatus::Io,
        _ => NdsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (NdsStatus, String)>) -> NdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NdsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            NdsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (NdsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NdsStatus, String) {
    (NdsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, (NdsStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (NdsStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NdsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn nds_solve_options_default() -> NdsSolveOptions {
    let s = ndspline::SolverOptions::default();
    NdsSolveOptions {
        degree: 5,
        dual_degree: 3,
        k2: 2,
        method: 0,
        tol: s.tol,
        max_it: s.max_it as u32,
        rho: s.rho,
        rank_tol: s.rank_tol,
    }
}

/// Uniform `nx x ny` triangulation of a rectangle, two triangles per cell.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_rectangle(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    nx: u32,
    ny: u32,
    out: *mut *mut NdsMesh,
) -> NdsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = Triangulation::rectangle(x0, y0, x1, y1, nx as usize, ny as usize).map_err(lib)?;
        *out = Box::into_raw(Box::new(NdsMesh { inner: m }));
        Ok(())
    })
}

/// Mesh from `nv` vertices (`xy` holds x0, y0, x1, y1, ...) and `nt`
/// triangles given as zero-based vertex triples.
///
/// # Safety
/// `xy` must point to `2 * nv` doubles, `tri` to `3 * nt` integers.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_new(
    xy: *const f64,
    nv: usize,
    tri: *const u32,
    nt: usize,
    out: *mut *mut NdsMesh,
) -> NdsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if xy.is_null() || tri.is_null() {
            return Err(null("xy/tri"));
        }
        let xy = std::slice::from_raw_parts(xy, 2 * nv);
        let tri = std::slice::from_raw_parts(tri, 3 * nt);
        let v = xy.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let t = tri.chunks_exact(3).map(|c| [c[0] as usize, c[1] as usize, c[2] as usize]).collect();
        let m = Triangulation::new(v, t).map_err(lib)?;
        *out = Box::into_raw(Box::new(NdsMesh { inner: m }));
        Ok(())
    })
}

/// Level-`level` mesh of a built-in problem.
///
/// # Safety
/// `problem` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nds_problem_mesh(problem: *const c_char, level: u32, out: *mut *mut NdsMesh) -> NdsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = get_problem(str_arg(problem, "problem")?).map_err(lib)?;
        *out = Box::into_raw(Box::new(NdsMesh {
            inner: p.mesh(level as usize),
        }));
        Ok(())
    })
}

/// New mesh obtained by `times` uniform refinements of `mesh`.
///
/// # Safety
/// `mesh` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_refine(mesh: *const NdsMesh, times: u32, out: *mut *mut NdsMesh) -> NdsStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(NdsMesh {
            inner: m.inner.refined(times as usize),
        }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be a live handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_counts(
    mesh: *const NdsMesh,
    vertices: *mut usize,
    triangles: *mut usize,
    edges: *mut usize,
) -> NdsStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.inner;
        if let Some(v) = vertices.as_mut() {
            *v = m.num_vertices();
        }
        if let Some(t) = triangles.as_mut() {
            *t = m.num_triangles();
        }
        if let Some(e) = edges.as_mut() {
            *e = m.num_edges();
        }
        Ok(())
    })
}

/// Mesh size (longest edge) and shape parameter.
///
/// # Safety
/// `mesh` must be a live handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_size(mesh: *const NdsMesh, h: *mut f64, shape: *mut f64) -> NdsStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?.inner.metrics();
        if let Some(h) = h.as_mut() {
            *h = m.h;
        }
        if let Some(s) = shape.as_mut() {
            *s = m.shape_parameter;
        }
        Ok(())
    })
}

/// Containing triangle and barycentric coordinates of `(x, y)`.
///
/// # Safety
/// `mesh` must be a live handle, `triangle` valid, `bary` null or three
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_locate(
    mesh: *const NdsMesh,
    x: f64,
    y: f64,
    triangle: *mut usize,
    bary: *mut f64,
) -> NdsStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.inner;
        let out = out_arg(triangle, "triangle")?;
        let (t, b) = m.locate_point(Point::new(x, y)).map_err(lib)?;
        *out = t;
        if !bary.is_null() {
            std::slice::from_raw_parts_mut(bary, 3).copy_from_slice(&b);
        }
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nds_mesh_free(mesh: *mut NdsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

fn study_config(problem: &str, o: &NdsSolveOptions, levels: Vec<usize>) -> Result<StudyConfig, (NdsStatus, String)> {
    let mut cfg = StudyConfig::new(problem, o.degree as usize, o.dual_degree as usize, levels);
    cfg.k2 = o.k2 as usize;
    cfg.solver.method = match o.method {
        0 => SolverMethod::Direct,
        1 => SolverMethod::Iterative,
        m => return Err((NdsStatus::InvalidArgument, format!("unknown solver method {m}"))),
    };
    cfg.solver.tol = o.tol;
    cfg.solver.max_it = o.max_it as usize;
    cfg.solver.rho = o.rho;
    cfg.solver.rank_tol = o.rank_tol;
    cfg.validate().map_err(lib)?;
    Ok(cfg)
}

/// Solves a built-in problem on `mesh`. `options` may be null for the
/// defaults.
///
/// # Safety
/// `problem` must be a NUL-terminated string, `mesh` a live handle,
/// `options` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nds_solve_problem(
    problem: *const c_char,
    mesh: *const NdsMesh,
    options: *const NdsSolveOptions,
    out: *mut *mut NdsSolution,
) -> NdsStatus {
    guard(|| {
        let id = str_arg(problem, "problem")?;
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.inner;
        let out = out_arg(out, "out")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| nds_solve_options_default());
        let cfg = study_config(id, &opts, vec![0])?;
        let p = get_problem(id).map_err(lib)?;
        let sol = solve_problem(&p, m, &cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(NdsSolution { problem: p, inner: sol }));
        Ok(())
    })
}

/// Evaluates the solution at `n` points.
///
/// # Safety
/// `solution` must be a live handle; `x`, `y` and `values` must hold `n`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn nds_solution_eval(
    solution: *const NdsSolution,
    x: *const f64,
    y: *const f64,
    n: usize,
    values: *mut f64,
) -> NdsStatus {
    guard(|| {
        let s = &solution.as_ref().ok_or_else(|| null("solution"))?.inner;
        if n == 0 {
            return Ok(());
        }
        if x.is_null() || y.is_null() || values.is_null() {
            return Err(null("x/y/values"));
        }
        let (x, y) = (std::slice::from_raw_parts(x, n), std::slice::from_raw_parts(y, n));
        let values = std::slice::from_raw_parts_mut(values, n);
        let loc = PointLocator::new(&s.mesh);
        for i in 0..n {
            values[i] = s.spline.eval(&loc, Point::new(x[i], y[i])).map_err(lib)?;
        }
        Ok(())
    })
}

/// RMSE of value, gradient and Hessian on a `grid_n x grid_n` lattice,
/// written to `errors[0..3]`.
///
/// # Safety
/// `solution` must be a live handle, `errors` three doubles.
#[no_mangle]
pub unsafe extern "C" fn nds_solution_errors(solution: *const NdsSolution, grid_n: u32, errors: *mut f64) -> NdsStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if errors.is_null() {
            return Err(null("errors"));
        }
        let e = evaluate_errors(&s.inner.mesh, &s.inner.spline, &s.problem, grid_n as usize).map_err(lib)?;
        std::slice::from_raw_parts_mut(errors, 3).copy_from_slice(&[e.value, e.gradient, e.hessian]);
        Ok(())
    })
}

/// Constraint and relative KKT residuals of the solve.
///
/// # Safety
/// `solution` must be a live handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn nds_solution_residuals(
    solution: *const NdsSolution,
    constraint: *mut f64,
    kkt: *mut f64,
) -> NdsStatus {
    guard(|| {
        let r = &solution.as_ref().ok_or_else(|| null("solution"))?.inner.report;
        if let Some(c) = constraint.as_mut() {
            *c = r.constraint_residual;
        }
        if let Some(k) = kkt.as_mut() {
            *k = r.kkt_residual;
        }
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nds_solution_free(solution: *mut NdsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Convergence study over levels `1..=levels`, rendered as a text
/// (`csv == 0`) or CSV table. The string is released with
/// [`nds_string_free`]. Failed levels are reported in the table and make
/// the call return [`NdsStatus::NoConvergence`] or the matching error.
///
/// # Safety
/// `problem` must be a NUL-terminated string, `options` null or valid,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nds_study_run(
    problem: *const c_char,
    options: *const NdsSolveOptions,
    levels: u32,
    grid_n: u32,
    csv: i32,
    out: *mut *mut c_char,
) -> NdsStatus {
    guard(|| {
        let id = str_arg(problem, "problem")?;
        let out = out_arg(out, "out")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| nds_solve_options_default());
        let mut cfg = study_config(id, &opts, (1..=levels as usize).collect())?;
        cfg.grid_n = grid_n as usize;
        cfg.validate().map_err(lib)?;
        let rows = run_study(&cfg).map_err(lib)?;
        let format = if csv != 0 { TableFormat::Csv } else { TableFormat::Text };
        let text = emit_table(&rows, format).map_err(lib)?;
        *out = CString::new(text).map_err(|_| (NdsStatus::Io, "table contains NUL".into()))?.into_raw();
        match rows.iter().find_map(|r| r.failure.clone()) {
            Some(msg) => Err((NdsStatus::NoConvergence, msg)),
            None => Ok(()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
