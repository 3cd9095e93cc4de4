//! Convergence studies: solve on successive refinements, measure RMSE on a
//! lattice and tabulate rates.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{Approximation, DiscreteOperator, Discretization};
use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::mesh::{Point, PointLocator, Triangulation};
use crate::problems::{get_problem, ProblemDefinition};
use crate::solver::{assemble_kkt, solve_with_best, SolveReport, SolverOptions};
use crate::spline::{Spline, SplineJet};

/// RMSE below which a rate is flagged as sitting at round-off level.
pub const PRECISION_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: String,
    pub degree: usize,
    pub dual_degree: usize,
    pub levels: Vec<usize>,
    pub grid_n: usize,
    pub solver: SolverOptions,
    pub k2: usize,
    pub coefficient_mode: Approximation,
    pub load_mode: Approximation,
    /// Solve the levels concurrently.
    pub parallel: bool,
    /// Replaces the problem's level-0 mesh.
    pub base_mesh: Option<Triangulation>,
}

impl StudyConfig {
    pub fn new(problem: &str, degree: usize, dual_degree: usize, levels: Vec<usize>) -> Self {
        StudyConfig {
            problem: problem.to_string(),
            degree,
            dual_degree,
            levels,
            grid_n: 201,
            solver: SolverOptions::default(),
            k2: 2,
            coefficient_mode: Approximation::Interpolate,
            load_mode: Approximation::Project,
            parallel: false,
            base_mesh: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(Error::InvalidConfig(format!("degree must be at least 2, got {}", self.degree)));
        }
        if self.dual_degree > self.degree {
            return Err(Error::InvalidConfig(format!(
                "dual degree {} exceeds degree {}",
                self.dual_degree, self.degree
            )));
        }
        if self.grid_n < 2 {
            return Err(Error::InvalidConfig("grid must have at least 2 points per axis".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("no refinement levels requested".into()));
        }
        if !(self.solver.tol > 0.0 && self.solver.rho > 0.0 && self.solver.rank_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances and penalty must be positive".into()));
        }
        Ok(())
    }

    pub fn discretization(&self) -> Discretization {
        Discretization {
            k: self.degree,
            k1: self.dual_degree,
            k2: self.k2,
            coefficients: self.coefficient_mode,
            load: self.load_mode,
        }
    }
}

/// RMSE of the value, the gradient (mean over components) and the Hessian
/// (mean over xx, xy, yy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub value: f64,
    pub gradient: f64,
    pub hessian: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub rmse_value: f64,
    pub rate_value: f64,
    pub rmse_gradient: f64,
    pub rate_gradient: f64,
    pub rmse_hessian: f64,
    pub rate_hessian: f64,
    pub constraint_residual: f64,
    pub constraint_inconsistency: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub solve_seconds: f64,
    /// Set when the level failed; the error columns are then NaN or come
    /// from the best available iterate.
    pub failure: Option<String>,
}

impl ConvergenceRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// A solved level.
#[derive(Debug, Clone)]
pub struct Solution {
    pub mesh: Triangulation,
    pub spline: Spline,
    pub report: SolveReport,
}

/// Assembles and solves one problem on `mesh`. On non-convergence of the
/// iterative method the best iterate is returned next to the error.
pub fn solve_on_mesh(
    problem: &ProblemDefinition,
    mesh: &Triangulation,
    disc: &Discretization,
    opts: &SolverOptions,
) -> (Result<()>, Option<Solution>) {
    let k = disc.k;
    let built = (|| {
        let cons = ConstraintSystem::build(mesh, k, problem.g.as_ref())?;
        let op = DiscreteOperator::assemble(mesh, &problem.coefficients, problem.f.as_ref(), disc)?;
        assemble_kkt(&cons, &op, mesh.metrics().h)
    })();
    let kkt = match built {
        Ok(k) => k,
        Err(e) => return (Err(e), None),
    };
    let (status, report) = solve_with_best(&kkt, opts);
    let sol = report.map(|report| Solution {
        mesh: mesh.clone(),
        spline: Spline::new(mesh, k, report.u.clone()).expect("solver returns one block per triangle"),
        report,
    });
    (status, sol)
}

/// Convenience wrapper returning only successful solves.
pub fn solve_problem(problem: &ProblemDefinition, mesh: &Triangulation, cfg: &StudyConfig) -> Result<Solution> {
    match solve_on_mesh(problem, mesh, &cfg.discretization(), &cfg.solver) {
        (Ok(()), Some(s)) => Ok(s),
        (Err(e), _) => Err(e),
        (Ok(()), None) => unreachable!("a successful solve has a solution"),
    }
}

/// Lattice of `n x n` points over the rectangle, boundary included.
pub fn lattice(lo: Point, hi: Point, n: usize) -> Vec<Point> {
    let step = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            pts.push(Point::new(step(lo.x, hi.x, i), step(lo.y, hi.y, j)));
        }
    }
    pts
}

/// RMSE of the spline against the exact solution on a `grid_n²` lattice over
/// the problem domain. Exact derivatives are taken from inside the located
/// triangle, so jumps across axes use the one-sided limit.
pub fn evaluate_errors(
    mesh: &Triangulation,
    u: &Spline,
    problem: &ProblemDefinition,
    grid_n: usize,
) -> Result<ErrorSummary> {
    let exact = problem.exact.as_ref().ok_or(Error::NoExactSolution)?;
    if grid_n < 2 {
        return Err(Error::InvalidConfig("grid must have at least 2 points per axis".into()));
    }
    let jet = SplineJet::new(mesh, u)?;
    let locator = PointLocator::new(mesh);
    let (lo, hi) = problem.domain;
    let rows: Result<Vec<[f64; 6]>> = (0..grid_n)
        .into_par_iter()
        .map(|j| {
            let mut acc = [0.0; 6];
            let y = lo.y + (hi.y - lo.y) * j as f64 / (grid_n - 1) as f64;
            for i in 0..grid_n {
                let x = lo.x + (hi.x - lo.x) * i as f64 / (grid_n - 1) as f64;
                let p = Point::new(x, y);
                let (t, b) = locator.locate(p)?;
                let s = jet.eval_piece(t, b);
                let e = exact(p.toward(mesh.centroid(t), crate::assembly::INTERIOR_NUDGE));
                for c in 0..6 {
                    acc[c] += (s[c] - e[c]).powi(2);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut tot = [0.0; 6];
    for r in rows? {
        for c in 0..6 {
            tot[c] += r[c];
        }
    }
    let n = (grid_n * grid_n) as f64;
    let rmse: Vec<f64> = tot.iter().map(|s| (s / n).sqrt()).collect();
    Ok(ErrorSummary {
        value: rmse[0],
        gradient: 0.5 * (rmse[1] + rmse[2]),
        hessian: (rmse[3] + rmse[4] + rmse[5]) / 3.0,
    })
}

fn run_level(problem: &ProblemDefinition, base: &Triangulation, level: usize, cfg: &StudyConfig) -> ConvergenceRow {
    let start = Instant::now();
    let mesh = base.refined(level);
    let h = mesh.metrics().h;
    let mut row = ConvergenceRow {
        level,
        h,
        rmse_value: f64::NAN,
        rate_value: f64::NAN,
        rmse_gradient: f64::NAN,
        rate_gradient: f64::NAN,
        rmse_hessian: f64::NAN,
        rate_hessian: f64::NAN,
        constraint_residual: f64::NAN,
        constraint_inconsistency: f64::NAN,
        kkt_residual: f64::NAN,
        iterations: 0,
        solve_seconds: 0.0,
        failure: None,
    };
    let (status, sol) = solve_on_mesh(problem, &mesh, &cfg.discretization(), &cfg.solver);
    if let Err(e) = status {
        row.failure = Some(e.to_string());
    }
    if let Some(sol) = sol {
        row.constraint_residual = sol.report.constraint_residual;
        row.constraint_inconsistency = sol.report.constraint_inconsistency;
        row.kkt_residual = sol.report.kkt_residual;
        row.iterations = sol.report.iterations;
        match evaluate_errors(&mesh, &sol.spline, problem, cfg.grid_n) {
            Ok(e) => {
                row.rmse_value = e.value;
                row.rmse_gradient = e.gradient;
                row.rmse_hessian = e.hessian;
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
    }
    row.solve_seconds = start.elapsed().as_secs_f64();
    row
}

/// `log2(prev / cur)`.
pub fn rate(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

/// Fills the rate columns; the first row gets 0 by convention.
pub fn fill_rates(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[0].rate_value = 0.0;
            rows[0].rate_gradient = 0.0;
            rows[0].rate_hessian = 0.0;
            continue;
        }
        let (a, b) = rows.split_at_mut(i);
        let (p, c) = (&a[i - 1], &mut b[0]);
        c.rate_value = rate(p.rmse_value, c.rmse_value);
        c.rate_gradient = rate(p.rmse_gradient, c.rmse_gradient);
        c.rate_hessian = rate(p.rmse_hessian, c.rmse_hessian);
    }
}

pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let problem = get_problem(&cfg.problem)?;
    run_study_for(&problem, cfg)
}

/// Runs a study for an explicit problem definition.
pub fn run_study_for(problem: &ProblemDefinition, cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    if problem.exact.is_none() {
        return Err(Error::NoExactSolution);
    }
    let base = cfg.base_mesh.as_ref().unwrap_or(&problem.base_mesh);
    let mut rows: Vec<ConvergenceRow> = if cfg.parallel {
        cfg.levels.par_iter().map(|&l| run_level(problem, base, l, cfg)).collect()
    } else {
        cfg.levels.iter().map(|&l| run_level(problem, base, l, cfg)).collect()
    };
    fill_rates(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

/// Scientific notation with six decimals and a signed two-digit exponent,
/// e.g. `2.760695e-07`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

fn format_rate(rate: f64, rmse: f64) -> String {
    let mut s = format!("{rate:.2}");
    if rmse < PRECISION_FLOOR {
        s.push('*');
    }
    s
}

pub const CSV_HEADER: &str = "h,rmse_u,rate_u,rmse_grad,rate_grad,rmse_hess,rate_hess,constraint_residual,solve_seconds";

pub fn emit_table(rows: &[ConvergenceRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Io("refusing to write an empty table".into()));
    }
    let mut out = String::new();
    match format {
        TableFormat::Text => {
            out.push_str("|T| & u-S_u & rate & grad(u-S_u) & rate & hess(u-S_u) & rate\n");
            for r in rows {
                let mut line = format!(
                    "{:.4} & {} & {} & {} & {} & {} & {}",
                    r.h,
                    format_sci(r.rmse_value),
                    format_rate(r.rate_value, r.rmse_value),
                    format_sci(r.rmse_gradient),
                    format_rate(r.rate_gradient, r.rmse_gradient),
                    format_sci(r.rmse_hessian),
                    format_rate(r.rate_hessian, r.rmse_hessian),
                );
                if let Some(f) = &r.failure {
                    let _ = write!(line, " & FAILED: {f}");
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
        TableFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.h,
                    r.rmse_value,
                    r.rate_value,
                    r.rmse_gradient,
                    r.rate_gradient,
                    r.rmse_hessian,
                    r.rate_hessian,
                    r.constraint_residual,
                    r.solve_seconds
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, e: [f64; 3]) -> ConvergenceRow {
        ConvergenceRow {
            level: 1,
            h,
            rmse_value: e[0],
            rate_value: 0.0,
            rmse_gradient: e[1],
            rate_gradient: 0.0,
            rmse_hessian: e[2],
            rate_hessian: 0.0,
            constraint_residual: 0.0,
            constraint_inconsistency: 0.0,
            kkt_residual: 0.0,
            iterations: 1,
            solve_seconds: 0.0,
            failure: None,
        }
    }

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(2.760695e-07), "2.760695e-07");
        assert_eq!(format_sci(4.628174), "4.628174e+00");
        assert_eq!(format_sci(0.001), "1.000000e-03");
        assert_eq!(format_sci(1.5e120), "1.500000e+120");
    }

    #[test]
    fn text_row_layout() {
        let t = emit_table(&[row(std::f64::consts::FRAC_1_SQRT_2, [1e-3, 1e-2, 1e-1])], TableFormat::Text).unwrap();
        let line = t.lines().nth(1).unwrap();
        assert_eq!(line, "0.7071 & 1.000000e-03 & 0.00 & 1.000000e-02 & 0.00 & 1.000000e-01 & 0.00");
    }

    #[test]
    fn rates_and_floor_marker() {
        let mut rows = vec![row(0.5, [1e-12, 1e-2, 1e-1]), row(0.25, [1e-14, 2.5e-3, 5e-2])];
        fill_rates(&mut rows);
        assert_eq!(rows[0].rate_value, 0.0);
        assert!((rows[1].rate_gradient - 2.0).abs() < 1e-12);
        assert!((rows[1].rate_hessian - 1.0).abs() < 1e-12);
        let t = emit_table(&rows, TableFormat::Text).unwrap();
        assert!(t.lines().nth(2).unwrap().contains("6.64*"));
    }

    #[test]
    fn empty_table_is_refused() {
        assert!(matches!(emit_table(&[], TableFormat::Csv), Err(Error::Io(_))));
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::new("ex1", 2, 0, vec![1]);
        assert!(c.validate().is_ok());
        c.dual_degree = 3;
        assert!(c.validate().is_err());
        c = StudyConfig::new("ex1", 1, 0, vec![1]);
        assert!(c.validate().is_err());
        c = StudyConfig::new("ex1", 2, 0, vec![]);
        assert!(c.validate().is_err());
    }
}
