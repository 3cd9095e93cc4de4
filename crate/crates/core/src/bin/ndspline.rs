use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ndspline::harness::{emit_table, run_study, StudyConfig, TableFormat};
use ndspline::{Approximation, Error, SolverMethod, SolverOptions, Triangulation};

#[derive(Parser)]
#[command(name = "ndspline", version, about = "Bivariate spline solver for non-divergence elliptic PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study for a built-in problem.
    Solve(SolveArgs),
    /// Read a mesh file, refine it and print its metrics.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Direct,
    Iterative,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Approx {
    Interpolate,
    Project,
}

impl From<Approx> for Approximation {
    fn from(a: Approx) -> Self {
        match a {
            Approx::Interpolate => Approximation::Interpolate,
            Approx::Project => Approximation::Project,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// ex1, ex1-2pi, ex3, ex51, ex52 or ex53
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 5)]
    degree: usize,
    #[arg(long = "dual-degree")]
    dual_degree: Option<usize>,
    /// `N` for levels 1..=N, a range `a-b`, or a list `1,3,4`
    #[arg(long, default_value = "4")]
    levels: String,
    #[arg(long, default_value_t = 201)]
    grid: usize,
    /// Degree of the coefficient approximation.
    #[arg(long, default_value_t = 2)]
    k2: usize,
    /// How the PDE coefficients are approximated.
    #[arg(long, value_enum, default_value_t = Approx::Interpolate)]
    coefficients: Approx,
    /// How the right-hand side is approximated in the test space.
    #[arg(long, value_enum, default_value_t = Approx::Project)]
    load: Approx,
    #[arg(long, value_enum, default_value_t = Solver::Direct)]
    solver: Solver,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-it", default_value_t = 200)]
    max_it: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long = "rank-tol", default_value_t = 1e-9)]
    rank_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Level-0 mesh file replacing the problem's built-in mesh.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Solve the levels concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct MeshArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Write the refined mesh here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_levels(s: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::InvalidConfig(format!("cannot parse levels `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once('-') {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    if s.contains(',') {
        return s.split(',').map(num).collect();
    }
    let n = num(s)?;
    if n == 0 {
        return Err(bad());
    }
    Ok((1..=n).collect())
}

fn configure_threads() {
    if let Some(n) = std::env::var("NDSPLINE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn study_config(a: &SolveArgs) -> Result<StudyConfig, Error> {
    let mut cfg = StudyConfig::new(
        &a.problem,
        a.degree,
        a.dual_degree.unwrap_or(a.degree.saturating_sub(2)),
        parse_levels(&a.levels)?,
    );
    cfg.grid_n = a.grid;
    cfg.k2 = a.k2;
    cfg.parallel = a.parallel;
    cfg.coefficient_mode = a.coefficients.into();
    cfg.load_mode = a.load.into();
    cfg.solver = SolverOptions {
        method: match a.solver {
            Solver::Direct => SolverMethod::Direct,
            Solver::Iterative => SolverMethod::Iterative,
        },
        tol: a.tol,
        max_it: a.max_it,
        rho: a.rho,
        rank_tol: a.rank_tol,
    };
    if let Some(path) = &a.mesh {
        cfg.base_mesh = Some(Triangulation::read(path)?);
    }
    ndspline::get_problem(&cfg.problem)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_solve(a: &SolveArgs) -> ExitCode {
    let cfg = match study_config(a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match run_study(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match a.format {
        Format::Text => TableFormat::Text,
        Format::Csv => TableFormat::Csv,
    };
    let written = emit_table(&rows, format).and_then(|t| write_output(&t, a.out.as_ref()));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for r in rows.iter().filter(|r| r.failed()) {
        eprintln!("level {} failed: {}", r.level, r.failure.as_deref().unwrap_or(""));
    }
    if rows.iter().any(|r| r.failed()) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_mesh(a: &MeshArgs) -> ExitCode {
    let mesh = match Triangulation::read(&a.file) {
        Ok(m) => m.refined(a.refine),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let m = mesh.metrics();
    println!("vertices        {}", mesh.num_vertices());
    println!("triangles       {}", mesh.num_triangles());
    println!("edges           {}", mesh.num_edges());
    println!("boundary edges  {}", mesh.boundary_edges().len());
    println!("h               {:.6}", m.h);
    println!("shape parameter {:.6}", m.shape_parameter);
    if let Some(out) = &a.out {
        if let Err(e) = std::fs::write(out, mesh.to_text()) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Mesh(a) => run_mesh(a),
    }
}
