//! Saddle-point solve of the constrained least-squares problem
//!
//! ```text
//! min ½ uᵀ A u − bᵀ u   subject to   (K + Kc) u = M f,
//! A = h² (HᵀH + BᵀB),   b = h² Bᵀ g.
//! ```
//!
//! The equality constraint is block diagonal. On each triangle it is first
//! compressed onto the range of the principal block `K_T` (the left singular
//! vectors above `rank_tol · σ_max`). When the dual degree is below `k − 1`
//! this is only a change of basis. When it is higher, `K_T` is rank
//! deficient and `M f` generally has a component outside its range. The
//! compressed system keeps the solvable part of the equation and drops the
//! rest, which is what a least-squares reading of the constraint does. At
//! most `dim(k − 2)` rows are kept per triangle.
//!
//! The direct method eliminates the constraint triangle by triangle
//! (null-space method) and factors the reduced SPD system with a sparse
//! Cholesky decomposition. The iterative method is an augmented Lagrangian
//! loop with block-Jacobi preconditioned conjugate gradients inside.

use std::collections::HashMap;
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::DiscreteOperator;
use crate::bernstein::dim;
use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, BlockDiagonal, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    Direct,
    Iterative,
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMethod::Direct),
            "iterative" => Ok(SolverMethod::Iterative),
            _ => Err(Error::InvalidConfig(format!("unknown solver `{s}`"))),
        }
    }
}

impl std::fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverMethod::Direct => "direct",
            SolverMethod::Iterative => "iterative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Relative tolerance of the iterative method.
    pub tol: f64,
    /// Outer iterations of the iterative method.
    pub max_it: usize,
    /// Initial augmented Lagrangian penalty, relative to the scale of `A`.
    pub rho: f64,
    /// Relative singular value cutoff for the constraint compression.
    pub rank_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolverMethod::Direct,
            tol: 1e-10,
            max_it: 200,
            rho: 1.0,
            rank_tol: 1e-9,
        }
    }
}

/// Saddle-point data. `c` is the full constraint operator `K + Kc`;
/// `principal` is the part that decides which rows are kept.
#[derive(Debug, Clone)]
pub struct KKTSystem {
    pub a: CsrMatrix,
    pub c: BlockDiagonal,
    pub principal: BlockDiagonal,
    pub rhs_primal: Vec<f64>,
    pub rhs_dual: Vec<f64>,
    pub h: f64,
    /// `½ h² |g|²`, so the objective can be reported without `H` and `B`.
    pub objective_shift: f64,
    /// Most rows kept per triangle by the compression.
    pub rank_cap: usize,
}

impl KKTSystem {
    pub fn new(
        a: CsrMatrix,
        c: BlockDiagonal,
        principal: BlockDiagonal,
        rhs_primal: Vec<f64>,
        rhs_dual: Vec<f64>,
        h: f64,
    ) -> Result<Self> {
        let n = a.ncols();
        if a.nrows() != n || c.ncols() != n || rhs_primal.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, C has {} columns, primal rhs has {} entries",
                a.nrows(),
                n,
                c.ncols(),
                rhs_primal.len()
            )));
        }
        if c.nrows() != rhs_dual.len() || principal.block_shape() != c.block_shape() || principal.num_blocks() != c.num_blocks() {
            return Err(Error::DimensionMismatch("constraint blocks and dual rhs disagree".into()));
        }
        let rank_cap = c.block_shape().0;
        Ok(KKTSystem {
            a,
            c,
            principal,
            rhs_primal,
            rhs_dual,
            h,
            objective_shift: 0.0,
            rank_cap,
        })
    }

    pub fn primal_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn dual_dim(&self) -> usize {
        self.c.nrows()
    }

    /// `½ uᵀ A u − bᵀ u + shift`, clamped at zero against round-off.
    pub fn objective(&self, u: &[f64]) -> f64 {
        let au = self.a.mul_vec(u);
        (0.5 * dot(u, &au) - dot(&self.rhs_primal, u) + self.objective_shift).max(0.0)
    }
}

pub fn assemble_kkt(cons: &ConstraintSystem, op: &DiscreteOperator, h: f64) -> Result<KKTSystem> {
    let n = op.k.ncols();
    if cons.h.ncols() != n || cons.b.ncols() != n || cons.g.len() != cons.b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "constraints act on {} coefficients, operator on {n}",
            cons.h.ncols()
        )));
    }
    if op.f_vec.len() != op.k.nrows() {
        return Err(Error::DimensionMismatch("load vector length".into()));
    }
    let h2 = h * h;
    let mut trip = Vec::new();
    cons.h.gram_triplets(h2, &mut trip);
    cons.b.gram_triplets(h2, &mut trip);
    let a = CsrMatrix::from_triplets(n, n, &trip);
    let rhs_primal: Vec<f64> = cons.b.tr_mul_vec(&cons.g).into_iter().map(|v| h2 * v).collect();
    let mut kkt = KKTSystem::new(a, op.total(), op.k.clone(), rhs_primal, op.f_vec.clone(), h)?;
    kkt.objective_shift = 0.5 * h2 * dot(&cons.g, &cons.g);
    // a:D²u has degree k − 2 for constant coefficients. Directions beyond
    // that only come from coefficient variation, and enforcing them leaves
    // too few free coefficients to control the jumps.
    let (k1, k) = (degree_of_dim(kkt.c.block_shape().0), degree_of_dim(n / kkt.c.num_blocks().max(1)));
    kkt.rank_cap = dim(k1.min(k.saturating_sub(2)));
    Ok(kkt)
}

fn degree_of_dim(n: usize) -> usize {
    (0..).find(|&d| dim(d) >= n).unwrap_or(0)
}

/// Per-triangle compressed constraint `C_r u = d_r` with
/// `C_r = U_rᵀ C_T`, `d_r = U_rᵀ d_T`.
#[derive(Debug, Clone)]
pub struct CompressedConstraints {
    pub basis: Vec<DMatrix<f64>>,
    pub rows: Vec<DMatrix<f64>>,
    pub rhs: Vec<DVector<f64>>,
    offsets: Vec<usize>,
    block_cols: usize,
}

impl CompressedConstraints {
    pub fn build(kkt: &KKTSystem, rank_tol: f64) -> Result<Self> {
        let (br, bc) = kkt.c.block_shape();
        let parts: Vec<_> = (0..kkt.c.num_blocks())
            .into_par_iter()
            .map(|t| {
                let (u, s, _) = full_svd(kkt.principal.block(t))?;
                let smax = s.first().copied().unwrap_or(0.0);
                let kept = s.iter().filter(|&&v| smax > 0.0 && v > rank_tol * smax).count();
                let basis = u.columns(0, kept.min(kkt.rank_cap)).into_owned();
                let rows = basis.tr_mul(kkt.c.block(t));
                let d = DVector::from_column_slice(&kkt.rhs_dual[t * br..(t + 1) * br]);
                let rhs = basis.tr_mul(&d);
                Ok((basis, rows, rhs))
            })
            .collect::<Result<_>>()?;
        let mut offsets = vec![0];
        let (mut basis, mut rows, mut rhs) = (Vec::new(), Vec::new(), Vec::new());
        for (b, r, d) in parts {
            offsets.push(offsets.last().unwrap() + b.ncols());
            basis.push(b);
            rows.push(r);
            rhs.push(d);
        }
        Ok(CompressedConstraints {
            basis,
            rows,
            rhs,
            offsets,
            block_cols: bc,
        })
    }

    /// Total number of kept rows.
    pub fn rank(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn rhs_vec(&self) -> Vec<f64> {
        self.rhs.iter().flat_map(|d| d.iter().copied()).collect()
    }

    pub fn mul_vec(&self, u: &[f64]) -> Vec<f64> {
        let m = self.block_cols;
        let mut out = Vec::with_capacity(self.rank());
        for (t, c) in self.rows.iter().enumerate() {
            let x = DVector::from_column_slice(&u[t * m..(t + 1) * m]);
            out.extend((c * x).iter());
        }
        out
    }

    pub fn tr_mul_vec(&self, l: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.block_cols * self.rows.len());
        for (t, c) in self.rows.iter().enumerate() {
            let y = DVector::from_column_slice(&l[self.offsets[t]..self.offsets[t + 1]]);
            out.extend(c.tr_mul(&y).iter());
        }
        out
    }

    /// Multiplier of the uncompressed constraint, `U_r λ_r` per triangle.
    pub fn expand(&self, l: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        for (t, b) in self.basis.iter().enumerate() {
            let y = DVector::from_column_slice(&l[self.offsets[t]..self.offsets[t + 1]]);
            out.extend((b * y).iter());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: Vec<f64>,
    /// Multiplier of `(K + Kc) u = M f`, length `d(M_h)`.
    pub lambda: Vec<f64>,
    /// `|C_r u − d_r|`, the part of the constraint that is enforced.
    pub constraint_residual: f64,
    /// `|(K + Kc) u − M f|`, including any unsolvable component.
    pub constraint_inconsistency: f64,
    /// `|A u + (K + Kc)ᵀ λ − b|`.
    pub stationarity_residual: f64,
    /// Residual of the compressed KKT system relative to its right-hand side.
    pub kkt_residual: f64,
    pub objective: f64,
    pub method: SolverMethod,
    pub iterations: usize,
    pub converged: bool,
    /// Number of enforced constraint rows.
    pub constraint_rank: usize,
    pub seconds: f64,
}

pub fn solve(kkt: &KKTSystem, opts: &SolverOptions) -> Result<SolveReport> {
    match solve_with_best(kkt, opts) {
        (Ok(()), Some(r)) => Ok(r),
        (Err(e), _) => Err(e),
        (Ok(()), None) => unreachable!("successful solve produces a report"),
    }
}

/// Like [`solve`] but also returns the best iterate when the iterative method
/// stops without converging.
pub fn solve_with_best(kkt: &KKTSystem, opts: &SolverOptions) -> (Result<()>, Option<SolveReport>) {
    let start = Instant::now();
    let cc = match CompressedConstraints::build(kkt, opts.rank_tol) {
        Ok(cc) => cc,
        Err(e) => return (Err(e), None),
    };
    let outcome = match opts.method {
        SolverMethod::Direct => direct(kkt, &cc).map(|(u, l)| (u, l, 1, true)),
        SolverMethod::Iterative => Ok(augmented_lagrangian(kkt, &cc, opts)),
    };
    let (u, l, iterations, converged) = match outcome {
        Ok(v) => v,
        Err(e) => return (Err(e), None),
    };
    let mut report = report(kkt, &cc, u, &l, opts.method, iterations, converged);
    report.seconds = start.elapsed().as_secs_f64();
    if converged {
        (Ok(()), Some(report))
    } else {
        let err = Error::NoConvergence {
            iterations,
            residual: report.kkt_residual,
        };
        (Err(err), Some(report))
    }
}

fn report(
    kkt: &KKTSystem,
    cc: &CompressedConstraints,
    u: Vec<f64>,
    l: &[f64],
    method: SolverMethod,
    iterations: usize,
    converged: bool,
) -> SolveReport {
    let au = kkt.a.mul_vec(&u);
    let ctl = cc.tr_mul_vec(l);
    let r1: Vec<f64> = au.iter().zip(&ctl).zip(&kkt.rhs_primal).map(|((a, c), b)| a + c - b).collect();
    let d = cc.rhs_vec();
    let r2: Vec<f64> = cc.mul_vec(&u).iter().zip(&d).map(|(a, b)| a - b).collect();
    let full: Vec<f64> = kkt.c.mul_vec(&u).iter().zip(&kkt.rhs_dual).map(|(a, b)| a - b).collect();
    let rhs_norm = (norm2(&kkt.rhs_primal).powi(2) + norm2(&d).powi(2)).sqrt();
    let res = (norm2(&r1).powi(2) + norm2(&r2).powi(2)).sqrt();
    SolveReport {
        objective: kkt.objective(&u),
        lambda: cc.expand(l),
        constraint_residual: norm2(&r2),
        constraint_inconsistency: norm2(&full),
        stationarity_residual: norm2(&r1),
        kkt_residual: if rhs_norm > 0.0 { res / rhs_norm } else { res },
        method,
        iterations,
        converged,
        constraint_rank: cc.rank(),
        seconds: 0.0,
        u,
    }
}

/// Local null-space data of one triangle's compressed constraint.
struct LocalElimination {
    /// Null-space basis, `m x (m − rank)`.
    z: DMatrix<f64>,
    /// Particular solution `C_r⁺ d_r`.
    particular: DVector<f64>,
    /// `(C_rᵀ)⁺`, recovers the multiplier from the stationarity residual.
    dual_map: DMatrix<f64>,
}

/// Full SVD `c = U diag(s) Vᵀ`, singular values in decreasing order.
///
/// nalgebra's bidiagonal SVD can lose several digits on the small, strongly
/// graded blocks that occur here, so the decomposition is delegated to faer.
fn full_svd(c: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (r, m) = c.shape();
    let svd = Mat::<f64>::from_fn(r, m, |i, j| c[(i, j)])
        .svd()
        .map_err(|e| Error::SingularSystem(format!("SVD did not converge ({e:?})")))?;
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..r.min(m)).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sv = order.iter().map(|&i| s[i]).collect();
    let (fu, fv) = (svd.U(), svd.V());
    // reorder the leading columns, leave the complementary ones in place
    let col = |j: usize| if j < order.len() { order[j] } else { j };
    let u = DMatrix::from_fn(r, r, |i, j| fu[(i, col(j))]);
    let v = DMatrix::from_fn(m, m, |i, j| fv[(i, col(j))]);
    Ok((u, sv, v))
}

fn eliminate(c: &DMatrix<f64>, d: &DVector<f64>) -> Result<LocalElimination> {
    let (r, m) = c.shape();
    let (u, s, v) = full_svd(c)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| smax > 0.0 && x > 1e-13 * smax).count();
    let z = v.columns(rank, m - rank).into_owned();
    let mut particular = DVector::zeros(m);
    let mut dual_map = DMatrix::zeros(r, m);
    for i in 0..rank {
        let ui = u.column(i);
        let vi = v.column(i);
        particular += vi * (ui.dot(d) / s[i]);
        // (C_rᵀ)⁺ = U Σ⁻¹ Vᵀ
        dual_map += ui * vi.transpose() / s[i];
    }
    Ok(LocalElimination {
        z,
        particular,
        dual_map,
    })
}

fn direct(kkt: &KKTSystem, cc: &CompressedConstraints) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = kkt.c.block_shape().1;
    let nt = kkt.c.num_blocks();
    let locals: Vec<LocalElimination> = (0..nt)
        .into_par_iter()
        .map(|t| eliminate(&cc.rows[t], &cc.rhs[t]))
        .collect::<Result<_>>()?;
    let mut yoff = vec![0usize];
    for l in &locals {
        yoff.push(yoff.last().unwrap() + l.z.ncols());
    }
    let ny = *yoff.last().unwrap();

    let up: Vec<f64> = locals.iter().flat_map(|l| l.particular.iter().copied()).collect();
    let aup = kkt.a.mul_vec(&up);
    let resid: Vec<f64> = kkt.rhs_primal.iter().zip(&aup).map(|(b, a)| b - a).collect();

    let mut u = up;
    if ny > 0 {
        let mut pairs: HashMap<(usize, usize), DMatrix<f64>> = HashMap::new();
        for (i, j, v) in kkt.a.triplets() {
            pairs.entry((i / m, j / m)).or_insert_with(|| DMatrix::zeros(m, m))[(i % m, j % m)] += v;
        }
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_by_key(|(k, _)| *k);
        let trip: Vec<Triplet<usize, usize, f64>> = pairs
            .par_iter()
            .flat_map_iter(|((ti, tj), blk)| {
                let r = locals[*ti].z.tr_mul(blk) * &locals[*tj].z;
                let (oi, oj) = (yoff[*ti], yoff[*tj]);
                let mut out = Vec::with_capacity(r.len());
                for c in 0..r.ncols() {
                    for rr in 0..r.nrows() {
                        let v = r[(rr, c)];
                        if v != 0.0 {
                            out.push(Triplet::new(oi + rr, oj + c, v));
                        }
                    }
                }
                out.into_iter()
            })
            .collect();
        let mut rhs = Mat::<f64>::zeros(ny, 1);
        for (t, l) in locals.iter().enumerate() {
            let rt = DVector::from_column_slice(&resid[t * m..(t + 1) * m]);
            for (i, v) in l.z.tr_mul(&rt).iter().enumerate() {
                rhs[(yoff[t] + i, 0)] = *v;
            }
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(ny, ny, &trip)
            .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("reduced matrix is not positive definite ({e:?})")))?;
        let y = llt.solve(&rhs);
        for (t, l) in locals.iter().enumerate() {
            let yt = DVector::from_fn(l.z.ncols(), |i, _| y[(yoff[t] + i, 0)]);
            let du = &l.z * yt;
            for (i, v) in du.iter().enumerate() {
                u[t * m + i] += v;
            }
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
    }

    // multiplier from A u + C_rᵀ λ = b, triangle by triangle
    let au = kkt.a.mul_vec(&u);
    let mut lambda = Vec::with_capacity(cc.rank());
    for (t, l) in locals.iter().enumerate() {
        let st = DVector::from_fn(m, |i, _| kkt.rhs_primal[t * m + i] - au[t * m + i]);
        lambda.extend((&l.dual_map * st).iter());
    }
    Ok((u, lambda))
}

/// Block-Jacobi preconditioner: Cholesky factors of the diagonal blocks.
struct BlockJacobi {
    m: usize,
    factors: Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl BlockJacobi {
    fn new(a: &CsrMatrix, cc: &CompressedConstraints, rho: f64, m: usize) -> Result<Self> {
        let nt = cc.rows.len();
        let mut blocks: Vec<DMatrix<f64>> = cc.rows.iter().map(|c| c.tr_mul(c) * rho).collect();
        for (i, j, v) in a.triplets() {
            if i / m == j / m {
                blocks[i / m][(i % m, j % m)] += v;
            }
        }
        let mut factors = Vec::with_capacity(nt);
        for mut b in blocks {
            let scale = b.diagonal().max().max(f64::MIN_POSITIVE);
            let mut shift = 0.0;
            loop {
                if let Some(ch) = b.clone().cholesky() {
                    factors.push(ch);
                    break;
                }
                shift = if shift == 0.0 { 1e-14 * scale } else { shift * 10.0 };
                if shift > scale {
                    return Err(Error::SingularSystem("preconditioner block".into()));
                }
                for i in 0..m {
                    b[(i, i)] += shift;
                }
            }
        }
        Ok(BlockJacobi { m, factors })
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = Vec::with_capacity(r.len());
        for (t, f) in self.factors.iter().enumerate() {
            out.extend(f.solve(&DVector::from_column_slice(&r[t * m..(t + 1) * m])).iter());
        }
        out
    }
}

/// Preconditioned CG on `x ↦ A x + ρ C_rᵀ C_r x` down to an absolute
/// residual `target`; returns iterations used.
fn pcg(
    kkt: &KKTSystem,
    cc: &CompressedConstraints,
    rho: f64,
    pre: &BlockJacobi,
    rhs: &[f64],
    x: &mut [f64],
    target: f64,
    max_it: usize,
) -> usize {
    let op = |v: &[f64]| -> Vec<f64> {
        let av = kkt.a.mul_vec(v);
        let cv = cc.tr_mul_vec(&cc.mul_vec(v));
        av.iter().zip(&cv).map(|(a, c)| a + rho * c).collect()
    };
    let ax = op(x);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if norm2(&r) <= target {
        return 0;
    }
    let mut z = pre.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_it {
        let ap = op(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= target {
            return it;
        }
        z = pre.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    max_it
}

fn augmented_lagrangian(
    kkt: &KKTSystem,
    cc: &CompressedConstraints,
    opts: &SolverOptions,
) -> (Vec<f64>, Vec<f64>, usize, bool) {
    let n = kkt.primal_dim();
    let m = kkt.c.block_shape().1;
    // ρ is relative: the penalty term starts balanced against A, so the same
    // value behaves alike across refinement levels.
    let tr_a: f64 = (0..n).map(|i| kkt.a.get(i, i)).sum();
    let tr_c: f64 = cc.rows.iter().map(|c| c.norm_squared()).sum();
    let scale = if tr_a > 0.0 && tr_c > 0.0 { tr_a / tr_c } else { 1.0 };
    let mut rho = opts.rho * scale;
    let d = cc.rhs_vec();
    let mut u = vec![0.0; n];
    let mut lambda = vec![0.0; cc.rank()];
    let rhs_norm = (norm2(&kkt.rhs_primal).powi(2) + norm2(&d).powi(2)).sqrt().max(f64::MIN_POSITIVE);
    let mut pre = match BlockJacobi::new(&kkt.a, cc, rho, m) {
        Ok(p) => p,
        Err(_) => return (u, lambda, 0, false),
    };
    let inner_max = 20 * n.max(10);
    let mut best = (f64::INFINITY, u.clone(), lambda.clone());
    let mut prev_feas = f64::INFINITY;
    for it in 1..=opts.max_it {
        // (A + ρ CᵀC) u = b − Cᵀλ + ρ Cᵀd
        let shift: Vec<f64> = lambda.iter().zip(&d).map(|(l, dv)| rho * dv - l).collect();
        let ct = cc.tr_mul_vec(&shift);
        let rhs: Vec<f64> = kkt.rhs_primal.iter().zip(&ct).map(|(b, c)| b + c).collect();
        pcg(kkt, cc, rho, &pre, &rhs, &mut u, 0.01 * opts.tol * rhs_norm, inner_max);
        let cu = cc.mul_vec(&u);
        for ((l, c), dv) in lambda.iter_mut().zip(&cu).zip(&d) {
            *l += rho * (c - dv);
        }
        let au = kkt.a.mul_vec(&u);
        let ctl = cc.tr_mul_vec(&lambda);
        let r1: f64 = au
            .iter()
            .zip(&ctl)
            .zip(&kkt.rhs_primal)
            .map(|((a, c), b)| (a + c - b).powi(2))
            .sum();
        let feas: f64 = cu.iter().zip(&d).map(|(c, dv)| (c - dv).powi(2)).sum::<f64>().sqrt();
        let res = (r1 + feas * feas).sqrt() / rhs_norm;
        if res < best.0 {
            best = (res, u.clone(), lambda.clone());
        }
        if res <= opts.tol {
            return (u, lambda, it, true);
        }
        // slow multiplier convergence: stiffen the penalty
        if feas > 0.25 * prev_feas && rho < 1e4 * opts.rho * scale {
            if let Ok(p) = BlockJacobi::new(&kkt.a, cc, 10.0 * rho, m) {
                rho *= 10.0;
                pre = p;
            }
        }
        prev_feas = feas;
    }
    (best.1, best.2, opts.max_it, false)
}
