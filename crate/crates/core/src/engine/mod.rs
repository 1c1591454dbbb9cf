//! Interior-point solver for [`SdpProblem`] instances.
//!
//! Hermitian blocks are mapped to real symmetric blocks of twice the
//! dimension (`H = A + iB ↦ [[A, -B], [B, A]]`, coefficients halved so
//! traces agree), the real program is equilibrated and solved by
//! [`ipm`], and the result is mapped back by averaging the two real
//! copies.

mod ipm;
pub mod kkt;

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::hermitian::{from_real_embedding, real_embedding, HermitianMatrix};
use crate::model::{BlockKind, BlockRole, ConstraintFamily, SdpProblem};

pub use kkt::{kkt_residuals, KktReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            max_iters: 200,
            step_fraction: 0.98,
            verbose: false,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.tol_gap > 0.0) || !(self.tol_feas > 0.0) || self.max_iters == 0 {
            return Err(crate::Error::InvalidConfig(
                "solver tolerances and iteration limit must be positive".into(),
            ));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(crate::Error::InvalidConfig("step_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
    IterLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
            SolveStatus::IterLimit => "iter_limit",
        }
    }
}

/// One line of the iteration log, objectives in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub tau: f64,
    pub kappa: f64,
}

/// Primal point in physical terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub w: Vec<HermitianMatrix>,
    pub v: HermitianMatrix,
    pub tau: f64,
}

/// Lagrange multipliers under the names used for the relaxed program.
///
/// `x[j][k]`, `y` and `z[k]` are the dual matrices of the decision
/// blocks, so under restricted parametrizations they live in the reduced
/// block space.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVariables {
    /// SINR rows, `δ_k >= 0`.
    pub delta: Vec<f64>,
    /// Power budget, `λ >= 0`.
    pub lambda: f64,
    /// Harvesting rows, `β_j >= 0`.
    pub beta: Vec<f64>,
    /// Secrecy matrix inequalities, `X_{j,k} ⪰ 0`.
    pub x: Vec<Vec<HermitianMatrix>>,
    /// Noise covariance cone, `Y ⪰ 0`.
    pub y: HermitianMatrix,
    /// Beam covariance cones, `Z_k ⪰ 0`.
    pub z: Vec<HermitianMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Primal value of every decision block.
    pub blocks: Vec<HermitianMatrix>,
    /// Dual slack of every decision block.
    pub dual_blocks: Vec<HermitianMatrix>,
    /// Multiplier of every equality row.
    pub multipliers: Vec<f64>,
    pub primal: PrimalPoint,
    pub duals: DualVariables,
    /// `τ` at the returned point.
    pub objective: f64,
    /// Dual bound on `τ` (maximization form).
    pub dual_objective: f64,
    pub gap: f64,
    pub feas_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterationLog>,
}

impl SdpSolution {
    /// Assembles a solution from raw block values and row multipliers
    /// (used for hand-built points and for re-checking saved solutions).
    pub fn from_parts(
        problem: &SdpProblem,
        status: SolveStatus,
        blocks: Vec<HermitianMatrix>,
        dual_blocks: Vec<HermitianMatrix>,
        multipliers: Vec<f64>,
    ) -> Self {
        let primal = PrimalPoint {
            w: (0..problem.n_info)
                .map(|k| problem.beam_covariance(k, &blocks))
                .collect(),
            v: problem.noise_covariance(&blocks),
            tau: problem.tau(&blocks),
        };
        let duals = dual_variables(problem, &dual_blocks, &multipliers);
        let objective = problem.objective_value(&blocks);
        let dual_objective = problem
            .constraints
            .iter()
            .zip(&multipliers)
            .map(|(c, y)| -c.rhs * y)
            .sum::<f64>();
        let feas_residual = problem
            .residuals(&blocks)
            .iter()
            .zip(&problem.constraints)
            .map(|(r, c)| r.abs() / (1.0 + c.rhs.abs()))
            .fold(0.0, f64::max);
        Self {
            status,
            gap: (dual_objective - objective).abs(),
            blocks,
            dual_blocks,
            multipliers,
            primal,
            duals,
            objective,
            dual_objective,
            feas_residual,
            iterations: 0,
            history: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

fn dual_variables(problem: &SdpProblem, dual_blocks: &[HermitianMatrix], y: &[f64]) -> DualVariables {
    let mut delta = vec![0.0; problem.n_info];
    let mut beta = vec![0.0; problem.n_eh];
    let mut lambda = 0.0;
    for (c, &yi) in problem.constraints.iter().zip(y) {
        match c.family {
            ConstraintFamily::Sinr(k) => delta[k] = yi,
            ConstraintFamily::Harvest(j) => beta[j] = yi,
            ConstraintFamily::Power => lambda = -yi,
            ConstraintFamily::Secrecy { .. } => {}
        }
    }
    let x = (0..problem.n_eh)
        .map(|j| {
            (0..problem.n_info)
                .map(|k| {
                    problem
                        .find_block(BlockRole::SecrecySlack { j, k })
                        .map(|b| dual_blocks[b].clone())
                        .unwrap_or_else(|| HermitianMatrix::zeros(problem.n_rx))
                })
                .collect()
        })
        .collect();
    DualVariables {
        delta,
        lambda,
        beta,
        x,
        y: dual_blocks[problem.noise_block()].clone(),
        z: (0..problem.n_info)
            .map(|k| dual_blocks[problem.beam_block(k)].clone())
            .collect(),
    }
}

fn embedded(kind: BlockKind, dim: usize) -> bool {
    kind == BlockKind::Hermitian && dim >= 2
}

fn to_real(kind: BlockKind, a: &HermitianMatrix) -> DMatrix<f64> {
    if embedded(kind, a.dim()) {
        real_embedding(a) * 0.5
    } else {
        a.as_matrix().map(|z| z.re)
    }
}

fn to_real_problem(problem: &SdpProblem) -> ipm::RealSdp {
    let dims = problem
        .blocks
        .iter()
        .map(|b| if embedded(b.kind, b.dim) { 2 * b.dim } else { b.dim })
        .collect::<Vec<_>>();
    let rows = problem
        .constraints
        .iter()
        .map(|c| {
            c.terms
                .iter()
                .map(|(b, a)| (*b, to_real(problem.blocks[*b].kind, a)))
                .collect()
        })
        .collect();
    let b = DVector::from_iterator(problem.constraints.len(), problem.constraints.iter().map(|c| c.rhs));
    let mut c: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for (blk, coef) in &problem.objective {
        c[*blk] -= to_real(problem.blocks[*blk].kind, coef);
    }
    ipm::RealSdp { dims, rows, b, c }
}

/// Row and block scale factors from Ruiz-style equilibration of the
/// block-norm matrix `|A_ib|_F`, plus overall scalings of `b` and `c`.
struct Equilibration {
    row: Vec<f64>,
    block: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
}

fn equilibrate(p: &ipm::RealSdp) -> (ipm::RealSdp, Equilibration) {
    let norms: Vec<Vec<(usize, f64)>> = p
        .rows
        .iter()
        .map(|row| row.iter().map(|(b, a)| (*b, a.norm())).collect())
        .collect();
    let mut row = vec![1.0; p.rows.len()];
    let mut block = vec![1.0; p.dims.len()];
    for _ in 0..25 {
        for (i, entries) in norms.iter().enumerate() {
            let m = entries.iter().map(|&(b, n)| row[i] * block[b] * n).fold(0.0, f64::max);
            if m > 0.0 {
                row[i] /= m.sqrt();
            }
        }
        let mut col_max = vec![0.0f64; p.dims.len()];
        for (i, entries) in norms.iter().enumerate() {
            for &(b, n) in entries {
                col_max[b] = col_max[b].max(row[i] * block[b] * n);
            }
        }
        for (b, m) in col_max.into_iter().enumerate() {
            if m > 0.0 {
                block[b] /= m.sqrt();
            }
        }
    }
    for v in row.iter_mut().chain(block.iter_mut()) {
        *v = v.clamp(1e-10, 1e10);
    }
    let rows: Vec<ipm::Row> = p
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|(b, a)| (*b, a * (row[i] * block[*b]))).collect())
        .collect();
    let b_row = DVector::from_iterator(p.b.len(), p.b.iter().zip(&row).map(|(v, r)| v * r));
    let c_blk: Vec<DMatrix<f64>> = p.c.iter().zip(&block).map(|(c, d)| c * *d).collect();
    let b_scale = b_row.amax().max(1e-12);
    let c_scale = c_blk.iter().map(|c| c.amax()).fold(0.0, f64::max).max(1e-12);
    let scaled = ipm::RealSdp {
        dims: p.dims.clone(),
        rows,
        b: b_row / b_scale,
        c: c_blk.into_iter().map(|c| c / c_scale).collect(),
    };
    (
        scaled,
        Equilibration {
            row,
            block,
            b_scale,
            c_scale,
        },
    )
}

/// Iteration table, one line per iteration plus the final status.
pub fn format_history(history: &[IterationLog], status: SolveStatus) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4} {:>14} {:>14} {:>10} {:>10} {:>10} {:>10}",
        "it", "tau", "dual", "gap", "pres", "dres", "mu"
    );
    for h in history {
        let _ = writeln!(
            s,
            "{:>4} {:>14.7e} {:>14.7e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            h.iteration, h.primal_objective, h.dual_objective, h.gap, h.primal_residual, h.dual_residual, h.mu
        );
    }
    let _ = writeln!(s, "status: {}", status.as_str());
    s
}

/// Solves the relaxed program.
pub fn solve(problem: &SdpProblem, settings: &SolverSettings) -> SdpSolution {
    let real = to_real_problem(problem);
    let (scaled, eq) = equilibrate(&real);
    let scale = ipm::ObjectiveScale {
        factor: eq.b_scale * eq.c_scale,
    };
    let out = ipm::solve(&scaled, settings, &scale);
    if settings.verbose {
        let _ = std::io::stderr()
            .lock()
            .write_all(format_history(&out.history, out.status).as_bytes());
    }

    let blocks: Vec<HermitianMatrix> = out
        .x
        .iter()
        .enumerate()
        .map(|(b, x)| {
            let x = x * (eq.block[b] * eq.b_scale);
            if embedded(problem.blocks[b].kind, problem.blocks[b].dim) {
                from_real_embedding(&x)
            } else {
                HermitianMatrix::hermitian_part(&x.map(|v| num_complex::Complex64::new(v, 0.0)))
            }
        })
        .collect();
    let dual_blocks: Vec<HermitianMatrix> = out
        .s
        .iter()
        .enumerate()
        .map(|(b, s)| {
            let s = s * (eq.c_scale / eq.block[b]);
            if embedded(problem.blocks[b].kind, problem.blocks[b].dim) {
                from_real_embedding(&s).scale(2.0)
            } else {
                HermitianMatrix::hermitian_part(&s.map(|v| num_complex::Complex64::new(v, 0.0)))
            }
        })
        .collect();
    let multipliers: Vec<f64> = out.y.iter().zip(&eq.row).map(|(y, r)| y * r * eq.c_scale).collect();
    let mut sol = SdpSolution::from_parts(problem, out.status, blocks, dual_blocks, multipliers);
    sol.iterations = out.iterations;
    sol.history = out.history;
    sol
}
