//! Primal-dual interior-point method for real block-diagonal SDPs in
//! standard form
//!
//! ```text
//! minimize ⟨c, x⟩  subject to  A(x) = b,  x ⪰ 0
//! maximize bᵀy     subject to  Aᵀ(y) + s = c,  s ⪰ 0
//! ```
//!
//! The iteration runs on the homogeneous self-dual embedding
//! (`A(x) = bτ`, `Aᵀ(y) + s = cτ`, `bᵀy - ⟨c, x⟩ = κ`), so it needs no
//! feasible starting point and returns an infeasibility certificate when
//! one exists. Search directions use Nesterov-Todd scaling with a
//! Mehrotra predictor-corrector step.

use nalgebra::{DMatrix, DVector};

use super::{IterationLog, SolveStatus, SolverSettings};

pub(crate) type Blocks = Vec<DMatrix<f64>>;

/// One constraint row: `(block, A_ib)` pairs for the blocks it touches.
pub(crate) type Row = Vec<(usize, DMatrix<f64>)>;

#[derive(Debug, Clone)]
pub(crate) struct RealSdp {
    pub dims: Vec<usize>,
    pub rows: Vec<Row>,
    pub b: DVector<f64>,
    pub c: Blocks,
}

#[derive(Debug, Clone)]
pub(crate) struct RealOutcome {
    pub status: SolveStatus,
    pub x: Blocks,
    pub y: DVector<f64>,
    pub s: Blocks,
    pub iterations: usize,
    pub history: Vec<IterationLog>,
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn blocks_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

fn blocks_norm(a: &Blocks) -> f64 {
    blocks_dot(a, a).sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl RealSdp {
    fn apply(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|(b, a)| dot(a, &x[*b])).sum::<f64>()),
        )
    }

    /// `Σ_b |⟨A_ib, X_b⟩|` per row: the size of the terms being summed,
    /// used to judge each row's residual on its own scale.
    fn term_magnitudes(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|(b, a)| dot(a, &x[*b]).abs()).sum::<f64>()),
        )
    }

    fn apply_adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for (b, a) in row {
                out[*b] += a * y[i];
            }
        }
        out
    }

    fn zeros(&self) -> Blocks {
        self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect()
    }

    fn identity(&self) -> Blocks {
        self.dims.iter().map(|&n| DMatrix::identity(n, n)).collect()
    }

    fn degree(&self) -> f64 {
        self.dims.iter().sum::<usize>() as f64 + 1.0
    }
}

/// Nesterov-Todd scaling of one block: `R` with `R⁻¹ X R⁻ᵀ = Rᵀ S R = Λ`.
struct Scaling {
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.unpack();
    let ls = s.clone().cholesky()?.unpack();
    let svd = (ls.transpose() * &lx).svd(false, true);
    let v_t = svd.v_t?;
    let sigma = svd.singular_values;
    if sigma.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let inv_sqrt = DMatrix::from_diagonal(&sigma.map(|v| 1.0 / v.sqrt()));
    let sqrt = DMatrix::from_diagonal(&sigma.map(|v| v.sqrt()));
    let r = &lx * v_t.transpose() * &inv_sqrt;
    let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(x.nrows(), x.nrows()))?;
    let r_inv = sqrt * v_t * lx_inv;
    Some(Scaling {
        r,
        r_inv,
        lambda: sigma,
    })
}

/// Largest `α` with `Λ + α Δ ⪰ 0` (infinite if unbounded).
fn max_step(lambda: &DVector<f64>, delta: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = delta[(i, j)] / (lambda[i] * lambda[j]).sqrt();
        }
    }
    symmetrize(&mut m);
    let min = if n == 1 {
        m[(0, 0)]
    } else {
        m.symmetric_eigenvalues().min()
    };
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

/// Solution of the Lyapunov equation `Λ∘D = r` with diagonal `Λ`.
fn lyapunov_solve(lambda: &DVector<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (lambda[i] + lambda[j]))
}

fn jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let p = a * b;
    (&p + p.transpose()) * 0.5
}

struct Direction {
    dx: Blocks,
    ds: Blocks,
    dy: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Per-iteration data shared by the predictor and the corrector solve.
struct Newton<'a> {
    p: &'a RealSdp,
    scal: Vec<Scaling>,
    /// Scaled constraint matrices `Rᵀ A_ib R`, laid out like `p.rows`.
    a_s: Vec<Row>,
    c_s: Blocks,
    rd_s: Blocks,
    chol: MatrixSolver,
    q: DVector<f64>,
    a_c: DVector<f64>,
    c_norm2: f64,
    tau: f64,
    kappa: f64,
}

/// Solves `Ã Ãᵀ p = r` through the triangular factor of a QR
/// decomposition of `Ãᵀ` (semi-normal equations), refined against `Ã`
/// itself. Falls back to a shifted Cholesky factor of the product when
/// the triangular factor is singular.
struct MatrixSolver {
    at: DMatrix<f64>,
    factor: Factor,
}

enum Factor {
    Triangular(DMatrix<f64>),
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
}

impl MatrixSolver {
    fn new(at: DMatrix<f64>) -> Option<Self> {
        let r = at.clone().qr().r();
        let dmax = r.diagonal().amax();
        let factor = if dmax > 0.0 && r.diagonal().iter().all(|d| d.abs() > 1e-13 * dmax) {
            Factor::Triangular(r)
        } else {
            let mut m = at.transpose() * &at;
            let shift = 1e-14 * m.diagonal().amax().max(f64::MIN_POSITIVE);
            for i in 0..m.nrows() {
                m[(i, i)] += shift;
            }
            Factor::Cholesky(m.cholesky()?)
        };
        Some(Self { at, factor })
    }

    fn solve_once(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            Factor::Triangular(r) => {
                let z = r
                    .tr_solve_upper_triangular(rhs)
                    .unwrap_or_else(|| DVector::from_element(rhs.len(), f64::NAN));
                r.solve_upper_triangular(&z)
                    .unwrap_or_else(|| DVector::from_element(rhs.len(), f64::NAN))
            }
            Factor::Cholesky(c) => c.solve(rhs),
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_once(rhs);
        for _ in 0..2 {
            let r = rhs - self.at.tr_mul(&(&self.at * &x));
            x += self.solve_once(&r);
        }
        x
    }
}

impl<'a> Newton<'a> {
    fn scaled_apply(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.a_s.len(),
            self.a_s
                .iter()
                .map(|row| row.iter().map(|(b, a)| dot(a, &x[*b])).sum::<f64>()),
        )
    }

    fn scaled_adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out = self.p.zeros();
        for (i, row) in self.a_s.iter().enumerate() {
            for (b, a) in row {
                out[*b] += a * y[i];
            }
        }
        out
    }

    /// Solves the scaled Newton system for complementarity target `r_c`
    /// (per block) and `r_tau`, with residuals weighted by `eta`. One
    /// round of refinement removes the primal defect measured with the
    /// unscaled operator.
    fn direction(&self, eta: f64, rp: &DVector<f64>, rg: f64, rc: &[DMatrix<f64>], r_tau: f64) -> Direction {
        let d: Blocks = self
            .scal
            .iter()
            .zip(rc)
            .map(|(s, r)| lyapunov_solve(&s.lambda, r))
            .collect();
        let e: Blocks = d.iter().zip(&self.rd_s).map(|(d, r)| d + r * eta).collect();
        let mut dir = self.solve_system(&(rp * eta), &d, &e, eta * rg, r_tau, eta);
        for _ in 0..2 {
            let dx_true: Blocks = dir
                .dx
                .iter()
                .zip(&self.scal)
                .map(|(dx, sc)| &sc.r * dx * sc.r.transpose())
                .collect();
            let defect = self.p.apply(&dx_true) - &self.p.b * dir.dtau + rp * eta;
            let zero = self.p.zeros();
            let corr = self.solve_system(&defect, &zero, &zero, 0.0, 0.0, 0.0);
            for k in 0..dir.dx.len() {
                dir.dx[k] += &corr.dx[k];
                dir.ds[k] += &corr.ds[k];
            }
            dir.dy += &corr.dy;
            dir.dtau += corr.dtau;
            dir.dkappa += corr.dkappa;
        }
        dir
    }

    /// Linear solve behind [`Newton::direction`]: `p_rhs` is the primal
    /// right-hand side, `d` the complementarity part, `e = d + w_d·rd`.
    fn solve_system(
        &self,
        p_rhs: &DVector<f64>,
        d: &Blocks,
        e: &Blocks,
        g_rhs: f64,
        r_tau: f64,
        w_d: f64,
    ) -> Direction {
        let rhs = -p_rhs - self.scaled_apply(e);
        let pvec = self.chol.solve(&rhs);
        let a_minus_b = &self.a_c - &self.p.b;
        let num = -g_rhs - a_minus_b.dot(&pvec) - blocks_dot(&self.c_s, e) - r_tau / self.tau;
        let den = a_minus_b.dot(&self.q) - self.c_norm2 - self.kappa / self.tau;
        let dtau = num / den;
        let dy = &pvec + &self.q * dtau;
        let at_dy = self.scaled_adjoint(&dy);
        let ds: Blocks = self
            .rd_s
            .iter()
            .zip(&at_dy)
            .zip(&self.c_s)
            .map(|((r, a), c)| -(r * w_d) - a + c * dtau)
            .collect();
        let dx: Blocks = d.iter().zip(&ds).map(|(d, s)| d - s).collect();
        let dkappa = (r_tau - self.kappa * dtau) / self.tau;
        Direction {
            dx,
            ds,
            dy,
            dtau,
            dkappa,
        }
    }

    fn step_length(&self, dir: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for (k, s) in self.scal.iter().enumerate() {
            alpha = alpha.min(max_step(&s.lambda, &dir.dx[k]));
            alpha = alpha.min(max_step(&s.lambda, &dir.ds[k]));
        }
        if dir.dtau < 0.0 {
            alpha = alpha.min(-self.tau / dir.dtau);
        }
        if dir.dkappa < 0.0 {
            alpha = alpha.min(-self.kappa / dir.dkappa);
        }
        alpha
    }
}

/// Row-wise residual accepted when the strict target stalls at the
/// limit of double precision.
const ROW_TOL_FALLBACK: f64 = 1e-6;

/// Iterate kept in case later steps lose accuracy.
struct Snapshot {
    x: Blocks,
    y: DVector<f64>,
    s: Blocks,
    tau: f64,
    it: usize,
    prow: f64,
}

pub(crate) fn solve(p: &RealSdp, settings: &SolverSettings, scale: &ObjectiveScale) -> RealOutcome {
    let mut x = p.identity();
    let mut s = p.identity();
    let mut y = DVector::zeros(p.rows.len());
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let nu = p.degree();
    let b_norm = p.b.norm();
    let c_norm = blocks_norm(&p.c);
    let mut history = Vec::new();
    let mut best: Option<Snapshot> = None;

    let finish = |status, x: Blocks, y: DVector<f64>, s: Blocks, tau: f64, it, history| {
        let inv = if status == SolveStatus::Optimal { 1.0 / tau } else { 1.0 };
        RealOutcome {
            status,
            x: x.into_iter().map(|m| m * inv).collect(),
            y: y * inv,
            s: s.into_iter().map(|m| m * inv).collect(),
            iterations: it,
            history,
        }
    };

    for it in 0..=settings.max_iters {
        let ax = p.apply(&x);
        let rp = &ax - &p.b * tau;
        let aty = p.apply_adjoint(&y);
        let rd: Blocks = aty
            .iter()
            .zip(&s)
            .zip(&p.c)
            .map(|((a, s), c)| a + s - c * tau)
            .collect();
        let cx = blocks_dot(&p.c, &x);
        let by = p.b.dot(&y);
        let rg = cx - by + kappa;
        let mu = (blocks_dot(&x, &s) + tau * kappa) / nu;

        let pres = rp.norm() / tau / (1.0 + b_norm);
        let terms = p.term_magnitudes(&x);
        let prow = rp
            .iter()
            .zip(terms.iter().zip(p.b.iter()))
            .map(|(r, (t, b))| r.abs() / (t + b.abs() * tau).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let dres = blocks_norm(&rd) / tau / (1.0 + c_norm);
        let pobj = cx / tau;
        let dobj = by / tau;
        let gap = (pobj - dobj).abs();
        let gap_rel = gap / (1.0 + pobj.abs());
        let gap_orig = scale.factor * gap / (1.0 + (scale.factor * pobj).abs());
        history.push(IterationLog {
            iteration: it,
            primal_objective: -scale.factor * pobj,
            dual_objective: -scale.factor * dobj,
            gap: scale.factor * gap,
            primal_residual: pres.max(prow),
            dual_residual: dres,
            mu,
            tau,
            kappa,
        });

        let converged = pres <= settings.tol_feas
            && dres <= settings.tol_feas
            && gap_rel <= settings.tol_gap
            && gap_orig <= settings.tol_gap;
        if converged && prow <= ROW_TOL_FALLBACK && best.as_ref().is_none_or(|b: &Snapshot| prow < b.prow) {
            best = Some(Snapshot {
                x: x.clone(),
                y: y.clone(),
                s: s.clone(),
                tau,
                it,
                prow,
            });
        }
        if pres <= settings.tol_feas
            && prow <= settings.tol_feas
            && dres <= settings.tol_feas
            && gap_rel <= settings.tol_gap
            && gap_orig <= settings.tol_gap
        {
            return finish(SolveStatus::Optimal, x, y, s, tau, it, history);
        }
        // Infeasibility certificates from the homogeneous model.
        if by > 0.0 {
            let ray: Blocks = aty.iter().zip(&s).map(|(a, s)| a + s).collect();
            if blocks_norm(&ray) / by <= settings.tol_feas && tau <= 1e-3 * kappa.max(1.0) {
                return finish(SolveStatus::Infeasible, x, y, s, tau, it, history);
            }
        }
        if cx < 0.0 && ax.norm() / (-cx) <= settings.tol_feas && tau <= 1e-3 * kappa.max(1.0) {
            return finish(SolveStatus::Unbounded, x, y, s, tau, it, history);
        }
        if it == settings.max_iters {
            return match best {
                Some(b) => finish(SolveStatus::Optimal, b.x, b.y, b.s, b.tau, b.it, history),
                None => finish(SolveStatus::IterLimit, x, y, s, tau, it, history),
            };
        }

        let Some(scal) = x
            .iter()
            .zip(&s)
            .map(|(x, s)| nt_scaling(x, s))
            .collect::<Option<Vec<_>>>()
        else {
            return match best {
                Some(b) => finish(SolveStatus::Optimal, b.x, b.y, b.s, b.tau, b.it, history),
                None => finish(SolveStatus::NumericalFailure, x, y, s, tau, it, history),
            };
        };
        let a_s: Vec<Row> = p
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(b, a)| {
                        let r = &scal[*b].r;
                        (*b, r.transpose() * a * r)
                    })
                    .collect()
            })
            .collect();
        let c_s: Blocks =
            p.c.iter()
                .zip(&scal)
                .map(|(c, sc)| sc.r.transpose() * c * &sc.r)
                .collect();
        let rd_s: Blocks = rd
            .iter()
            .zip(&scal)
            .map(|(r, sc)| sc.r.transpose() * r * &sc.r)
            .collect();

        // Scaled operator as a dense matrix, one column per row of A.
        let m = p.rows.len();
        let offsets: Vec<usize> = p
            .dims
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n * n;
                Some(o)
            })
            .collect();
        let total = offsets.last().map_or(0, |o| o + p.dims.last().map_or(0, |n| n * n));
        let mut at = DMatrix::zeros(total, m);
        for (i, row) in a_s.iter().enumerate() {
            for (b, a) in row {
                at.view_mut((offsets[*b], i), (a.len(), 1))
                    .copy_from_slice(a.as_slice());
            }
        }
        let Some(chol) = MatrixSolver::new(at) else {
            return match best {
                Some(b) => finish(SolveStatus::Optimal, b.x, b.y, b.s, b.tau, b.it, history),
                None => finish(SolveStatus::NumericalFailure, x, y, s, tau, it, history),
            };
        };

        let mut newton = Newton {
            p,
            scal,
            a_s,
            c_s,
            rd_s,
            chol,
            q: DVector::zeros(m),
            a_c: DVector::zeros(m),
            c_norm2: 0.0,
            tau,
            kappa,
        };
        newton.a_c = newton.scaled_apply(&newton.c_s);
        newton.q = newton.chol.solve(&(&newton.a_c + &p.b));
        newton.c_norm2 = blocks_dot(&newton.c_s, &newton.c_s);

        // Predictor.
        let rc_aff: Vec<DMatrix<f64>> = newton
            .scal
            .iter()
            .map(|sc| -DMatrix::from_diagonal(&sc.lambda.map(|l| l * l)))
            .collect();
        let aff = newton.direction(1.0, &rp, rg, &rc_aff, -tau * kappa);
        let alpha_aff = newton.step_length(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let rc: Vec<DMatrix<f64>> = newton
            .scal
            .iter()
            .enumerate()
            .map(|(k, sc)| {
                let n = sc.lambda.len();
                let mut r = DMatrix::identity(n, n) * (sigma * mu) - DMatrix::from_diagonal(&sc.lambda.map(|l| l * l));
                r -= jordan(&aff.dx[k], &aff.ds[k]);
                r
            })
            .collect();
        let r_tau = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
        let dir = newton.direction(1.0 - sigma, &rp, rg, &rc, r_tau);
        let alpha = (settings.step_fraction * newton.step_length(&dir)).min(1.0);
        if !(alpha > 1e-12) {
            return match best {
                Some(b) => finish(SolveStatus::Optimal, b.x, b.y, b.s, b.tau, b.it, history),
                None => finish(SolveStatus::NumericalFailure, x, y, s, tau, it, history),
            };
        }

        for (k, sc) in newton.scal.iter().enumerate() {
            let dx = &sc.r * &dir.dx[k] * sc.r.transpose();
            let ds = sc.r_inv.transpose() * &dir.ds[k] * &sc.r_inv;
            x[k] += dx * alpha;
            s[k] += ds * alpha;
            symmetrize(&mut x[k]);
            symmetrize(&mut s[k]);
        }
        y += &dir.dy * alpha;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        if !(tau > 0.0) || !(kappa > 0.0) || y.iter().any(|v| !v.is_finite()) {
            return match best {
                Some(b) => finish(SolveStatus::Optimal, b.x, b.y, b.s, b.tau, b.it, history),
                None => finish(SolveStatus::NumericalFailure, x, y, s, tau, it + 1, history),
            };
        }
    }
    unreachable!("loop returns at max_iters")
}

/// Factor that converts the internal objective back to original units.
pub(crate) struct ObjectiveScale {
    pub factor: f64,
}
