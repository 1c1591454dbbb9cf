//! Rank-one recovery of beam covariances from an optimal relaxed solution.
//!
//! For each information receiver the dual matrix
//! `B_k = λI + Σ_j G_j (X_jk - η_j β_j I) G_j^H + Σ_{m≠k} δ_m H_m`
//! is formed; its null space `Υ_k` holds the part of `W_k` that can be
//! moved into the artificial noise without changing any constraint. The
//! remainder of `W_k` is rank one at an optimum.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::engine::{solve, SdpSolution, SolverSettings};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, select_columns, vec_norm, ComplexMatrix, HermitianMatrix};
use crate::metrics::{evaluate_policy, AllocationPolicy, PerformanceReport};
use crate::model::{build_sdp_with, BeamParam, NoiseParam, Parametrization};

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreSettings {
    /// Eigenvalues of `B_k` below `null_factor * tol_feas * λ_max(B_k)`
    /// count as zero.
    pub null_factor: f64,
    /// Solver tolerance the solution was computed with; also used for a
    /// fallback re-solve.
    pub solver: SolverSettings,
    /// A matrix is rank one when its second eigenvalue is at most this
    /// fraction of the first.
    pub rank_ratio: f64,
    /// Relative tolerance of the final feasibility check.
    pub feas_tol: f64,
    /// On failure of the direct construction, re-solve with the beam
    /// directions fixed to the dominant eigenvectors of `W_k`.
    pub fallback_resolve: bool,
}

impl Default for RestoreSettings {
    fn default() -> Self {
        Self {
            null_factor: 1e3,
            solver: SolverSettings::default(),
            rank_ratio: 1e-5,
            feas_tol: 1e-6,
            fallback_resolve: false,
        }
    }
}

/// What the construction found for one information receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamCertificate {
    pub rank_of_w: usize,
    pub b_matrix: HermitianMatrix,
    /// `Υ_k`, orthonormal columns.
    pub null_basis: ComplexMatrix,
    /// Weights and directions of the part moved into the noise.
    pub psi: Vec<f64>,
    pub phi: ComplexMatrix,
    pub f: f64,
    pub u: ComplexMatrix,
    /// `|W_k - Σ ψ φ φ^H - f u u^H|_F`.
    pub reconstruction_error: f64,
    /// `max |h_k^H φ| / |h_k|` over the columns of `Υ_k`.
    pub h_null_leak: f64,
    /// `max |u^H Υ_k|`.
    pub u_null_leak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankCertificate {
    pub beams: Vec<BeamCertificate>,
    /// The policy came from the fixed-direction re-solve.
    pub used_fallback: bool,
}

fn require_full(sol: &SdpSolution, params: &ScenarioParams) -> Result<()> {
    let d = &sol.duals;
    let n_tx = params.n_tx;
    let full = d.delta.len() == params.n_info
        && d.beta.len() == params.n_eh
        && d.x.len() == params.n_eh
        && d.x
            .iter()
            .all(|row| row.len() == params.n_info && row.iter().all(|x| x.dim() == params.n_rx))
        && d.z.iter().all(|z| z.dim() == n_tx)
        && sol.primal.w.len() == params.n_info;
    if full {
        Ok(())
    } else {
        Err(Error::InvalidSolution(
            "solution lacks the duals of the full relaxation".into(),
        ))
    }
}

/// `B_k` from the multipliers of `sol`.
pub fn build_b_matrix(
    k: usize,
    sol: &SdpSolution,
    channels: &ChannelRealization,
    params: &ScenarioParams,
) -> Result<HermitianMatrix> {
    channels.check_dims(params)?;
    require_full(sol, params)?;
    if k >= params.n_info {
        return Err(Error::DimError(format!("receiver index {k} out of range")));
    }
    let d = &sol.duals;
    let n = params.n_tx;
    let mut b = ComplexMatrix::identity(n, n) * Complex64::new(d.lambda, 0.0);
    for (j, g) in channels.g.iter().enumerate() {
        let inner = d.x[j][k].sub(&HermitianMatrix::identity(params.n_rx).scale(params.efficiency[j] * d.beta[j]));
        b += g * inner.as_matrix() * g.adjoint();
    }
    for (m, h) in channels.h.iter().enumerate() {
        if m != k {
            b += h * h.adjoint() * Complex64::new(d.delta[m], 0.0);
        }
    }
    Ok(HermitianMatrix::hermitian_part(&b))
}

/// Dominant eigenpair and the ratio of the second eigenvalue to the first.
fn dominant(m: &HermitianMatrix) -> Result<(f64, ComplexMatrix, f64)> {
    let (vals, vecs) = eig_hermitian(m)?;
    let n = vals.len();
    let top = vals[n - 1];
    let second = if n > 1 { vals[n - 2].max(0.0) } else { 0.0 };
    let ratio = if top > 0.0 { second / top } else { f64::INFINITY };
    Ok((top, vecs.columns(n - 1, 1).into_owned(), ratio))
}

fn certify_beam(
    k: usize,
    sol: &SdpSolution,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &RestoreSettings,
) -> Result<BeamCertificate> {
    let w = &sol.primal.w[k];
    let b = build_b_matrix(k, sol, channels, params)?;
    let (b_vals, b_vecs) = eig_hermitian(&b)?;
    let b_max = b_vals.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = settings.null_factor * settings.solver.tol_feas * b_max;
    let keep: Vec<usize> = (0..b_vals.len()).filter(|&i| b_vals[i] <= cutoff).collect();
    let null_basis = select_columns(&b_vecs, &keep);

    let (w_vals, _) = eig_hermitian(w)?;
    let w_top = w_vals.last().copied().unwrap_or(0.0);
    if !(w_top > 0.0) {
        return Err(Error::RestorationFailure(format!("beam covariance {} is zero", k + 1)));
    }
    let rank_of_w = w_vals.iter().filter(|&&v| v > settings.rank_ratio * w_top).count();

    // Part of W_k orthogonal to the null space of B_k.
    let n = params.n_tx;
    let proj = ComplexMatrix::identity(n, n) - &null_basis * null_basis.adjoint();
    let kept = if rank_of_w <= 1 {
        w.clone()
    } else {
        HermitianMatrix::hermitian_part(&(&proj * w.as_matrix() * &proj))
    };
    let (f, u, ratio) = dominant(&kept)?;
    if ratio > settings.rank_ratio {
        return Err(Error::RestorationFailure(format!(
            "beam {}: component outside the null space of B has eigenvalue ratio {ratio:.3e}",
            k + 1
        )));
    }
    let moved = w.sub(&HermitianMatrix::outer(&u).scale(f));
    let (m_vals, m_vecs) = eig_hermitian(&moved)?;
    let scale = w_top;
    let pos: Vec<usize> = (0..m_vals.len())
        .filter(|&i| m_vals[i] > settings.rank_ratio * scale)
        .collect();
    let psi: Vec<f64> = pos.iter().map(|&i| m_vals[i]).collect();
    let phi = select_columns(&m_vecs, &pos);
    let mut recon = HermitianMatrix::outer(&u).scale(f);
    for (c, &p) in psi.iter().enumerate() {
        recon = recon.add(&HermitianMatrix::outer(&phi.columns(c, 1).into_owned()).scale(p));
    }
    let reconstruction_error = w.sub(&recon).frobenius();

    let h = &channels.h[k];
    let h_norm = vec_norm(h);
    let h_null_leak = (0..null_basis.ncols())
        .map(|c| (h.adjoint() * null_basis.column(c))[(0, 0)].norm() / h_norm)
        .fold(0.0, f64::max);
    let u_null_leak = if null_basis.ncols() == 0 {
        0.0
    } else {
        (u.adjoint() * &null_basis).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    };
    Ok(BeamCertificate {
        rank_of_w,
        b_matrix: b,
        null_basis,
        psi,
        phi,
        f,
        u,
        reconstruction_error,
        h_null_leak,
        u_null_leak,
    })
}

/// Checks the relaxed constraints for a rank-one policy, relative to the
/// size of each constraint's terms, and the harvesting target.
pub fn check_policy(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    policy: &AllocationPolicy,
    tau_target: f64,
    tol: f64,
) -> Result<PerformanceReport> {
    let report = evaluate_policy(channels, params, policy)?;
    let sigma2 = params.noise_power;
    let cov = policy.covariance();
    let total = cov.total();
    for (k, h) in channels.h.iter().enumerate() {
        let signal = cov.w[k].quad_form(h);
        let interference = total.sub(&cov.w[k]).quad_form(h);
        let need = params.sinr_req[k] * (interference + sigma2);
        if signal < need - tol * (signal + need) {
            return Err(Error::RestorationFailure(format!(
                "receiver {} SINR {:.6e} below requirement {:.6e}",
                k + 1,
                report.sinr[k],
                params.sinr_req[k]
            )));
        }
    }
    let excess = report.max_c2_excess(&params.cap_limit);
    if excess > tol {
        return Err(Error::RestorationFailure(format!(
            "eavesdropper capacity exceeds its limit by {excess:.3e}"
        )));
    }
    if policy.total_power() > params.p_max * (1.0 + tol) {
        return Err(Error::RestorationFailure(format!(
            "total power {:.6e} exceeds budget {:.6e}",
            policy.total_power(),
            params.p_max
        )));
    }
    let v_min = policy.noise_cov.min_eigenvalue();
    if v_min < -tol * (sigma2 + policy.noise_cov.max_eigenvalue().max(0.0)) {
        return Err(Error::RestorationFailure(format!(
            "noise covariance has eigenvalue {v_min:.3e}"
        )));
    }
    if report.min_harvested_w < tau_target * (1.0 - tol) {
        return Err(Error::RestorationFailure(format!(
            "harvested power {:.6e} below target {:.6e}",
            report.min_harvested_w, tau_target
        )));
    }
    Ok(report)
}

/// Builds a rank-one policy with the same objective as the optimal
/// relaxed solution `sol`.
pub fn restore_rank_one(
    sol: &SdpSolution,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &RestoreSettings,
) -> Result<(AllocationPolicy, RankCertificate)> {
    if !sol.is_optimal() {
        return Err(Error::InvalidSolution(format!(
            "solution status is {}",
            sol.status.as_str()
        )));
    }
    require_full(sol, params)?;
    match direct(sol, channels, params, settings) {
        Ok(out) => Ok(out),
        Err(e) if settings.fallback_resolve => fixed_direction_resolve(sol, channels, params, settings).map_err(|_| e),
        Err(e) => Err(e),
    }
}

fn direct(
    sol: &SdpSolution,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &RestoreSettings,
) -> Result<(AllocationPolicy, RankCertificate)> {
    let mut beams = Vec::with_capacity(params.n_info);
    let mut certs = Vec::with_capacity(params.n_info);
    let mut v = sol.primal.v.clone();
    for k in 0..params.n_info {
        let cert = certify_beam(k, sol, channels, params, settings)?;
        let beam = &cert.u * Complex64::new(cert.f.sqrt(), 0.0);
        v = v.add(&sol.primal.w[k].sub(&HermitianMatrix::outer(&beam)));
        beams.push(beam);
        certs.push(cert);
    }
    let policy = AllocationPolicy {
        beams,
        noise_cov: v,
        objective_tau: sol.primal.tau,
    };
    check_policy(channels, params, &policy, sol.primal.tau, settings.feas_tol)?;
    Ok((
        policy,
        RankCertificate {
            beams: certs,
            used_fallback: false,
        },
    ))
}

fn fixed_direction_resolve(
    sol: &SdpSolution,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &RestoreSettings,
) -> Result<(AllocationPolicy, RankCertificate)> {
    let mut dirs = Vec::with_capacity(params.n_info);
    for w in &sol.primal.w {
        dirs.push(dominant(w)?.1);
    }
    let param = Parametrization {
        beams: dirs.iter().cloned().map(BeamParam::FixedDirection).collect(),
        noise: NoiseParam::Full,
    };
    let problem = build_sdp_with(channels, params, &param)?;
    let resolved = solve(&problem, &settings.solver);
    if !resolved.is_optimal() {
        return Err(Error::RestorationFailure(format!(
            "fixed-direction re-solve ended with status {}",
            resolved.status.as_str()
        )));
    }
    let mut beams = Vec::with_capacity(params.n_info);
    let mut certs = Vec::with_capacity(params.n_info);
    for (k, d) in dirs.into_iter().enumerate() {
        let p = resolved.primal.w[k].trace().max(0.0);
        beams.push(&d * Complex64::new(p.sqrt(), 0.0));
        certs.push(BeamCertificate {
            rank_of_w: 1,
            b_matrix: build_b_matrix(k, sol, channels, params)?,
            null_basis: ComplexMatrix::zeros(params.n_tx, 0),
            psi: Vec::new(),
            phi: ComplexMatrix::zeros(params.n_tx, 0),
            f: p,
            u: d,
            reconstruction_error: 0.0,
            h_null_leak: 0.0,
            u_null_leak: 0.0,
        });
    }
    let policy = AllocationPolicy {
        beams,
        noise_cov: resolved.primal.v.clone(),
        objective_tau: resolved.primal.tau,
    };
    check_policy(channels, params, &policy, resolved.primal.tau, settings.feas_tol)?;
    Ok((
        policy,
        RankCertificate {
            beams: certs,
            used_fallback: true,
        },
    ))
}
