//! Suboptimal reference schemes.
//!
//! Both confine the artificial noise to the null space of the stacked
//! information channels, so it never reaches an information receiver.
//! Scheme 1 keeps full beam covariances; scheme 2 fixes zero-forcing beam
//! directions and only optimizes powers.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::engine::{solve, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::hermitian::{orthogonal_complement, vec_norm, ComplexMatrix, HermitianMatrix};
use crate::metrics::{AllocationPolicy, TransmitCovariance};
use crate::model::{build_sdp_with, BeamParam, NoiseParam, Parametrization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineScheme {
    Baseline1,
    Baseline2,
}

/// Spatial shape of the artificial noise inside the null space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseShape {
    /// `V = p U U^H / (N_T - K)`, a single power.
    #[default]
    Isotropic,
    /// `V = U X U^H` with a free PSD `X`.
    Subspace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSettings {
    pub solver: SolverSettings,
    pub noise_shape: NoiseShape,
    /// Relative eigenvalue cutoff for null-space computations.
    pub null_tol: f64,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            noise_shape: NoiseShape::Isotropic,
            null_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub scheme: BaselineScheme,
    /// Beam covariances; rank one for scheme 2.
    pub w: Vec<HermitianMatrix>,
    /// Beamformers, scheme 2 only.
    pub beams: Option<Vec<ComplexMatrix>>,
    pub noise_cov: HermitianMatrix,
    pub objective_tau: f64,
    pub feasible: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Orthonormal basis of the null space of the information channels.
    pub null_basis: ComplexMatrix,
}

impl BaselineResult {
    pub fn covariance(&self) -> TransmitCovariance {
        TransmitCovariance {
            w: self.w.clone(),
            v: self.noise_cov.clone(),
        }
    }

    /// Rank-one policy, available for scheme 2.
    pub fn policy(&self) -> Option<AllocationPolicy> {
        self.beams.as_ref().map(|b| AllocationPolicy {
            beams: b.clone(),
            noise_cov: self.noise_cov.clone(),
            objective_tau: self.objective_tau,
        })
    }
}

fn noise_basis(channels: &ChannelRealization, params: &ScenarioParams, tol: f64) -> Result<ComplexMatrix> {
    channels.check_dims(params)?;
    if params.n_tx <= params.n_info {
        return Err(Error::InvalidConfig(format!(
            "baseline schemes need n_tx > n_info, got {} and {}",
            params.n_tx, params.n_info
        )));
    }
    let u = orthogonal_complement(&channels.h, params.n_tx, tol)?;
    let want = params.n_tx - params.n_info;
    if u.ncols() != want {
        return Err(Error::DegenerateNullSpace(format!(
            "null space of the information channels has dimension {}, expected {want}",
            u.ncols()
        )));
    }
    Ok(u)
}

fn noise_param(u: &ComplexMatrix, shape: NoiseShape) -> NoiseParam {
    match shape {
        NoiseShape::Isotropic => NoiseParam::Isotropic(u.clone()),
        NoiseShape::Subspace => NoiseParam::Subspace(u.clone()),
    }
}

fn run(
    scheme: BaselineScheme,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &BaselineSettings,
    beams: Vec<BeamParam>,
    u: ComplexMatrix,
) -> Result<BaselineResult> {
    let param = Parametrization {
        beams: beams.clone(),
        noise: noise_param(&u, settings.noise_shape),
    };
    let problem = build_sdp_with(channels, params, &param)?;
    let sol = solve(&problem, &settings.solver);
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::Infeasible),
        other => return Err(Error::SolverFailure(other.as_str().into())),
    }
    let beam_vectors = match scheme {
        BaselineScheme::Baseline1 => None,
        BaselineScheme::Baseline2 => Some(
            beams
                .iter()
                .zip(&sol.primal.w)
                .map(|(b, w)| match b {
                    BeamParam::FixedDirection(d) => d * Complex64::new(w.trace().max(0.0).sqrt(), 0.0),
                    BeamParam::Full => unreachable!("scheme 2 uses fixed directions"),
                })
                .collect(),
        ),
    };
    Ok(BaselineResult {
        scheme,
        w: sol.primal.w,
        beams: beam_vectors,
        noise_cov: sol.primal.v,
        objective_tau: sol.primal.tau,
        feasible: true,
        status: sol.status,
        iterations: sol.iterations,
        null_basis: u,
    })
}

/// Full beam covariances, artificial noise in the null space of all
/// information channels.
pub fn baseline1_solve(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &BaselineSettings,
) -> Result<BaselineResult> {
    let u = noise_basis(channels, params, settings.null_tol)?;
    let beams = vec![BeamParam::Full; params.n_info];
    run(BaselineScheme::Baseline1, channels, params, settings, beams, u)
}

/// Unit zero-forcing direction for receiver `k`: `h_k` projected onto the
/// orthogonal complement of the other information channels.
pub fn zero_forcing_direction(channels: &ChannelRealization, k: usize, tol: f64) -> Result<ComplexMatrix> {
    let n = channels.n_tx();
    let h = &channels.h[k];
    let others: Vec<ComplexMatrix> = channels
        .h
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != k)
        .map(|(_, h)| h.clone())
        .collect();
    let projected = if others.is_empty() {
        h.clone()
    } else {
        let q = orthogonal_complement(&others, n, tol)?;
        if q.ncols() != n - others.len() {
            return Err(Error::DegenerateNullSpace(format!(
                "channels of the other receivers span {} dimensions, expected {}",
                n - q.ncols(),
                others.len()
            )));
        }
        &q * (q.adjoint() * h)
    };
    let norm = vec_norm(&projected);
    if !(norm > 1e-8 * vec_norm(h)) {
        return Err(Error::DegenerateNullSpace(format!(
            "channel {} lies in the span of the other information channels",
            k + 1
        )));
    }
    Ok(projected / Complex64::new(norm, 0.0))
}

/// Zero-forcing beam directions with optimized powers, same noise as
/// scheme 1.
pub fn baseline2_solve(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &BaselineSettings,
) -> Result<BaselineResult> {
    let u = noise_basis(channels, params, settings.null_tol)?;
    let beams = (0..params.n_info)
        .map(|k| zero_forcing_direction(channels, k, settings.null_tol).map(BeamParam::FixedDirection))
        .collect::<Result<Vec<_>>>()?;
    run(BaselineScheme::Baseline2, channels, params, settings, beams, u)
}
