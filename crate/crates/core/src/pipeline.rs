//! Single-realization pipeline (model, solve, rank-one recovery,
//! metrics) and a JSON format for saving and re-checking its output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::config::{ChannelsConfig, ScenarioConfig};
use crate::engine::{kkt_residuals, solve, KktReport, SdpSolution, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianMatrix};
use crate::metrics::{AllocationPolicy, PerformanceReport};
use crate::model::{build_sdp, SdpProblem};
use crate::restore::{check_policy, restore_rank_one, RankCertificate, RestoreSettings};

/// Everything produced for one realization.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub problem: SdpProblem,
    pub solution: SdpSolution,
    /// Present when the solve was optimal and recovery succeeded.
    pub policy: Option<(AllocationPolicy, RankCertificate)>,
    pub report: Option<PerformanceReport>,
    /// Why `policy` is missing, if it is.
    pub failure: Option<Error>,
}

pub fn solve_realization(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    solver: &SolverSettings,
    restore: &RestoreSettings,
) -> Result<PipelineOutput> {
    let problem = build_sdp(channels, params)?;
    let solution = solve(&problem, solver);
    let mut out = PipelineOutput {
        problem,
        solution,
        policy: None,
        report: None,
        failure: None,
    };
    match out.solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            out.failure = Some(Error::Infeasible);
            return Ok(out);
        }
        s => {
            out.failure = Some(Error::SolverFailure(s.as_str().into()));
            return Ok(out);
        }
    }
    let restored = restore_rank_one(&out.solution, channels, params, restore).and_then(|(policy, cert)| {
        let report = check_policy(channels, params, &policy, out.solution.primal.tau, restore.feas_tol)?;
        Ok((policy, cert, report))
    });
    match restored {
        Ok((policy, cert, report)) => {
            out.policy = Some((policy, cert));
            out.report = Some(report);
        }
        Err(e) => out.failure = Some(e),
    }
    Ok(out)
}

/// Row-major complex matrix as `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidConfig("ragged matrix in solution file".into()));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn hermitian_from_json(rows: &MatrixJson) -> Result<HermitianMatrix> {
    HermitianMatrix::new(matrix_from_json(rows)?).map_err(|e| Error::InvalidConfig(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedPolicy {
    /// `beams[k]` is a column of `[re, im]` pairs.
    pub beams: Vec<Vec<[f64; 2]>>,
    pub noise_cov: MatrixJson,
    pub objective_tau: f64,
}

/// A solved realization as written by `solve --out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedSolution {
    pub scenario: ScenarioConfig,
    pub channels: ChannelsConfig,
    pub seed: Option<u64>,
    pub status: String,
    pub tau: f64,
    pub iterations: usize,
    pub blocks: Vec<MatrixJson>,
    pub dual_blocks: Vec<MatrixJson>,
    pub multipliers: Vec<f64>,
    pub policy: Option<SavedPolicy>,
}

impl SavedSolution {
    pub fn new(
        params: &ScenarioParams,
        channels: &ChannelRealization,
        seed: Option<u64>,
        out: &PipelineOutput,
    ) -> Self {
        let sol = &out.solution;
        Self {
            scenario: ScenarioConfig::from_params(params),
            channels: ChannelsConfig::from_realization(channels),
            seed,
            status: sol.status.as_str().into(),
            tau: sol.primal.tau,
            iterations: sol.iterations,
            blocks: sol.blocks.iter().map(|b| matrix_to_json(b.as_matrix())).collect(),
            dual_blocks: sol.dual_blocks.iter().map(|b| matrix_to_json(b.as_matrix())).collect(),
            multipliers: sol.multipliers.clone(),
            policy: out.policy.as_ref().map(|(p, _)| SavedPolicy {
                beams: p
                    .beams
                    .iter()
                    .map(|b| b.iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
                noise_cov: matrix_to_json(p.noise_cov.as_matrix()),
                objective_tau: p.objective_tau,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("bad solution file: {e}")))
    }

    fn status(&self) -> Result<SolveStatus> {
        [
            SolveStatus::Optimal,
            SolveStatus::Infeasible,
            SolveStatus::Unbounded,
            SolveStatus::NumericalFailure,
            SolveStatus::IterLimit,
        ]
        .into_iter()
        .find(|s| s.as_str() == self.status)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown status {:?}", self.status)))
    }

    fn policy(&self) -> Result<Option<AllocationPolicy>> {
        self.policy
            .as_ref()
            .map(|p| {
                Ok(AllocationPolicy {
                    beams: p
                        .beams
                        .iter()
                        .map(|b| ComplexMatrix::from_iterator(b.len(), 1, b.iter().map(|z| Complex64::new(z[0], z[1]))))
                        .collect(),
                    noise_cov: hermitian_from_json(&p.noise_cov)?,
                    objective_tau: p.objective_tau,
                })
            })
            .transpose()
    }
}

/// Tolerances applied by [`verify_saved`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckTolerances {
    /// Duality gap relative to `1 + |τ|`.
    pub gap: f64,
    /// Every other KKT residual (relative).
    pub residual: f64,
    /// Constraint check of the rank-one policy.
    pub policy: f64,
    /// Second-to-first eigenvalue ratio of each recovered beam covariance.
    pub rank_ratio: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            gap: 1e-7,
            residual: 1e-6,
            policy: 1e-6,
            rank_ratio: 1e-5,
        }
    }
}

/// Outcome of re-verifying a saved solution.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub status: SolveStatus,
    pub tau: f64,
    pub kkt: KktReport,
    /// Constraint check of the saved rank-one policy.
    pub policy: std::result::Result<PerformanceReport, String>,
    /// Independent re-run of the rank-one construction on the saved
    /// relaxed solution.
    pub certificate: std::result::Result<RankCertificate, String>,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rebuilds the problem from the saved scenario and channels and checks
/// optimality, feasibility of the policy and the rank-one certificate.
pub fn verify_saved(saved: &SavedSolution, tol: &CheckTolerances) -> Result<CheckReport> {
    let params = saved.scenario.to_params()?;
    let channels = saved.channels.to_realization()?;
    channels
        .check_dims(&params)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let problem = build_sdp(&channels, &params)?;
    let parse = |v: &[MatrixJson]| v.iter().map(hermitian_from_json).collect::<Result<Vec<_>>>();
    let blocks = parse(&saved.blocks)?;
    let dual_blocks = parse(&saved.dual_blocks)?;
    if blocks.len() != problem.blocks.len()
        || dual_blocks.len() != problem.blocks.len()
        || saved.multipliers.len() != problem.constraints.len()
        || blocks.iter().zip(&problem.blocks).any(|(b, s)| b.dim() != s.dim)
    {
        return Err(Error::InvalidConfig(
            "solution does not match the problem's block structure".into(),
        ));
    }
    let status = saved.status()?;
    let sol = SdpSolution::from_parts(&problem, status, blocks, dual_blocks, saved.multipliers.clone());
    let kkt = kkt_residuals(&problem, &channels, &params, &sol)?;

    let mut failures = Vec::new();
    if status != SolveStatus::Optimal {
        failures.push(format!("status is {}", status.as_str()));
    }
    if kkt.gap > tol.gap * (1.0 + sol.primal.tau.abs()) {
        failures.push(format!("duality gap {:.3e}", kkt.gap));
    }
    let residual = kkt
        .max_primal_rel()
        .max(kkt.primal_cone)
        .max(kkt.dual_cone)
        .max(kkt.max_stationarity())
        .max(kkt.complementarity_rel);
    if residual > tol.residual {
        failures.push(format!("KKT residual {residual:.3e}"));
    }

    let policy = match saved.policy()? {
        None => Err("no rank-one policy saved".to_string()),
        Some(p) => check_policy(&channels, &params, &p, sol.primal.tau, tol.policy).map_err(|e| e.to_string()),
    };
    if let Err(e) = &policy {
        failures.push(format!("policy: {e}"));
    }

    let restore = RestoreSettings {
        rank_ratio: tol.rank_ratio,
        feas_tol: tol.policy,
        ..RestoreSettings::default()
    };
    let certificate = restore_rank_one(&sol, &channels, &params, &restore)
        .map(|(_, c)| c)
        .map_err(|e| e.to_string());
    if let Err(e) = &certificate {
        failures.push(format!("rank-one certificate: {e}"));
    }
    Ok(CheckReport {
        status,
        tau: sol.primal.tau,
        kkt,
        policy,
        certificate,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, PathLossModel};
    use crate::fixtures::scalar_instance;

    fn run(ch: &ChannelRealization, p: &ScenarioParams) -> PipelineOutput {
        solve_realization(ch, p, &SolverSettings::default(), &RestoreSettings::default()).unwrap()
    }

    #[test]
    fn scalar_pipeline_reaches_closed_form() {
        let (ch, p) = scalar_instance();
        let out = run(&ch, &p);
        assert!(out.failure.is_none(), "{:?}", out.failure);
        let rep = out.report.unwrap();
        assert!((rep.min_harvested_w - 2.0).abs() < 2e-6);
    }

    #[test]
    fn saved_solution_round_trips_and_verifies() {
        let mut p = ScenarioParams::reference_setup(4, 2, 2, 0.0);
        p.pathloss = PathLossModel::Constant(1e-3);
        let ch = draw_realization(&p, 5).unwrap();
        let out = run(&ch, &p);
        assert!(out.failure.is_none(), "{:?}", out.failure);
        let saved = SavedSolution::new(&p, &ch, Some(5), &out);
        let back = SavedSolution::from_json(&saved.to_json()).unwrap();
        assert_eq!(back, saved);
        let rep = verify_saved(&back, &CheckTolerances::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn tampered_solution_fails_verification() {
        let (ch, p) = scalar_instance();
        let out = run(&ch, &p);
        let mut saved = SavedSolution::new(&p, &ch, None, &out);
        let tau_block = saved.blocks.len() - 1;
        saved.blocks[tau_block][0][0][0] *= 1.5;
        let rep = verify_saved(&saved, &CheckTolerances::default()).unwrap();
        assert!(!rep.passed());

        let mut saved = SavedSolution::new(&p, &ch, None, &out);
        saved.multipliers.pop();
        assert!(matches!(
            verify_saved(&saved, &CheckTolerances::default()),
            Err(Error::InvalidConfig(_))
        ));
        assert!(SavedSolution::from_json("{}").is_err());
    }
}
