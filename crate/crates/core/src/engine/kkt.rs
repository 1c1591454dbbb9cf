//! Optimality residuals of a candidate primal-dual pair.

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::error::Result;
use crate::hermitian::HermitianMatrix;
use crate::model::SdpProblem;

use super::SdpSolution;

/// Worst violation within one constraint family of the original
/// (inequality) program, measured at the physical point.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResidual {
    pub family: &'static str,
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `sinr`, `secrecy`, `power`, `harvest`, in that order.
    pub primal: Vec<FamilyResidual>,
    /// Largest `-λ_min` over the primal blocks (0 when all are PSD).
    pub primal_cone: f64,
    /// Largest `-λ_min` over the dual slack blocks.
    pub dual_cone: f64,
    /// Relative norm of `C_b - Σ y_i A_ib - S_b` per block (minimization
    /// form, `C = -objective`).
    pub stationarity: Vec<(String, f64)>,
    /// `Σ_b Tr(X_b S_b)`.
    pub complementarity: f64,
    pub complementarity_rel: f64,
    pub gap: f64,
    pub gap_rel: f64,
}

impl KktReport {
    pub fn family(&self, name: &str) -> Option<&FamilyResidual> {
        self.primal.iter().find(|f| f.family == name)
    }

    pub fn max_primal_rel(&self) -> f64 {
        self.primal.iter().map(|f| f.rel).fold(0.0, f64::max)
    }

    pub fn max_stationarity(&self) -> f64 {
        self.stationarity.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Largest relative residual of any kind.
    pub fn worst(&self) -> f64 {
        [
            self.max_primal_rel(),
            self.primal_cone,
            self.dual_cone,
            self.max_stationarity(),
            self.complementarity_rel,
            self.gap_rel,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Residuals of `sol` for `problem`. `channels` and `params` must be the
/// ones the problem was built from.
pub fn kkt_residuals(
    problem: &SdpProblem,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    sol: &SdpSolution,
) -> Result<KktReport> {
    channels.check_dims(params)?;
    let w = &sol.primal.w;
    let v = &sol.primal.v;
    let tau = sol.primal.tau;
    let sigma2 = params.noise_power;
    let total = w.iter().fold(v.clone(), |acc, wk| acc.add(wk));

    let mut sinr = (0.0f64, 0.0f64);
    for (k, h) in channels.h.iter().enumerate() {
        let interference = total.sub(&w[k]).quad_form(h);
        let signal = w[k].quad_form(h) / params.sinr_req[k];
        let viol = (sigma2 - signal + interference).max(0.0);
        sinr = (sinr.0.max(viol), sinr.1.max(viol / (sigma2 + signal + interference)));
    }
    let mut secrecy = (0.0f64, 0.0f64);
    for (j, g) in channels.g.iter().enumerate() {
        let q = v
            .congruence(g)
            .add(&HermitianMatrix::identity(params.n_rx).scale(sigma2));
        for k in 0..params.n_info {
            let aq = q.scale(problem.alpha.alpha[j][k]);
            let m = aq.sub(&w[k].congruence(g));
            let viol = (-m.min_eigenvalue()).max(0.0);
            secrecy = (secrecy.0.max(viol), secrecy.1.max(viol / aq.frobenius().max(sigma2)));
        }
    }
    let power_viol = (total.trace() - params.p_max).max(0.0);
    let mut harvest = (0.0f64, 0.0f64);
    for (j, g) in channels.g.iter().enumerate() {
        let e = params.efficiency[j] * total.congruence(g).trace();
        let viol = (tau - e).max(0.0);
        harvest = (harvest.0.max(viol), harvest.1.max(viol / (1.0 + tau.abs())));
    }
    let primal = vec![
        FamilyResidual {
            family: "sinr",
            abs: sinr.0,
            rel: sinr.1,
        },
        FamilyResidual {
            family: "secrecy",
            abs: secrecy.0,
            rel: secrecy.1,
        },
        FamilyResidual {
            family: "power",
            abs: power_viol,
            rel: power_viol / params.p_max,
        },
        FamilyResidual {
            family: "harvest",
            abs: harvest.0,
            rel: harvest.1,
        },
    ];

    let primal_cone = sol.blocks.iter().map(|b| -b.min_eigenvalue()).fold(0.0, f64::max);
    let dual_cone = sol.dual_blocks.iter().map(|b| -b.min_eigenvalue()).fold(0.0, f64::max);

    let mut stationarity = Vec::with_capacity(problem.blocks.len());
    for (b, spec) in problem.blocks.iter().enumerate() {
        let mut r = HermitianMatrix::zeros(spec.dim);
        let mut scale = 1.0;
        for (blk, c) in &problem.objective {
            if *blk == b {
                r = r.sub(c);
                scale += c.frobenius();
            }
        }
        for (con, &y) in problem.constraints.iter().zip(&sol.multipliers) {
            if let Some(a) = con.coefficient(b) {
                r = r.sub(&a.scale(y));
                scale += y.abs() * a.frobenius();
            }
        }
        r = r.sub(&sol.dual_blocks[b]);
        stationarity.push((spec.label.clone(), r.frobenius() / scale));
    }

    let complementarity = sol
        .blocks
        .iter()
        .zip(&sol.dual_blocks)
        .map(|(x, s)| crate::hermitian::trace_inner(x, s))
        .sum::<Result<f64>>()?;
    let denom = 1.0 + sol.objective.abs();
    let gap = (sol.dual_objective - sol.objective).abs();
    Ok(KktReport {
        primal,
        primal_cone,
        dual_cone,
        stationarity,
        complementarity,
        complementarity_rel: complementarity.abs() / denom,
        gap,
        gap_rel: gap / denom,
    })
}
