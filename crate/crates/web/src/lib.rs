//! WebAssembly bindings for the browser demo. Every entry point takes
//! plain numbers and returns a JSON string.

use serde::Serialize;
use swipt_core::channel::{draw_realization, linear_to_db, watts_to_dbm, ScenarioParams};
use swipt_core::config::Scheme;
use swipt_core::engine::SolverSettings;
use swipt_core::harness::{mean_se, run_scheme, trial_seed, SchemeSettings, TrialStatus};
use swipt_core::hermitian::vec_norm;
use swipt_core::pipeline::solve_realization;
use swipt_core::restore::RestoreSettings;
use swipt_core::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest sizes the page accepts; keeps a single call interactive.
const MAX_ANTENNAS: usize = 12;
const MAX_RECEIVERS: usize = 4;
const MAX_TRIALS: usize = 200;

fn scenario(n_tx: usize, n_info: usize, n_eh: usize, gamma_db: f64) -> Result<ScenarioParams> {
    if n_tx > MAX_ANTENNAS || n_info > MAX_RECEIVERS || n_eh > MAX_RECEIVERS {
        return Err(Error::InvalidConfig(format!(
            "demo limits: at most {MAX_ANTENNAS} antennas and {MAX_RECEIVERS} receivers of each kind"
        )));
    }
    if !gamma_db.is_finite() {
        return Err(Error::InvalidConfig("SINR target must be finite".into()));
    }
    let p = ScenarioParams::reference_setup(n_tx, n_info, n_eh, gamma_db);
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Serialize)]
pub struct Realization {
    pub status: String,
    pub message: Option<String>,
    pub iterations: usize,
    pub distances_info_m: Vec<f64>,
    pub distances_eh_m: Vec<f64>,
    pub tau_dbm: Option<f64>,
    pub harvested_dbm: Vec<f64>,
    pub sinr_db: Vec<f64>,
    pub secrecy_bps_hz: Vec<f64>,
    pub beam_power_w: Vec<f64>,
    pub noise_power_w: Option<f64>,
}

/// Draws one realization of the reference setup and solves it.
pub fn solve_one(n_tx: usize, n_info: usize, n_eh: usize, gamma_db: f64, seed: u64) -> Result<Realization> {
    let params = scenario(n_tx, n_info, n_eh, gamma_db)?;
    let channels = draw_realization(&params, seed)?;
    let out = solve_realization(
        &channels,
        &params,
        &SolverSettings::default(),
        &RestoreSettings::default(),
    )?;
    let mut r = Realization {
        status: out.solution.status.as_str().into(),
        message: out.failure.as_ref().map(ToString::to_string),
        iterations: out.solution.iterations,
        distances_info_m: channels.distances_info.clone(),
        distances_eh_m: channels.distances_eh.clone(),
        tau_dbm: None,
        harvested_dbm: Vec::new(),
        sinr_db: Vec::new(),
        secrecy_bps_hz: Vec::new(),
        beam_power_w: Vec::new(),
        noise_power_w: None,
    };
    if let (Some((policy, _)), Some(rep)) = (&out.policy, &out.report) {
        r.tau_dbm = Some(watts_to_dbm(policy.objective_tau));
        r.harvested_dbm = rep.harvested_w.iter().map(|&w| watts_to_dbm(w)).collect();
        r.sinr_db = rep.sinr.iter().map(|&s| linear_to_db(s)).collect();
        r.secrecy_bps_hz = rep.secrecy_cap.clone();
        r.beam_power_w = policy.beams.iter().map(|b| vec_norm(b).powi(2)).collect();
        r.noise_power_w = Some(policy.noise_cov.trace());
    }
    Ok(r)
}

#[derive(Debug, Serialize)]
pub struct SchemeRow {
    pub scheme: &'static str,
    pub status: &'static str,
    pub min_harvested_dbm: Option<f64>,
    pub mean_secrecy_bps_hz: Option<f64>,
    pub c2_violation: bool,
}

/// Runs the optimal scheme and both baselines on the same realization.
pub fn compare(n_tx: usize, n_info: usize, n_eh: usize, gamma_db: f64, seed: u64) -> Result<Vec<SchemeRow>> {
    let params = scenario(n_tx, n_info, n_eh, gamma_db)?;
    let channels = draw_realization(&params, seed)?;
    let settings = SchemeSettings {
        prefilter: true,
        ..SchemeSettings::default()
    };
    Ok([Scheme::Optimal, Scheme::Baseline1, Scheme::Baseline2]
        .into_iter()
        .map(|s| {
            let o = run_scheme(s, &channels, &params, &settings);
            SchemeRow {
                scheme: s.as_str(),
                status: o.status.as_str(),
                min_harvested_dbm: o.min_harvested_w.map(watts_to_dbm),
                mean_secrecy_bps_hz: o.mean_secrecy,
                c2_violation: o.c2_violation,
            }
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub gamma_db: f64,
    pub feasible: usize,
    pub trials: usize,
    /// Mean of the minimum harvested power over feasible trials.
    pub mean_harvested_dbm: Option<f64>,
    pub mean_secrecy_bps_hz: Option<f64>,
}

/// Average optimal-scheme performance over `trials` realizations per
/// SINR target.
pub fn curve(
    n_tx: usize,
    n_info: usize,
    n_eh: usize,
    gammas_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(Error::InvalidConfig(format!("trials must lie in 1..={MAX_TRIALS}")));
    }
    let settings = SchemeSettings {
        prefilter: true,
        ..SchemeSettings::default()
    };
    gammas_db
        .iter()
        .map(|&g| {
            let params = scenario(n_tx, n_info, n_eh, g)?;
            let mut harvested = Vec::new();
            let mut secrecy = Vec::new();
            for t in 0..trials {
                let channels = draw_realization(&params, trial_seed(seed, t))?;
                let o = run_scheme(Scheme::Optimal, &channels, &params, &settings);
                if o.status == TrialStatus::Ok {
                    harvested.extend(o.min_harvested_w);
                    secrecy.extend(o.mean_secrecy);
                }
            }
            let some = |v: &[f64]| (!v.is_empty()).then(|| mean_se(v).0);
            Ok(CurvePoint {
                gamma_db: g,
                feasible: harvested.len(),
                trials,
                mean_harvested_dbm: some(&harvested).map(watts_to_dbm),
                mean_secrecy_bps_hz: some(&secrecy),
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())))
}

#[wasm_bindgen(js_name = solveRealization)]
pub fn solve_realization_js(
    n_tx: usize,
    n_info: usize,
    n_eh: usize,
    gamma_db: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(solve_one(n_tx, n_info, n_eh, gamma_db, seed.into()))
}

#[wasm_bindgen(js_name = compareSchemes)]
pub fn compare_schemes_js(
    n_tx: usize,
    n_info: usize,
    n_eh: usize,
    gamma_db: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(compare(n_tx, n_info, n_eh, gamma_db, seed.into()))
}

#[wasm_bindgen(js_name = harvestCurve)]
pub fn harvest_curve_js(
    n_tx: usize,
    n_info: usize,
    n_eh: usize,
    gammas_db: Vec<f64>,
    trials: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(curve(n_tx, n_info, n_eh, &gammas_db, trials, seed.into()))
}
