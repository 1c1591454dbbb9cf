//! Monte Carlo sweeps over SINR targets and antenna counts.
//!
//! Every trial draws one realization from a seed derived from the master
//! seed and the trial index, so a record depends only on
//! `(config, gamma, n_tx, trial)`. The same trial seed is reused at every
//! grid point, which keeps receiver placements common across points.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{baseline1_solve, baseline2_solve, BaselineSettings};
use crate::channel::{draw_realization, watts_to_dbm, ChannelRealization, ScenarioParams};
pub use crate::config::Scheme;
use crate::config::SweepConfig;
use crate::engine::SolverSettings;
use crate::error::{Error, Result};
use crate::hermitian::vec_norm;
use crate::metrics::{evaluate_covariance, evaluate_policy, PerformanceReport};
use crate::pipeline::{solve_realization, PipelineOutput};
use crate::restore::RestoreSettings;

/// Eavesdropper capacity excess above which a C2 violation is flagged.
pub const C2_VIOLATION_TOL: f64 = 1e-6;

pub const CSV_HEADER: [&str; 12] = [
    "trial",
    "seed",
    "gamma_req_db",
    "n_tx",
    "scheme",
    "status",
    "min_harvested_dbm",
    "mean_secrecy_bps_hz",
    "infeasible_flag",
    "c2_violation_flag",
    "solve_iters",
    "wall_ms",
];

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce5_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under master seed `master`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master ^ trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Infeasible,
    SolverFailure,
    RestorationFailure,
    DegenerateNullSpace,
    Error,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::SolverFailure => "solver_failure",
            TrialStatus::RestorationFailure => "restoration_failure",
            TrialStatus::DegenerateNullSpace => "degenerate_null_space",
            TrialStatus::Error => "error",
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::Infeasible => TrialStatus::Infeasible,
            Error::SolverFailure(_) | Error::NumericalError(_) => TrialStatus::SolverFailure,
            Error::RestorationFailure(_) | Error::InvalidSolution(_) => TrialStatus::RestorationFailure,
            Error::DegenerateNullSpace(_) => TrialStatus::DegenerateNullSpace,
            _ => TrialStatus::Error,
        }
    }
}

/// Result of one scheme on one realization. Metrics are present only for
/// status `Ok`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub status: TrialStatus,
    pub objective_tau: Option<f64>,
    pub min_harvested_w: Option<f64>,
    pub mean_secrecy: Option<f64>,
    pub secrecy: Vec<f64>,
    pub sinr: Vec<f64>,
    pub c2_violation: bool,
    /// Largest eavesdropper capacity above its limit (bit/s/Hz).
    pub c2_excess: f64,
    pub solve_iters: usize,
    pub wall_ms: f64,
    pub message: Option<String>,
}

impl SchemeOutcome {
    fn failed(scheme: Scheme, err: &Error, solve_iters: usize) -> Self {
        Self {
            scheme,
            status: TrialStatus::of_error(err),
            objective_tau: None,
            min_harvested_w: None,
            mean_secrecy: None,
            secrecy: Vec::new(),
            sinr: Vec::new(),
            c2_violation: false,
            c2_excess: 0.0,
            solve_iters,
            wall_ms: 0.0,
            message: Some(err.to_string()),
        }
    }

    fn solved(scheme: Scheme, tau: f64, report: PerformanceReport, cap_limit: &[Vec<f64>], solve_iters: usize) -> Self {
        let excess = report.max_c2_excess(cap_limit);
        Self {
            scheme,
            status: TrialStatus::Ok,
            objective_tau: Some(tau),
            min_harvested_w: Some(report.min_harvested_w),
            mean_secrecy: Some(report.mean_secrecy()),
            c2_violation: excess > C2_VIOLATION_TOL,
            c2_excess: excess.max(0.0),
            secrecy: report.secrecy_cap,
            sinr: report.sinr,
            solve_iters,
            wall_ms: 0.0,
            message: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub gamma_db: f64,
    pub n_tx: usize,
    pub outcomes: Vec<SchemeOutcome>,
}

impl TrialRecord {
    pub fn outcome(&self, scheme: Scheme) -> Option<&SchemeOutcome> {
        self.outcomes.iter().find(|o| o.scheme == scheme)
    }

    pub fn all_ok(&self) -> bool {
        self.outcomes.iter().all(SchemeOutcome::is_ok)
    }
}

/// Solver settings for every scheme.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemeSettings {
    pub solver: SolverSettings,
    pub restore: RestoreSettings,
    pub baselines: BaselineSettings,
    pub prefilter: bool,
}

impl SchemeSettings {
    pub fn from_sweep(config: &SweepConfig) -> Self {
        Self {
            solver: config.solver.clone(),
            restore: config.restore.clone(),
            baselines: config.baselines.clone(),
            prefilter: config.prefilter,
        }
    }
}

/// True when some information receiver misses its SINR target even with
/// the whole budget on its own channel and no interference.
pub fn certainly_infeasible(channels: &ChannelRealization, params: &ScenarioParams) -> bool {
    channels.h.iter().zip(&params.sinr_req).any(|(h, &gamma)| {
        let best = params.p_max * vec_norm(h).powi(2) / params.noise_power;
        best < gamma * (1.0 - 1e-9)
    })
}

/// Runs one scheme on one realization.
pub fn run_scheme(
    scheme: Scheme,
    channels: &ChannelRealization,
    params: &ScenarioParams,
    settings: &SchemeSettings,
) -> SchemeOutcome {
    if settings.prefilter && certainly_infeasible(channels, params) {
        return SchemeOutcome::failed(scheme, &Error::Infeasible, 0);
    }
    match scheme {
        Scheme::Optimal => run_optimal(channels, params, settings),
        Scheme::Baseline1 => match baseline1_solve(channels, params, &settings.baselines) {
            Ok(res) => match evaluate_covariance(channels, params, &res.covariance()) {
                Ok(rep) => SchemeOutcome::solved(scheme, res.objective_tau, rep, &params.cap_limit, res.iterations),
                Err(e) => SchemeOutcome::failed(scheme, &e, res.iterations),
            },
            Err(e) => SchemeOutcome::failed(scheme, &e, 0),
        },
        Scheme::Baseline2 => match baseline2_solve(channels, params, &settings.baselines) {
            Ok(res) => {
                let report = res
                    .policy()
                    .ok_or_else(|| Error::InvalidSolution("zero-forcing result carries no beams".into()))
                    .and_then(|p| evaluate_policy(channels, params, &p));
                match report {
                    Ok(rep) => SchemeOutcome::solved(scheme, res.objective_tau, rep, &params.cap_limit, res.iterations),
                    Err(e) => SchemeOutcome::failed(scheme, &e, res.iterations),
                }
            }
            Err(e) => SchemeOutcome::failed(scheme, &e, 0),
        },
    }
}

fn run_optimal(channels: &ChannelRealization, params: &ScenarioParams, settings: &SchemeSettings) -> SchemeOutcome {
    match solve_realization(channels, params, &settings.solver, &settings.restore) {
        Ok(PipelineOutput {
            solution,
            policy: Some((policy, _)),
            report: Some(rep),
            ..
        }) => SchemeOutcome::solved(
            Scheme::Optimal,
            policy.objective_tau,
            rep,
            &params.cap_limit,
            solution.iterations,
        ),
        Ok(out) => {
            let e = out.failure.unwrap_or_else(|| Error::SolverFailure("no policy".into()));
            SchemeOutcome::failed(Scheme::Optimal, &e, out.solution.iterations)
        }
        Err(e) => SchemeOutcome::failed(Scheme::Optimal, &e, 0),
    }
}

/// Runs every configured scheme on trial `trial` at one grid point.
pub fn run_trial(config: &SweepConfig, gamma_db: f64, n_tx: usize, trial: usize) -> TrialRecord {
    let seed = trial_seed(config.seed, trial);
    let params = config.base.with_n_tx(n_tx).with_sinr_db(gamma_db);
    let settings = SchemeSettings::from_sweep(config);
    let channels = match &config.channels {
        Some(ch) => Ok(ch.clone()),
        None => draw_realization(&params, seed),
    };
    let outcomes = config
        .schemes
        .iter()
        .map(|&scheme| match &channels {
            Ok(ch) => {
                let start = Instant::now();
                let mut out = run_scheme(scheme, ch, &params, &settings);
                out.wall_ms = start.elapsed().as_secs_f64() * 1e3;
                out
            }
            Err(e) => SchemeOutcome::failed(scheme, e, 0),
        })
        .collect();
    TrialRecord {
        trial,
        seed,
        gamma_db,
        n_tx,
        outcomes,
    }
}

/// Aggregate over the trials of one `(gamma, n_tx, scheme)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub gamma_db: f64,
    pub n_tx: usize,
    pub scheme: Scheme,
    pub n_trials: usize,
    /// Trials feasible for every compared scheme; the averages use these.
    pub n_included: usize,
    pub n_excluded: usize,
    pub mean_harvested_w: f64,
    pub se_harvested_w: f64,
    pub mean_harvested_dbm: f64,
    pub mean_secrecy: f64,
    pub se_secrecy: f64,
    pub infeasible_rate: f64,
    /// Fraction of this scheme's solved trials with an eavesdropping
    /// capacity above its limit.
    pub c2_violation_rate: f64,
    pub failure_count: usize,
}

/// Sample mean and standard error of the mean (zero for one sample).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Summarizes the records of one grid point. `records` must share
/// `gamma_db` and `n_tx`.
pub fn summarize_point(records: &[TrialRecord], schemes: &[Scheme]) -> Vec<PointSummary> {
    let (gamma_db, n_tx) = records.first().map_or((f64::NAN, 0), |r| (r.gamma_db, r.n_tx));
    let included: Vec<&TrialRecord> = records.iter().filter(|r| r.all_ok()).collect();
    schemes
        .iter()
        .map(|&scheme| {
            let pick = |f: fn(&SchemeOutcome) -> Option<f64>| -> Vec<f64> {
                included.iter().filter_map(|r| r.outcome(scheme).and_then(f)).collect()
            };
            let (mean_w, se_w) = mean_se(&pick(|o| o.min_harvested_w));
            let (mean_s, se_s) = mean_se(&pick(|o| o.mean_secrecy));
            let own: Vec<&SchemeOutcome> = records.iter().filter_map(|r| r.outcome(scheme)).collect();
            let infeasible = own.iter().filter(|o| o.status == TrialStatus::Infeasible).count();
            let solved: Vec<&&SchemeOutcome> = own.iter().filter(|o| o.is_ok()).collect();
            let violating = solved.iter().filter(|o| o.c2_violation).count();
            let n = records.len();
            PointSummary {
                gamma_db,
                n_tx,
                scheme,
                n_trials: n,
                n_included: included.len(),
                n_excluded: n - included.len(),
                mean_harvested_w: mean_w,
                se_harvested_w: se_w,
                mean_harvested_dbm: watts_to_dbm(mean_w),
                mean_secrecy: mean_s,
                se_secrecy: se_s,
                infeasible_rate: if n == 0 { f64::NAN } else { infeasible as f64 / n as f64 },
                c2_violation_rate: if solved.is_empty() {
                    0.0
                } else {
                    violating as f64 / solved.len() as f64
                },
                failure_count: own.len() - solved.len() - infeasible,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by `n_tx`, then `gamma_db`, then trial index.
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<PointSummary>,
}

impl SweepResult {
    /// True when no scheme solved any trial.
    pub fn all_failed(&self) -> bool {
        !self.records.iter().any(|r| r.outcomes.iter().any(SchemeOutcome::is_ok))
    }

    pub fn summary(&self, gamma_db: f64, n_tx: usize, scheme: Scheme) -> Option<&PointSummary> {
        self.summaries
            .iter()
            .find(|s| s.gamma_db == gamma_db && s.n_tx == n_tx && s.scheme == scheme)
    }
}

/// Runs the full grid. `progress` is called after every grid point with
/// the number of finished points and the total.
pub fn run_sweep_with(config: &SweepConfig, mut progress: impl FnMut(usize, usize)) -> Result<SweepResult> {
    config.validate()?;
    let total = config.ntx_set.len() * config.gamma_grid_db.len();
    let mut records = Vec::with_capacity(total * config.n_trials);
    let mut summaries = Vec::new();
    let mut done = 0;
    for &n_tx in &config.ntx_set {
        for &gamma in &config.gamma_grid_db {
            let point: Vec<TrialRecord> = (0..config.n_trials)
                .map(|t| run_trial(config, gamma, n_tx, t))
                .collect();
            summaries.extend(summarize_point(&point, &config.schemes));
            records.extend(point);
            done += 1;
            progress(done, total);
        }
    }
    Ok(SweepResult { records, summaries })
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(config, |_, _| {})
}

fn opt_field(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// One row per `(trial, scheme)` with the fixed column order.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        for o in &r.outcomes {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                format!("{}", r.gamma_db),
                r.n_tx.to_string(),
                o.scheme.as_str().to_string(),
                o.status.as_str().to_string(),
                opt_field(o.min_harvested_w.map(watts_to_dbm)),
                opt_field(o.mean_secrecy),
                u8::from(o.status == TrialStatus::Infeasible).to_string(),
                u8::from(o.c2_violation).to_string(),
                o.solve_iters.to_string(),
                format!("{:.3}", o.wall_ms),
            ])
            .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("cannot write CSV: {e}")))
}

/// One row per `(gamma, n_tx, scheme)`.
pub fn write_summary_csv<W: Write>(summaries: &[PointSummary], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "gamma_req_db",
        "n_tx",
        "scheme",
        "n_trials",
        "n_included",
        "n_excluded",
        "mean_min_harvested_w",
        "se_min_harvested_w",
        "mean_min_harvested_dbm",
        "mean_secrecy_bps_hz",
        "se_secrecy_bps_hz",
        "infeasible_rate",
        "c2_violation_rate",
        "failures",
    ])
    .map_err(io)?;
    for s in summaries {
        w.write_record([
            format!("{}", s.gamma_db),
            s.n_tx.to_string(),
            s.scheme.as_str().to_string(),
            s.n_trials.to_string(),
            s.n_included.to_string(),
            s.n_excluded.to_string(),
            format!("{}", s.mean_harvested_w),
            format!("{}", s.se_harvested_w),
            format!("{}", s.mean_harvested_dbm),
            format!("{}", s.mean_secrecy),
            format!("{}", s.se_secrecy),
            format!("{}", s.infeasible_rate),
            format!("{}", s.c2_violation_rate),
            s.failure_count.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("cannot write CSV: {e}")))
}

/// Writes the configured CSV outputs, if any.
pub fn write_outputs(config: &SweepConfig, result: &SweepResult) -> Result<()> {
    let create = |p: &Path| {
        std::fs::File::create(p).map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", p.display())))
    };
    if let Some(p) = &config.csv_path {
        write_trials_csv(&result.records, create(p)?)?;
    }
    if let Some(p) = &config.summary_path {
        write_summary_csv(&result.summaries, create(p)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::scalar_instance;

    fn scalar_config(schemes: Vec<Scheme>) -> SweepConfig {
        let (ch, params) = scalar_instance();
        let mut cfg = SweepConfig::new(params, vec![0.0], vec![1], 1, 7);
        cfg.channels = Some(ch);
        cfg.schemes = schemes;
        cfg
    }

    #[test]
    fn scalar_optimal_trial_harvests_two_watts() {
        let cfg = scalar_config(vec![Scheme::Optimal]);
        let rec = run_trial(&cfg, 0.0, 1, 0);
        let o = rec.outcome(Scheme::Optimal).unwrap();
        assert_eq!(o.status, TrialStatus::Ok, "{:?}", o.message);
        assert!((o.min_harvested_w.unwrap() - 2.0).abs() < 1e-6 * 2.0);
        assert!(!o.c2_violation);
    }

    #[test]
    fn infeasible_instance_is_recorded() {
        for prefilter in [true, false] {
            let mut cfg = scalar_config(vec![Scheme::Optimal]);
            cfg.prefilter = prefilter;
            let rec = run_trial(&cfg, 10.0, 1, 0);
            let o = rec.outcome(Scheme::Optimal).unwrap();
            assert_eq!(o.status, TrialStatus::Infeasible);
            assert!(o.min_harvested_w.is_none() && o.mean_secrecy.is_none());
        }
    }

    #[test]
    fn prefilter_bound_is_exact_on_scalar_channel() {
        let (ch, params) = scalar_instance();
        assert!(!certainly_infeasible(
            &ch,
            &params.with_sinr_db(crate::channel::linear_to_db(4.0))
        ));
        assert!(certainly_infeasible(
            &ch,
            &params.with_sinr_db(crate::channel::linear_to_db(4.01))
        ));
    }

    #[test]
    fn trials_are_deterministic_apart_from_timing() {
        let base = ScenarioParams::reference_setup(4, 2, 1, 0.0);
        let cfg = SweepConfig::new(base, vec![0.0], vec![4], 2, 11);
        let strip = |mut r: TrialRecord| {
            r.outcomes.iter_mut().for_each(|o| o.wall_ms = 0.0);
            r
        };
        for t in 0..2 {
            let a = strip(run_trial(&cfg, 0.0, 4, t));
            let b = strip(run_trial(&cfg, 0.0, 4, t));
            assert_eq!(a, b);
            assert_eq!(a.outcomes.len(), 3);
        }
    }

    #[test]
    fn single_trial_aggregate_equals_trial() {
        let cfg = scalar_config(vec![Scheme::Optimal]);
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.records.len(), 1);
        let o = res.records[0].outcome(Scheme::Optimal).unwrap();
        let s = res.summary(0.0, 1, Scheme::Optimal).unwrap();
        assert_eq!(s.n_included, 1);
        assert_eq!(s.mean_harvested_w, o.min_harvested_w.unwrap());
        assert_eq!(s.mean_secrecy, o.mean_secrecy.unwrap());
        assert_eq!(s.se_harvested_w, 0.0);
        assert!(!res.all_failed());
    }

    fn synthetic(trial: usize, w: Option<f64>) -> TrialRecord {
        let mut o = SchemeOutcome::failed(Scheme::Optimal, &Error::Infeasible, 0);
        if let Some(w) = w {
            o.status = TrialStatus::Ok;
            o.min_harvested_w = Some(w);
            o.mean_secrecy = Some(0.5);
        }
        TrialRecord {
            trial,
            seed: trial as u64,
            gamma_db: 5.0,
            n_tx: 6,
            outcomes: vec![o],
        }
    }

    #[test]
    fn constant_records_average_to_constant() {
        let records: Vec<_> = (0..10).map(|t| synthetic(t, Some(0.125))).collect();
        let s = &summarize_point(&records, &[Scheme::Optimal])[0];
        assert!((s.mean_harvested_w - 0.125).abs() < 1e-15);
        assert!(s.se_harvested_w.abs() < 1e-15);
        assert!((s.mean_harvested_dbm - watts_to_dbm(0.125)).abs() < 1e-12);
        assert!((s.mean_secrecy - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infeasible_trials_are_excluded_and_counted() {
        let records = vec![synthetic(0, Some(1.0)), synthetic(1, None), synthetic(2, Some(3.0))];
        let s = &summarize_point(&records, &[Scheme::Optimal])[0];
        assert_eq!((s.n_included, s.n_excluded), (2, 1));
        assert!((s.mean_harvested_w - 2.0).abs() < 1e-15);
        assert!((s.infeasible_rate - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exclusion_is_symmetric_across_schemes() {
        let mut a = synthetic(0, Some(1.0));
        let mut b1 = SchemeOutcome::failed(Scheme::Baseline1, &Error::Infeasible, 0);
        b1.scheme = Scheme::Baseline1;
        a.outcomes.push(b1);
        let b = synthetic(1, Some(3.0));
        let mut b = b;
        let mut ok = b.outcomes[0].clone();
        ok.scheme = Scheme::Baseline1;
        b.outcomes.push(ok);
        let s = summarize_point(&[a, b], &[Scheme::Optimal, Scheme::Baseline1]);
        assert_eq!(s[0].n_included, 1);
        assert_eq!(s[0].mean_harvested_w, 3.0);
        assert_eq!(s[1].mean_harvested_w, 3.0);
        assert_eq!(s[1].infeasible_rate, 0.5);
    }

    #[test]
    fn csv_has_fixed_columns_and_one_row_per_scheme() {
        let base = ScenarioParams::reference_setup(4, 2, 1, 0.0);
        let mut cfg = SweepConfig::new(base, vec![0.0, 40.0], vec![4], 1, 3);
        cfg.schemes = vec![Scheme::Optimal, Scheme::Baseline2];
        let res = run_sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&res.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.len() == 12));
        let high: Vec<_> = rows.iter().filter(|r| r[2] == "40").collect();
        assert!(high
            .iter()
            .all(|r| r[5] == "infeasible" && r[8] == "1" && r[6].is_empty()));
        let mut buf = Vec::new();
        write_summary_csv(&res.summaries, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn seeds_differ_between_trials() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| trial_seed(5, t)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(5, 0), trial_seed(6, 0));
    }
}
