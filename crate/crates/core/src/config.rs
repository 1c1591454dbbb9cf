//! TOML configuration files.
//!
//! Powers are given in dBm, rates in bit/s/Hz, ratios (SINR targets,
//! Rician factor, path loss, antenna gain) in dB. Every field has a
//! default, so an empty `[scenario]` table describes the reference setup.
//!
//! ```toml
//! [scenario]
//! n_tx = 8
//! sinr_req_db = 10          # one value for all receivers, or a list
//! rician_k_db = 3           # "inf" for pure line of sight
//!
//! [solver]
//! tol_gap = 1e-8
//!
//! [sweep]
//! gamma_db = [5, 10, 15, 20, 25, 30]
//! n_tx = [6, 8]
//! n_trials = 1000
//! seed = 2024
//! schemes = ["optimal", "baseline1", "baseline2"]
//! csv = "trials.csv"
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineSettings, NoiseShape};
use crate::channel::{
    db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, ChannelRealization, PathLossModel, ScenarioParams,
};
use crate::engine::SolverSettings;
use crate::error::{Error, Result};
use crate::hermitian::ComplexMatrix;
use crate::restore::RestoreSettings;

/// A scalar applied to every entry, or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn expand(&self, n: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            OneOrMany::One(v) => Ok(vec![*v; n]),
            OneOrMany::Many(v) if v.len() == n => Ok(v.clone()),
            OneOrMany::Many(v) => Err(Error::InvalidConfig(format!(
                "{what} has {} entries, expected {n}",
                v.len()
            ))),
        }
    }

    fn compress(values: &[f64]) -> Self {
        match values.first() {
            Some(&first) if values.iter().all(|&v| v == first) => OneOrMany::One(first),
            _ => OneOrMany::Many(values.to_vec()),
        }
    }
}

/// A scalar for every pair, or a `J x K` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrMatrix {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

/// A dB value or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DbOrInf {
    Db(f64),
    Text(String),
}

impl DbOrInf {
    fn linear(&self) -> Result<f64> {
        match self {
            DbOrInf::Db(v) => Ok(db_to_linear(*v)),
            DbOrInf::Text(s) if s.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            DbOrInf::Text(s) => Err(Error::InvalidConfig(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathLossKind {
    #[default]
    FreeSpace,
    Constant,
}

/// `[scenario]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_info: usize,
    pub n_eh: usize,
    pub noise_power_dbm: f64,
    pub p_max_dbm: f64,
    pub sinr_req_db: OneOrMany,
    pub cap_limit_bps_hz: ScalarOrMatrix,
    pub efficiency: OneOrMany,
    pub carrier_hz: f64,
    pub rician_k_db: DbOrInf,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub rx_gain_db: f64,
    pub pathloss: PathLossKind,
    /// Power gain in dB when `pathloss = "constant"` (usually negative).
    pub pathloss_gain_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_tx: 8,
            n_rx: 2,
            n_info: 3,
            n_eh: 2,
            noise_power_dbm: -23.0,
            p_max_dbm: 46.0,
            sinr_req_db: OneOrMany::One(10.0),
            cap_limit_bps_hz: ScalarOrMatrix::Scalar(1.0),
            efficiency: OneOrMany::One(0.5),
            carrier_hz: 915e6,
            rician_k_db: DbOrInf::Db(3.0),
            d_min_m: 2.0,
            d_max_m: 50.0,
            rx_gain_db: 6.0,
            pathloss: PathLossKind::FreeSpace,
            pathloss_gain_db: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn to_params(&self) -> Result<ScenarioParams> {
        let cap_limit = match &self.cap_limit_bps_hz {
            ScalarOrMatrix::Scalar(v) => vec![vec![*v; self.n_info]; self.n_eh],
            ScalarOrMatrix::Matrix(m) => m.clone(),
        };
        let params = ScenarioParams {
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            n_info: self.n_info,
            n_eh: self.n_eh,
            noise_power: dbm_to_watts(self.noise_power_dbm),
            p_max: dbm_to_watts(self.p_max_dbm),
            sinr_req: self
                .sinr_req_db
                .expand(self.n_info, "sinr_req_db")?
                .into_iter()
                .map(db_to_linear)
                .collect(),
            cap_limit,
            efficiency: self.efficiency.expand(self.n_eh, "efficiency")?,
            carrier_hz: self.carrier_hz,
            rician_k: self.rician_k_db.linear()?,
            d_min_m: self.d_min_m,
            d_max_m: self.d_max_m,
            rx_gain_db: self.rx_gain_db,
            pathloss: match self.pathloss {
                PathLossKind::FreeSpace => PathLossModel::FreeSpace,
                PathLossKind::Constant => PathLossModel::Constant(db_to_linear(self.pathloss_gain_db)),
            },
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_params(p: &ScenarioParams) -> Self {
        let (pathloss, pathloss_gain_db) = match p.pathloss {
            PathLossModel::FreeSpace => (PathLossKind::FreeSpace, 0.0),
            PathLossModel::Constant(g) => (PathLossKind::Constant, linear_to_db(g)),
        };
        Self {
            n_tx: p.n_tx,
            n_rx: p.n_rx,
            n_info: p.n_info,
            n_eh: p.n_eh,
            noise_power_dbm: watts_to_dbm(p.noise_power),
            p_max_dbm: watts_to_dbm(p.p_max),
            sinr_req_db: OneOrMany::compress(&p.sinr_req.iter().map(|&g| linear_to_db(g)).collect::<Vec<_>>()),
            cap_limit_bps_hz: ScalarOrMatrix::Matrix(p.cap_limit.clone()),
            efficiency: OneOrMany::compress(&p.efficiency),
            carrier_hz: p.carrier_hz,
            rician_k_db: if p.rician_k.is_infinite() {
                DbOrInf::Text("inf".into())
            } else {
                DbOrInf::Db(linear_to_db(p.rician_k))
            },
            d_min_m: p.d_min_m,
            d_max_m: p.d_max_m,
            rx_gain_db: p.rx_gain_db,
            pathloss,
            pathloss_gain_db,
        }
    }
}

/// `[solver]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    pub verbose: bool,
    /// Re-solve with fixed beam directions if rank-one recovery fails.
    pub restore_fallback: bool,
    /// `"isotropic"` or `"subspace"` artificial noise for baseline 1 and 2.
    pub baseline_noise: NoiseShapeConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseShapeConfig {
    #[default]
    Isotropic,
    Subspace,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            tol_gap: s.tol_gap,
            tol_feas: s.tol_feas,
            max_iters: s.max_iters,
            step_fraction: s.step_fraction,
            verbose: false,
            restore_fallback: false,
            baseline_noise: NoiseShapeConfig::Isotropic,
        }
    }
}

impl SolverConfig {
    pub fn solver(&self) -> Result<SolverSettings> {
        let s = SolverSettings {
            tol_gap: self.tol_gap,
            tol_feas: self.tol_feas,
            max_iters: self.max_iters,
            step_fraction: self.step_fraction,
            verbose: self.verbose,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn restore(&self) -> Result<RestoreSettings> {
        Ok(RestoreSettings {
            solver: self.solver()?,
            fallback_resolve: self.restore_fallback,
            ..RestoreSettings::default()
        })
    }

    pub fn baselines(&self) -> Result<BaselineSettings> {
        Ok(BaselineSettings {
            solver: self.solver()?,
            noise_shape: match self.baseline_noise {
                NoiseShapeConfig::Isotropic => NoiseShape::Isotropic,
                NoiseShapeConfig::Subspace => NoiseShape::Subspace,
            },
            ..BaselineSettings::default()
        })
    }
}

/// Schemes a sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Optimal,
    Baseline1,
    Baseline2,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Optimal => "optimal",
            Scheme::Baseline1 => "baseline1",
            Scheme::Baseline2 => "baseline2",
        }
    }
}

/// `[sweep]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub gamma_db: Vec<f64>,
    pub n_tx: Vec<usize>,
    pub n_trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// Skip the solver when a receiver cannot reach its SINR target even
    /// with the whole budget and no interference.
    pub prefilter: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            gamma_db: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            n_tx: vec![6, 8],
            n_trials: 1000,
            seed: 2024,
            schemes: vec![Scheme::Optimal, Scheme::Baseline1, Scheme::Baseline2],
            csv: None,
            summary: None,
            prefilter: true,
        }
    }
}

/// Explicit channels: `h[k][i] = [re, im]`, `g[j][i][r] = [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsConfig {
    pub h: Vec<Vec<[f64; 2]>>,
    pub g: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelsConfig {
    pub fn to_realization(&self) -> Result<ChannelRealization> {
        let c = |v: &[f64; 2]| Complex64::new(v[0], v[1]);
        let h = self
            .h
            .iter()
            .map(|col| ComplexMatrix::from_iterator(col.len(), 1, col.iter().map(c)))
            .collect();
        let g = self
            .g
            .iter()
            .map(|rows| {
                let n_rx = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != n_rx) {
                    return Err(Error::InvalidConfig("ragged energy receiver channel".into()));
                }
                Ok(ComplexMatrix::from_fn(rows.len(), n_rx, |i, r| c(&rows[i][r])))
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelRealization::from_channels(h, g).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_realization(ch: &ChannelRealization) -> Self {
        let pair = |z: &Complex64| [z.re, z.im];
        Self {
            h: ch.h.iter().map(|h| h.iter().map(pair).collect()).collect(),
            g: ch
                .g
                .iter()
                .map(|g| {
                    (0..g.nrows())
                        .map(|i| (0..g.ncols()).map(|r| pair(&g[(i, r)])).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// A whole configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub sweep: SweepSection,
    /// Fixed channels; when present no random draw takes place.
    pub channels: Option<ChannelsConfig>,
    /// Seed of the realization used by `solve`.
    pub seed: u64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn channels(&self) -> Result<Option<ChannelRealization>> {
        self.channels.as_ref().map(ChannelsConfig::to_realization).transpose()
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let s = &self.sweep;
        let cfg = SweepConfig {
            base: self.scenario.to_params()?,
            gamma_grid_db: s.gamma_db.clone(),
            ntx_set: s.n_tx.clone(),
            n_trials: s.n_trials,
            seed: s.seed,
            schemes: s.schemes.clone(),
            csv_path: s.csv.clone(),
            summary_path: s.summary.clone(),
            solver: self.solver.solver()?,
            restore: self.solver.restore()?,
            baselines: self.solver.baselines()?,
            channels: self.channels()?,
            prefilter: s.prefilter,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioParams,
    pub gamma_grid_db: Vec<f64>,
    pub ntx_set: Vec<usize>,
    pub n_trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub solver: SolverSettings,
    pub restore: RestoreSettings,
    pub baselines: BaselineSettings,
    pub channels: Option<ChannelRealization>,
    pub prefilter: bool,
}

impl SweepConfig {
    /// Sweep over the given grids with default settings.
    pub fn new(base: ScenarioParams, gamma_grid_db: Vec<f64>, ntx_set: Vec<usize>, n_trials: usize, seed: u64) -> Self {
        Self {
            base,
            gamma_grid_db,
            ntx_set,
            n_trials,
            seed,
            schemes: vec![Scheme::Optimal, Scheme::Baseline1, Scheme::Baseline2],
            csv_path: None,
            summary_path: None,
            solver: SolverSettings::default(),
            restore: RestoreSettings::default(),
            baselines: BaselineSettings::default(),
            channels: None,
            prefilter: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1");
        }
        if self.gamma_grid_db.is_empty() || self.ntx_set.is_empty() {
            return bad("gamma_db and n_tx grids must be non-empty");
        }
        if self.gamma_grid_db.iter().any(|g| !g.is_finite()) {
            return bad("gamma_db values must be finite");
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required");
        }
        for &n in &self.ntx_set {
            self.base.with_n_tx(n).validate()?;
        }
        if let Some(ch) = &self.channels {
            if self.ntx_set.iter().any(|&n| n != ch.n_tx()) {
                return bad("fixed channels require every n_tx to match their dimension");
            }
            ch.check_dims(&self.base.with_n_tx(ch.n_tx()))?;
        }
        self.solver.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference_setup() {
        let c = ConfigFile::parse("").unwrap();
        let p = c.scenario.to_params().unwrap();
        assert_eq!(p, ScenarioParams::reference_setup(8, 3, 2, 10.0));
        let s = c.sweep_config().unwrap();
        assert_eq!(s.gamma_grid_db, vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(s.ntx_set, vec![6, 8]);
    }

    #[test]
    fn units_are_converted() {
        let c = ConfigFile::parse(
            r#"
            [scenario]
            n_tx = 4
            n_info = 2
            n_eh = 1
            noise_power_dbm = 0
            p_max_dbm = 30
            sinr_req_db = [0, 10]
            cap_limit_bps_hz = [[1.5, 2.0]]
            rician_k_db = "inf"
            pathloss = "constant"
            pathloss_gain_db = -30
            "#,
        )
        .unwrap();
        let p = c.scenario.to_params().unwrap();
        assert!((p.noise_power - 1e-3).abs() < 1e-15);
        assert!((p.p_max - 1.0).abs() < 1e-12);
        assert!((p.sinr_req[1] - 10.0).abs() < 1e-12);
        assert_eq!(p.cap_limit, vec![vec![1.5, 2.0]]);
        assert!(p.rician_k.is_infinite());
        assert_eq!(p.pathloss, PathLossModel::Constant(1e-3));
        let back = ScenarioConfig::from_params(&p).to_params().unwrap();
        assert_eq!(back.n_tx, p.n_tx);
        assert!((back.p_max - p.p_max).abs() < 1e-12);
        assert!(back.rician_k.is_infinite());
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "[scenario]\nsinr_req_db = [1, 2]",
            "[scenario]\nrician_k_db = \"lots\"",
            "[scenario]\nunknown = 1",
            "[sweep]\nn_trials = 0",
            "[sweep]\ngamma_db = []",
            "[solver]\nstep_fraction = 1.5",
            "[scenario]\nn_tx = 1",
        ] {
            let r = ConfigFile::parse(text).and_then(|c| c.sweep_config().map(|_| ()));
            assert!(matches!(r, Err(Error::InvalidConfig(_))), "{text}: {r:?}");
        }
    }

    #[test]
    fn explicit_channels_round_trip() {
        let c = ConfigFile::parse(
            r#"
            [channels]
            h = [[[1.0, 0.0], [0.0, 1.0]]]
            g = [[[[0.5, 0.0]], [[0.0, -0.5]]]]
            "#,
        )
        .unwrap();
        let ch = c.channels().unwrap().unwrap();
        assert_eq!(ch.n_tx(), 2);
        assert_eq!(ch.g[0][(1, 0)], Complex64::new(0.0, -0.5));
        assert_eq!(ChannelsConfig::from_realization(&ch), c.channels.unwrap());
    }
}
