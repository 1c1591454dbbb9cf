//! Scenario parameters and random channel draws: uniform receiver
//! placement, free-space path loss and Rician small-scale fading.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::ComplexMatrix;

/// Speed of light used by the path-loss model (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Large-scale attenuation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathLossModel {
    /// Friis free-space loss at the carrier frequency, minus the receive
    /// antenna gain.
    FreeSpace,
    /// Distance-independent linear power gain.
    Constant(f64),
}

/// System configuration in linear units (watts, linear ratios).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_info: usize,
    pub n_eh: usize,
    pub noise_power: f64,
    pub p_max: f64,
    /// Per information receiver, linear scale.
    pub sinr_req: Vec<f64>,
    /// `cap_limit[j][k]` in bit/s/Hz.
    pub cap_limit: Vec<Vec<f64>>,
    pub efficiency: Vec<f64>,
    pub carrier_hz: f64,
    /// Linear Rician K factor; `f64::INFINITY` means pure line of sight.
    pub rician_k: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub rx_gain_db: f64,
    pub pathloss: PathLossModel,
}

impl ScenarioParams {
    /// Reference setup: 915 MHz, 3 dB Rician factor, -23 dBm noise,
    /// 46 dBm budget, two-antenna energy receivers, 1 bit/s/Hz
    /// eavesdropping limit, 50% conversion efficiency, receivers between
    /// 2 m and 50 m.
    pub fn reference_setup(n_tx: usize, n_info: usize, n_eh: usize, sinr_req_db: f64) -> Self {
        Self {
            n_tx,
            n_rx: 2,
            n_info,
            n_eh,
            noise_power: dbm_to_watts(-23.0),
            p_max: dbm_to_watts(46.0),
            sinr_req: vec![db_to_linear(sinr_req_db); n_info],
            cap_limit: vec![vec![1.0; n_info]; n_eh],
            efficiency: vec![0.5; n_eh],
            carrier_hz: 915e6,
            rician_k: db_to_linear(3.0),
            d_min_m: 2.0,
            d_max_m: 50.0,
            rx_gain_db: 6.0,
            pathloss: PathLossModel::FreeSpace,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_rx < 1 || self.n_tx < self.n_rx {
            return bad(format!(
                "need n_tx >= n_rx >= 1, got n_tx={} n_rx={}",
                self.n_tx, self.n_rx
            ));
        }
        if self.n_info < 1 {
            return bad("need at least one information receiver".into());
        }
        if !(self.p_max > 0.0) || !(self.noise_power > 0.0) {
            return bad("p_max and noise_power must be positive".into());
        }
        if self.sinr_req.len() != self.n_info || self.sinr_req.iter().any(|&g| !(g > 0.0)) {
            return bad(format!("sinr_req must hold {} positive values", self.n_info));
        }
        if self.cap_limit.len() != self.n_eh
            || self
                .cap_limit
                .iter()
                .any(|row| row.len() != self.n_info || row.iter().any(|&r| !(r > 0.0)))
        {
            return bad(format!(
                "cap_limit must be a positive {}x{} matrix",
                self.n_eh, self.n_info
            ));
        }
        if self.efficiency.len() != self.n_eh || self.efficiency.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return bad(format!("efficiency must hold {} values in [0, 1]", self.n_eh));
        }
        if !(self.rician_k >= 0.0) {
            return bad("rician_k must be non-negative".into());
        }
        if !(self.d_min_m > 0.0) || !(self.d_min_m < self.d_max_m) {
            return bad("need 0 < d_min_m < d_max_m".into());
        }
        if !(self.carrier_hz > 0.0) {
            return bad("carrier_hz must be positive".into());
        }
        if let PathLossModel::Constant(g) = self.pathloss {
            if !(g > 0.0) {
                return bad("constant path gain must be positive".into());
            }
        }
        Ok(())
    }

    /// Same scenario with every SINR target set to `gamma_db`.
    pub fn with_sinr_db(&self, gamma_db: f64) -> Self {
        Self {
            sinr_req: vec![db_to_linear(gamma_db); self.n_info],
            ..self.clone()
        }
    }

    pub fn with_n_tx(&self, n_tx: usize) -> Self {
        Self { n_tx, ..self.clone() }
    }
}

/// One draw of all channels, path loss included.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `h[k]` is `n_tx x 1`.
    pub h: Vec<ComplexMatrix>,
    /// `g[j]` is `n_tx x n_rx`.
    pub g: Vec<ComplexMatrix>,
    pub distances_info: Vec<f64>,
    pub distances_eh: Vec<f64>,
}

impl ChannelRealization {
    /// Wraps explicit channels (distances recorded as NaN).
    pub fn from_channels(h: Vec<ComplexMatrix>, g: Vec<ComplexMatrix>) -> Result<Self> {
        let n_tx = h.first().or(g.first()).map(|m| m.nrows()).unwrap_or(0);
        for (k, hk) in h.iter().enumerate() {
            if hk.nrows() != n_tx || hk.ncols() != 1 {
                return Err(Error::DimError(format!("h[{k}] must be {n_tx}x1")));
            }
        }
        let n_rx = g.first().map(|m| m.ncols()).unwrap_or(0);
        for (j, gj) in g.iter().enumerate() {
            if gj.nrows() != n_tx || gj.ncols() != n_rx {
                return Err(Error::DimError(format!("g[{j}] must be {n_tx}x{n_rx}")));
            }
        }
        if h.iter()
            .chain(g.iter())
            .flat_map(|m| m.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidMatrix("non-finite channel entry".into()));
        }
        Ok(Self {
            distances_info: vec![f64::NAN; h.len()],
            distances_eh: vec![f64::NAN; g.len()],
            h,
            g,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.h.first().or(self.g.first()).map(|m| m.nrows()).unwrap_or(0)
    }

    pub fn n_rx(&self) -> usize {
        self.g.first().map(|m| m.ncols()).unwrap_or(0)
    }

    /// Checks the realization against the scenario dimensions.
    pub fn check_dims(&self, params: &ScenarioParams) -> Result<()> {
        if self.h.len() != params.n_info || self.g.len() != params.n_eh {
            return Err(Error::DimError(format!(
                "realization has {} info / {} EH receivers, scenario wants {} / {}",
                self.h.len(),
                self.g.len(),
                params.n_info,
                params.n_eh
            )));
        }
        if self.h.iter().any(|h| h.nrows() != params.n_tx || h.ncols() != 1)
            || self
                .g
                .iter()
                .any(|g| g.nrows() != params.n_tx || g.ncols() != params.n_rx)
        {
            return Err(Error::DimError("channel shapes do not match the scenario".into()));
        }
        Ok(())
    }

    /// Multiplies every channel coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            h: self.h.iter().map(|m| m * Complex64::new(c, 0.0)).collect(),
            g: self.g.iter().map(|m| m * Complex64::new(c, 0.0)).collect(),
            ..self.clone()
        }
    }
}

/// Linear path gain at distance `d_m`.
pub fn pathloss_linear(d_m: f64, params: &ScenarioParams) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::InvalidDistance(d_m));
    }
    Ok(match params.pathloss {
        PathLossModel::FreeSpace => {
            let loss_db = 20.0 * (4.0 * std::f64::consts::PI * d_m * params.carrier_hz / SPEED_OF_LIGHT).log10()
                - params.rx_gain_db;
            10f64.powf(-loss_db / 10.0)
        }
        PathLossModel::Constant(g) => g,
    })
}

/// Unit-power Rician coefficient with a zero-phase line-of-sight term.
pub fn rician_sample<R: Rng + ?Sized>(rng: &mut R, k_factor: f64) -> Complex64 {
    if k_factor.is_infinite() {
        return Complex64::new(1.0, 0.0);
    }
    let los = (k_factor / (k_factor + 1.0)).sqrt();
    let scatter = (1.0 / (k_factor + 1.0)).sqrt();
    los + complex_normal(rng) * scatter
}

/// Circularly symmetric complex normal with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

const PLACEMENT_STREAM: u64 = 0;
const FADING_STREAM: u64 = 1;

/// Draws one realization; a pure function of `(params, seed)`.
///
/// Distances come from a separate random stream than the fading, so two
/// scenarios that differ only in antenna counts see the same receiver
/// placement for a given seed.
pub fn draw_realization(params: &ScenarioParams, seed: u64) -> Result<ChannelRealization> {
    params.validate()?;
    let mut placement = ChaCha8Rng::seed_from_u64(seed);
    placement.set_stream(PLACEMENT_STREAM);
    let mut fading = ChaCha8Rng::seed_from_u64(seed);
    fading.set_stream(FADING_STREAM);

    let mut distance = || placement.random_range(params.d_min_m..=params.d_max_m);
    let distances_info: Vec<f64> = (0..params.n_info).map(|_| distance()).collect();
    let distances_eh: Vec<f64> = (0..params.n_eh).map(|_| distance()).collect();

    let mut draw = |rows: usize, cols: usize, d: f64| -> Result<ComplexMatrix> {
        let amp = pathloss_linear(d, params)?.sqrt();
        let mut m = ComplexMatrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m[(r, c)] = rician_sample(&mut fading, params.rician_k) * amp;
            }
        }
        Ok(m)
    };
    let h = distances_info
        .iter()
        .map(|&d| draw(params.n_tx, 1, d))
        .collect::<Result<Vec<_>>>()?;
    let g = distances_eh
        .iter()
        .map(|&d| draw(params.n_tx, params.n_rx, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelRealization {
        h,
        g,
        distances_info,
        distances_eh,
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0 - 3.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}
