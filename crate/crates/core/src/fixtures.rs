//! Small hand-checkable instances shared by unit tests.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::hermitian::column;

/// `N_T = N_R = K = J = 1`, unit channels, `σ² = 1`, `P = 4`, `Γ = 1`,
/// `R = 1`, `η = 0.5`. Optimum: `τ = 2` at `W = 2.5`, `V = 1.5`.
pub(crate) fn scalar_instance() -> (ChannelRealization, ScenarioParams) {
    let one = column(&[Complex64::new(1.0, 0.0)]);
    let ch = ChannelRealization::from_channels(vec![one.clone()], vec![one]).unwrap();
    let mut p = ScenarioParams::reference_setup(1, 1, 1, 0.0);
    p.n_rx = 1;
    p.noise_power = 1.0;
    p.p_max = 4.0;
    p.sinr_req = vec![1.0];
    p.cap_limit = vec![vec![1.0]];
    p.efficiency = vec![0.5];
    p.validate().unwrap();
    (ch, p)
}
