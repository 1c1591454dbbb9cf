//! Closed-form figures of merit: harvested power, SINR, eavesdropper
//! capacity and secrecy capacity.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::error::{Error, Result};
use crate::hermitian::{det_hermitian, eigenvalues, vec_norm, ComplexMatrix, HermitianMatrix};

/// Rank-one beamformers plus artificial-noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPolicy {
    /// `beams[k]` is `n_tx x 1`.
    pub beams: Vec<ComplexMatrix>,
    pub noise_cov: HermitianMatrix,
    pub objective_tau: f64,
}

impl AllocationPolicy {
    pub fn covariance(&self) -> TransmitCovariance {
        TransmitCovariance {
            w: self.beams.iter().map(HermitianMatrix::outer).collect(),
            v: self.noise_cov.clone(),
        }
    }

    pub fn total_power(&self) -> f64 {
        self.noise_cov.trace() + self.beams.iter().map(|w| vec_norm(w).powi(2)).sum::<f64>()
    }

    /// Checks the PSD and power-budget invariants.
    pub fn validate(&self, p_max: f64) -> Result<()> {
        let scale = 1.0 + self.noise_cov.frobenius();
        if self.noise_cov.min_eigenvalue() < -1e-8 * scale {
            return Err(Error::InvalidMatrix("noise covariance is not PSD".into()));
        }
        if self.total_power() > p_max * (1.0 + 1e-8) {
            return Err(Error::InvalidSolution(format!(
                "total power {} exceeds budget {p_max}",
                self.total_power()
            )));
        }
        Ok(())
    }
}

/// Transmit covariance with possibly high-rank information blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitCovariance {
    pub w: Vec<HermitianMatrix>,
    pub v: HermitianMatrix,
}

impl TransmitCovariance {
    /// `Σ_k W_k + V`.
    pub fn total(&self) -> HermitianMatrix {
        self.w.iter().fold(self.v.clone(), |acc, w| acc.add(w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub harvested_w: Vec<f64>,
    pub min_harvested_w: f64,
    pub sinr: Vec<f64>,
    /// `eaves_cap[j][k]`.
    pub eaves_cap: Vec<Vec<f64>>,
    pub secrecy_cap: Vec<f64>,
}

impl PerformanceReport {
    pub fn mean_secrecy(&self) -> f64 {
        if self.secrecy_cap.is_empty() {
            0.0
        } else {
            self.secrecy_cap.iter().sum::<f64>() / self.secrecy_cap.len() as f64
        }
    }

    /// Largest eavesdropper capacity excess over its limit.
    pub fn max_c2_excess(&self, cap_limit: &[Vec<f64>]) -> f64 {
        self.eaves_cap
            .iter()
            .zip(cap_limit)
            .flat_map(|(row, lim)| row.iter().zip(lim).map(|(c, r)| c - r))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_rows(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimError(format!("{what} has {} rows, expected {n}", m.nrows())));
    }
    Ok(())
}

/// `η Tr(G^H C G)` for a transmit covariance `C`.
pub fn harvested_power_cov(g: &ComplexMatrix, cov: &TransmitCovariance, eta: f64) -> Result<f64> {
    let total = cov.total();
    check_rows(g, total.dim(), "G")?;
    Ok((eta * total.congruence(g).trace()).max(0.0))
}

/// Harvested power at one energy receiver.
pub fn harvested_power(g: &ComplexMatrix, policy: &AllocationPolicy, eta: f64) -> Result<f64> {
    harvested_power_cov(g, &policy.covariance(), eta)
}

/// SINR of information receiver `k` with covariance-valued signals; the
/// desired-signal term is `Tr(H_k W_k)`.
pub fn sinr_cov(k: usize, channels: &ChannelRealization, cov: &TransmitCovariance, noise_power: f64) -> Result<f64> {
    let h = channels
        .h
        .get(k)
        .ok_or_else(|| Error::DimError(format!("no information receiver {k}")))?;
    check_rows(h, cov.v.dim(), "h")?;
    if cov.w.len() != channels.h.len() {
        return Err(Error::DimError(
            "one beam block per information receiver expected".into(),
        ));
    }
    let signal = cov.w[k].quad_form(h);
    let interference: f64 = cov
        .w
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != k)
        .map(|(_, w)| w.quad_form(h))
        .sum();
    Ok(signal / (interference + cov.v.quad_form(h) + noise_power))
}

/// SINR of information receiver `k`.
pub fn sinr(k: usize, channels: &ChannelRealization, policy: &AllocationPolicy, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidConfig("noise power must be positive".into()));
    }
    let h = channels
        .h
        .get(k)
        .ok_or_else(|| Error::DimError(format!("no information receiver {k}")))?;
    if policy.beams.len() != channels.h.len() {
        return Err(Error::DimError("one beam per information receiver expected".into()));
    }
    check_rows(h, policy.noise_cov.dim(), "h")?;
    let gain = |w: &ComplexMatrix| -> Result<f64> {
        check_rows(w, h.nrows(), "w")?;
        Ok((h.adjoint() * w)[(0, 0)].norm_sqr())
    };
    let signal = gain(&policy.beams[k])?;
    let mut interference = 0.0;
    for (m, w) in policy.beams.iter().enumerate() {
        if m != k {
            interference += gain(w)?;
        }
    }
    Ok(signal / (interference + policy.noise_cov.quad_form(h) + noise_power))
}

/// `Q_j = G^H V G + σ² I`.
pub fn eaves_noise_cov(g: &ComplexMatrix, noise_cov: &HermitianMatrix, noise_power: f64) -> HermitianMatrix {
    noise_cov
        .congruence(g)
        .add(&HermitianMatrix::identity(g.ncols()).scale(noise_power))
}

fn finite_or(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericalError(format!("{what} is not finite")))
    }
}

/// Capacity of energy receiver `j` eavesdropping beam `w_k`, using the
/// rank-one identity `log2(1 + a^H Q^{-1} a)` with `a = G^H w_k`.
pub fn eaves_capacity(
    g: &ComplexMatrix,
    w_k: &ComplexMatrix,
    noise_cov: &HermitianMatrix,
    noise_power: f64,
) -> Result<f64> {
    check_rows(g, noise_cov.dim(), "G")?;
    check_rows(w_k, g.nrows(), "w")?;
    let q = eaves_noise_cov(g, noise_cov, noise_power);
    let a = g.adjoint() * w_k;
    let chol =
        Cholesky::new(q.into_matrix()).ok_or_else(|| Error::NumericalError("Q is not positive definite".into()))?;
    let x = chol.solve(&a);
    let quad = (a.adjoint() * x)[(0, 0)].re.max(0.0);
    finite_or((1.0 + quad).log2(), "eavesdropper capacity")
}

/// `log2 det(I + Q^{-1} G^H W G)` for a covariance-valued signal `W`.
pub fn eaves_capacity_cov(
    g: &ComplexMatrix,
    w: &HermitianMatrix,
    noise_cov: &HermitianMatrix,
    noise_power: f64,
) -> Result<f64> {
    check_rows(g, noise_cov.dim(), "G")?;
    check_rows(g, w.dim(), "G")?;
    let q = eaves_noise_cov(g, noise_cov, noise_power);
    let signal = w.congruence(g);
    let value = log_det_pd(&q.add(&signal))? - log_det_pd(&q)?;
    finite_or(value / std::f64::consts::LN_2, "eavesdropper capacity").map(|c| c.max(0.0))
}

fn log_det_pd(m: &HermitianMatrix) -> Result<f64> {
    let chol = Cholesky::new(m.as_matrix().clone())
        .ok_or_else(|| Error::NumericalError("matrix is not positive definite".into()))?;
    let l = chol.l();
    Ok((0..m.dim()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Secrecy capacity of information receiver `k`.
pub fn secrecy_capacity(
    k: usize,
    channels: &ChannelRealization,
    policy: &AllocationPolicy,
    noise_power: f64,
) -> Result<f64> {
    let rate = (1.0 + sinr(k, channels, policy, noise_power)?).log2();
    let mut worst = 0.0f64;
    for g in &channels.g {
        worst = worst.max(eaves_capacity(g, &policy.beams[k], &policy.noise_cov, noise_power)?);
    }
    Ok((rate - worst).max(0.0))
}

/// `det(I + A) - (1 + Tr A)` for PSD `A`; non-negative, and zero exactly
/// when `rank(A) <= 1`.
pub fn rank_one_det_gap(a: &HermitianMatrix) -> Result<f64> {
    let vals = eigenvalues(a);
    let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if vals.first().is_some_and(|&v| v < -1e-10 * scale) {
        return Err(Error::InvalidMatrix("rank_one_det_gap needs a PSD matrix".into()));
    }
    // det(I+A) - 1 - Σλ = Σ of all elementary symmetric polynomials of
    // degree >= 2; expanding avoids cancellation near rank one.
    let mut elem = vec![0.0f64; vals.len() + 1];
    elem[0] = 1.0;
    for &lam in &vals {
        let lam = lam.max(0.0);
        for d in (1..elem.len()).rev() {
            elem[d] += lam * elem[d - 1];
        }
    }
    Ok(elem.iter().skip(2).sum())
}

/// Evaluates every figure of merit for rank-one beams.
pub fn evaluate_policy(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    policy: &AllocationPolicy,
) -> Result<PerformanceReport> {
    let sigma2 = params.noise_power;
    let harvested_w = channels
        .g
        .iter()
        .zip(&params.efficiency)
        .map(|(g, &eta)| harvested_power(g, policy, eta))
        .collect::<Result<Vec<_>>>()?;
    let sinr = (0..channels.h.len())
        .map(|k| sinr(k, channels, policy, sigma2))
        .collect::<Result<Vec<_>>>()?;
    let eaves_cap = channels
        .g
        .iter()
        .map(|g| {
            policy
                .beams
                .iter()
                .map(|w| eaves_capacity(g, w, &policy.noise_cov, sigma2))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_report(harvested_w, sinr, eaves_cap))
}

/// Evaluates every figure of merit for covariance-valued signals.
pub fn evaluate_covariance(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    cov: &TransmitCovariance,
) -> Result<PerformanceReport> {
    let sigma2 = params.noise_power;
    let harvested_w = channels
        .g
        .iter()
        .zip(&params.efficiency)
        .map(|(g, &eta)| harvested_power_cov(g, cov, eta))
        .collect::<Result<Vec<_>>>()?;
    let sinr = (0..channels.h.len())
        .map(|k| sinr_cov(k, channels, cov, sigma2))
        .collect::<Result<Vec<_>>>()?;
    let eaves_cap = channels
        .g
        .iter()
        .map(|g| {
            cov.w
                .iter()
                .map(|w| eaves_capacity_cov(g, w, &cov.v, sigma2))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_report(harvested_w, sinr, eaves_cap))
}

fn assemble_report(harvested_w: Vec<f64>, sinr: Vec<f64>, eaves_cap: Vec<Vec<f64>>) -> PerformanceReport {
    let min_harvested_w = harvested_w.iter().copied().fold(f64::INFINITY, f64::min);
    let secrecy_cap = sinr
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let worst = eaves_cap.iter().map(|row| row[k]).fold(0.0f64, f64::max);
            ((1.0 + s).log2() - worst).max(0.0)
        })
        .collect();
    PerformanceReport {
        harvested_w,
        min_harvested_w,
        sinr,
        eaves_cap,
        secrecy_cap,
    }
}

/// Full-determinant evaluation of the eavesdropper capacity, kept as an
/// independent check of the rank-one identity.
pub fn eaves_capacity_full_det(
    g: &ComplexMatrix,
    w_k: &ComplexMatrix,
    noise_cov: &HermitianMatrix,
    noise_power: f64,
) -> Result<f64> {
    let q = eaves_noise_cov(g, noise_cov, noise_power);
    let q_inv = q
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalError("Q is singular".into()))?;
    let a = g.adjoint() * w_k;
    let m = ComplexMatrix::identity(g.ncols(), g.ncols()) + q_inv * &a * a.adjoint();
    let det: Complex64 = m.determinant();
    finite_or(det.re.log2(), "determinant")
}

/// `det(I + A)` via eigenvalues, for tests of [`rank_one_det_gap`].
pub fn det_identity_plus(a: &HermitianMatrix) -> f64 {
    det_hermitian(&a.add(&HermitianMatrix::identity(a.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{column, C0, C1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn rand_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| rand_c(rng))
    }

    fn rand_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let f = rand_mat(n, rank, rng);
        HermitianMatrix::hermitian_part(&(&f * f.adjoint()))
    }

    fn scalar(x: f64) -> ComplexMatrix {
        column(&[Complex64::new(x, 0.0)])
    }

    #[test]
    fn scalar_harvested_power() {
        let policy = AllocationPolicy {
            beams: vec![scalar(2f64.sqrt())],
            noise_cov: HermitianMatrix::identity(1),
            objective_tau: 0.0,
        };
        let hp = harvested_power(&scalar(1.0), &policy, 0.5).unwrap();
        assert!((hp - 1.5).abs() < 1e-14);
        let zero = AllocationPolicy {
            beams: vec![scalar(0.0)],
            noise_cov: HermitianMatrix::zeros(1),
            objective_tau: 0.0,
        };
        assert_eq!(harvested_power(&scalar(1.0), &zero, 0.5).unwrap(), 0.0);
        assert!(matches!(
            harvested_power(&rand_mat(3, 2, &mut ChaCha8Rng::seed_from_u64(0)), &zero, 0.5),
            Err(Error::DimError(_))
        ));
    }

    #[test]
    fn harvested_power_column_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (nt, nr) = (5, 2);
        let g = rand_mat(nt, nr, &mut rng);
        let beams: Vec<_> = (0..3).map(|_| rand_mat(nt, 1, &mut rng)).collect();
        let v = rand_psd(nt, 2, &mut rng);
        let policy = AllocationPolicy {
            beams: beams.clone(),
            noise_cov: v.clone(),
            objective_tau: 0.0,
        };
        let eta = 0.7;
        let mut oracle = 0.0;
        for c in 0..nr {
            let gc = ComplexMatrix::from_column_slice(g.nrows(), 1, g.column(c).as_slice());
            for w in &beams {
                oracle += (gc.adjoint() * w)[(0, 0)].norm_sqr();
            }
            oracle += v.quad_form(&gc);
        }
        let got = harvested_power(&g, &policy, eta).unwrap();
        assert!((got - eta * oracle).abs() < 1e-10);
    }

    fn realization(h: Vec<ComplexMatrix>, g: Vec<ComplexMatrix>) -> ChannelRealization {
        ChannelRealization::from_channels(h, g).unwrap()
    }

    #[test]
    fn sinr_arithmetic_cases() {
        // K = 1, |h^H w|^2 = 4, no noise covariance, unit noise.
        let ch = realization(vec![scalar(1.0)], vec![]);
        let p = AllocationPolicy {
            beams: vec![scalar(2.0)],
            noise_cov: HermitianMatrix::zeros(1),
            objective_tau: 0.0,
        };
        assert!((sinr(0, &ch, &p, 1.0).unwrap() - 4.0).abs() < 1e-14);

        // Signal 4, one interferer contributing 2, Tr(H V) = 1, noise 1.
        let ch = realization(vec![scalar(1.0), scalar(1.0)], vec![]);
        let p = AllocationPolicy {
            beams: vec![scalar(2.0), scalar(2f64.sqrt())],
            noise_cov: HermitianMatrix::identity(1),
            objective_tau: 0.0,
        };
        assert!((sinr(0, &ch, &p, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sinr_matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nt = 4;
        let h: Vec<_> = (0..3).map(|_| rand_mat(nt, 1, &mut rng)).collect();
        let beams: Vec<_> = (0..3).map(|_| rand_mat(nt, 1, &mut rng)).collect();
        let v = rand_psd(nt, 3, &mut rng);
        let ch = realization(h.clone(), vec![]);
        let p = AllocationPolicy {
            beams: beams.clone(),
            noise_cov: v.clone(),
            objective_tau: 0.0,
        };
        for k in 0..3 {
            // Explicit sums over entries.
            let ip = |w: &ComplexMatrix| -> f64 {
                let mut s = C0;
                for i in 0..nt {
                    s += h[k][(i, 0)].conj() * w[(i, 0)];
                }
                s.norm_sqr()
            };
            let mut tr_hv = C0;
            for i in 0..nt {
                for j in 0..nt {
                    tr_hv += h[k][(i, 0)].conj() * v.as_matrix()[(i, j)] * h[k][(j, 0)];
                }
            }
            let interf: f64 = (0..3).filter(|&m| m != k).map(|m| ip(&beams[m])).sum();
            let want = ip(&beams[k]) / (interf + tr_hv.re + 0.3);
            assert!((sinr(k, &ch, &p, 0.3).unwrap() - want).abs() < 1e-10 * (1.0 + want));
        }
    }

    #[test]
    fn eaves_capacity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = rand_mat(4, 2, &mut rng);
        let v = rand_psd(4, 2, &mut rng);
        assert_eq!(eaves_capacity(&g, &ComplexMatrix::zeros(4, 1), &v, 1.0).unwrap(), 0.0);

        // N_R = 1 and V = 0 reduce to a scalar channel.
        let g1 = rand_mat(3, 1, &mut rng);
        let w = rand_mat(3, 1, &mut rng);
        let gain = (g1.adjoint() * &w)[(0, 0)].norm_sqr();
        let c = eaves_capacity(&g1, &w, &HermitianMatrix::zeros(3), 0.5).unwrap();
        assert!((c - (1.0 + gain / 0.5).log2()).abs() < 1e-12);

        // Rank-one identity against the full determinant.
        for _ in 0..20 {
            let g = rand_mat(5, 3, &mut rng);
            let w = rand_mat(5, 1, &mut rng);
            let v = rand_psd(5, 2, &mut rng);
            let a = eaves_capacity(&g, &w, &v, 0.2).unwrap();
            let b = eaves_capacity_full_det(&g, &w, &v, 0.2).unwrap();
            let c = eaves_capacity_cov(&g, &HermitianMatrix::outer(&w), &v, 0.2).unwrap();
            assert!((a - b).abs() < 1e-10);
            assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn secrecy_capacity_cases() {
        // No eavesdroppers.
        let ch = realization(vec![scalar(1.0)], vec![]);
        let p = AllocationPolicy {
            beams: vec![scalar(3f64.sqrt())],
            noise_cov: HermitianMatrix::zeros(1),
            objective_tau: 0.0,
        };
        assert!((secrecy_capacity(0, &ch, &p, 1.0).unwrap() - 2.0).abs() < 1e-14);

        // sinr = 1 and eavesdropper capacity = 1 clamp to zero.
        let ch = realization(vec![scalar(1.0)], vec![scalar(1.0)]);
        let p = AllocationPolicy {
            beams: vec![scalar(1.0)],
            noise_cov: HermitianMatrix::zeros(1),
            objective_tau: 0.0,
        };
        assert_eq!(secrecy_capacity(0, &ch, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_det_gap_cases() {
        assert_eq!(rank_one_det_gap(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = rand_mat(4, 1, &mut rng);
        assert!(rank_one_det_gap(&HermitianMatrix::outer(&u)).unwrap().abs() < 1e-10);
        assert!((rank_one_det_gap(&HermitianMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            rank_one_det_gap(&HermitianMatrix::from_real_diagonal(&[1.0, -1.0])),
            Err(Error::InvalidMatrix(_))
        ));
        // Direct determinant route agrees.
        for _ in 0..20 {
            let a = rand_psd(3, 3, &mut rng);
            let direct = det_identity_plus(&a) - (1.0 + a.trace());
            assert!((rank_one_det_gap(&a).unwrap() - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn harvested_power_is_linear_in_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = rand_mat(4, 2, &mut rng);
        let w = rand_mat(4, 1, &mut rng);
        let v = rand_psd(4, 2, &mut rng);
        let p1 = AllocationPolicy {
            beams: vec![w.clone()],
            noise_cov: v.clone(),
            objective_tau: 0.0,
        };
        let p2 = AllocationPolicy {
            beams: vec![w.map(|z| z * 2f64.sqrt())],
            noise_cov: v.scale(2.0),
            objective_tau: 0.0,
        };
        let a = harvested_power(&g, &p1, 0.5).unwrap();
        let b = harvested_power(&g, &p2, 0.5).unwrap();
        assert!((b - 2.0 * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn policy_validation() {
        let p = AllocationPolicy {
            beams: vec![column(&[C1, C0])],
            noise_cov: HermitianMatrix::identity(2),
            objective_tau: 0.0,
        };
        assert!(p.validate(3.0).is_ok());
        assert!(p.validate(2.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn artificial_noise_never_helps_the_eavesdropper(seed in 0u64..10_000, eps in 1e-3f64..10.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = rand_mat(4, 2, &mut rng);
                let w = rand_mat(4, 1, &mut rng);
                let v = rand_psd(4, 2, &mut rng);
                let u = rand_mat(4, 1, &mut rng);
                let bigger = v.add(&HermitianMatrix::outer(&u).scale(eps));
                let before = eaves_capacity(&g, &w, &v, 0.1).unwrap();
                let after = eaves_capacity(&g, &w, &bigger, 0.1).unwrap();
                prop_assert!(after <= before + 1e-9);
            }

            #[test]
            fn rank_one_det_gap_non_negative(seed in 0u64..100_000, n in 1usize..=4, rank in 1usize..=4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = rand_psd(n, rank.min(n), &mut rng);
                let gap = rank_one_det_gap(&a).unwrap();
                prop_assert!(gap >= -1e-9);
                if rank.min(n) <= 1 {
                    prop_assert!(gap.abs() <= 1e-9);
                }
            }
        }
    }
}
