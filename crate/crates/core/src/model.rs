//! Builds the relaxed semidefinite program in standard equality form.
//!
//! Variables are PSD blocks: one beam covariance per information
//! receiver, the artificial-noise covariance, one Hermitian slack per
//! matrix inequality `G_j^H W_k G_j ⪯ α_{j,k} Q_j`, and non-negative
//! scalar slacks for the SINR, power and harvesting rows. The epigraph
//! variable `τ` is a non-negative scalar block; the objective is
//! `maximize τ`.

use std::fmt::Write as _;
use std::io::{self, BufRead};

use num_complex::Complex64;

use crate::channel::{ChannelRealization, ScenarioParams};
use crate::error::{Error, Result};
use crate::hermitian::{trace_inner, vec_norm, ComplexMatrix, HermitianMatrix};
use crate::metrics::TransmitCovariance;

/// `2^cap - 1`.
pub fn alpha_of(cap_limit: f64) -> Result<f64> {
    if !(cap_limit > 0.0) || !cap_limit.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "capacity limit must be positive, got {cap_limit}"
        )));
    }
    Ok(cap_limit.exp2() - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    /// `alpha[j][k]`.
    pub alpha: Vec<Vec<f64>>,
}

impl AlphaTable {
    pub fn from_limits(cap_limit: &[Vec<f64>]) -> Result<Self> {
        let alpha = cap_limit
            .iter()
            .map(|row| row.iter().map(|&r| alpha_of(r)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Complex Hermitian PSD block.
    Hermitian,
    /// Real symmetric PSD block (all of ours are 1 x 1, i.e. `x >= 0`).
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    Beam(usize),
    Noise,
    SecrecySlack { j: usize, k: usize },
    SinrSlack(usize),
    PowerSlack,
    HarvestSlack(usize),
    Tau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub label: String,
    pub role: BlockRole,
    pub kind: BlockKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    /// C1 for receiver `k`.
    Sinr(usize),
    /// One real entry of the secrecy matrix equality for `(j, k)`.
    Secrecy { j: usize, k: usize },
    /// C3.
    Power,
    /// C7 for energy receiver `j`.
    Harvest(usize),
}

/// `Σ_b Re Tr(A_b X_b) = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: ConstraintFamily,
    pub label: String,
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn evaluate(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.terms
            .iter()
            .map(|(b, a)| trace_inner(a, &blocks[*b]).expect("coefficient dims fixed at build time"))
            .sum()
    }

    pub fn coefficient(&self, block: usize) -> Option<&HermitianMatrix> {
        self.terms.iter().find(|(b, _)| *b == block).map(|(_, a)| a)
    }
}

/// How a beam covariance `W_k` maps onto its decision block.
#[derive(Debug, Clone, PartialEq)]
pub enum BeamParam {
    /// `W_k` is a free `n_tx x n_tx` PSD block.
    Full,
    /// `W_k = p_k d d^H` for a fixed unit vector `d`; the block is `p_k`.
    FixedDirection(ComplexMatrix),
}

/// How the noise covariance `V` maps onto its decision block.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseParam {
    Full,
    /// `V = U X U^H` with `X` an `r x r` PSD block.
    Subspace(ComplexMatrix),
    /// `V = p U U^H / r` with a scalar power block `p`.
    Isotropic(ComplexMatrix),
}

impl BeamParam {
    fn reduce(&self, a: &HermitianMatrix) -> HermitianMatrix {
        match self {
            BeamParam::Full => a.clone(),
            BeamParam::FixedDirection(d) => HermitianMatrix::from_real_diagonal(&[a.quad_form(d)]),
        }
    }

    fn block(&self, n_tx: usize) -> (BlockKind, usize) {
        match self {
            BeamParam::Full => (BlockKind::Hermitian, n_tx),
            BeamParam::FixedDirection(_) => (BlockKind::Real, 1),
        }
    }

    fn expand(&self, x: &HermitianMatrix) -> HermitianMatrix {
        match self {
            BeamParam::Full => x.clone(),
            BeamParam::FixedDirection(d) => HermitianMatrix::outer(d).scale(x.trace()),
        }
    }
}

impl NoiseParam {
    fn reduce(&self, a: &HermitianMatrix) -> HermitianMatrix {
        match self {
            NoiseParam::Full => a.clone(),
            NoiseParam::Subspace(u) => a.congruence(u),
            NoiseParam::Isotropic(u) => {
                HermitianMatrix::from_real_diagonal(&[a.congruence(u).trace() / u.ncols() as f64])
            }
        }
    }

    fn block(&self, n_tx: usize) -> (BlockKind, usize) {
        match self {
            NoiseParam::Full => (BlockKind::Hermitian, n_tx),
            NoiseParam::Subspace(u) => (BlockKind::Hermitian, u.ncols()),
            NoiseParam::Isotropic(_) => (BlockKind::Real, 1),
        }
    }

    fn expand(&self, x: &HermitianMatrix) -> HermitianMatrix {
        match self {
            NoiseParam::Full => x.clone(),
            NoiseParam::Subspace(u) => HermitianMatrix::hermitian_part(&(u * x.as_matrix() * u.adjoint())),
            NoiseParam::Isotropic(u) => {
                HermitianMatrix::hermitian_part(&(u * u.adjoint())).scale(x.trace() / u.ncols() as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    pub beams: Vec<BeamParam>,
    pub noise: NoiseParam,
}

impl Parametrization {
    pub fn full(n_info: usize) -> Self {
        Self {
            beams: vec![BeamParam::Full; n_info],
            noise: NoiseParam::Full,
        }
    }
}

/// The relaxed program plus the bookkeeping needed to read results back
/// in physical terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    pub constraints: Vec<Constraint>,
    /// Maximized: `Σ Re Tr(C_b X_b)`.
    pub objective: Vec<(usize, HermitianMatrix)>,
    pub param: Parametrization,
    pub alpha: AlphaTable,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_info: usize,
    pub n_eh: usize,
}

impl SdpProblem {
    pub fn find_block(&self, role: BlockRole) -> Option<usize> {
        self.blocks.iter().position(|b| b.role == role)
    }

    fn block_of(&self, role: BlockRole) -> usize {
        self.find_block(role).expect("block created by the builder")
    }

    pub fn beam_block(&self, k: usize) -> usize {
        self.block_of(BlockRole::Beam(k))
    }

    pub fn noise_block(&self) -> usize {
        self.block_of(BlockRole::Noise)
    }

    pub fn tau_block(&self) -> usize {
        self.block_of(BlockRole::Tau)
    }

    pub fn count(&self, pred: impl Fn(&ConstraintFamily) -> bool) -> usize {
        self.constraints.iter().filter(|c| pred(&c.family)).count()
    }

    /// Physical `W_k` from decision blocks.
    pub fn beam_covariance(&self, k: usize, blocks: &[HermitianMatrix]) -> HermitianMatrix {
        self.param.beams[k].expand(&blocks[self.beam_block(k)])
    }

    /// Physical `V` from decision blocks.
    pub fn noise_covariance(&self, blocks: &[HermitianMatrix]) -> HermitianMatrix {
        self.param.noise.expand(&blocks[self.noise_block()])
    }

    pub fn tau(&self, blocks: &[HermitianMatrix]) -> f64 {
        blocks[self.tau_block()].trace()
    }

    pub fn covariance(&self, blocks: &[HermitianMatrix]) -> TransmitCovariance {
        TransmitCovariance {
            w: (0..self.n_info).map(|k| self.beam_covariance(k, blocks)).collect(),
            v: self.noise_covariance(blocks),
        }
    }

    pub fn objective_value(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.objective
            .iter()
            .map(|(b, c)| trace_inner(c, &blocks[*b]).expect("objective dims fixed at build time"))
            .sum()
    }

    /// `Σ Tr(A X) - rhs` for every constraint.
    pub fn residuals(&self, blocks: &[HermitianMatrix]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.evaluate(blocks) - c.rhs).collect()
    }

    /// Decision blocks for a physical point under the full
    /// parametrization, with every slack set to its implied value.
    ///
    /// Slacks may come out negative (or indefinite) when the point is
    /// infeasible; [`SdpProblem::point_violation`] measures that.
    pub fn point_from_covariance(
        &self,
        channels: &ChannelRealization,
        params: &ScenarioParams,
        cov: &TransmitCovariance,
        tau: f64,
    ) -> Result<Vec<HermitianMatrix>> {
        if self.param != Parametrization::full(self.n_info) {
            return Err(Error::InvalidConfig(
                "point_from_covariance needs the full parametrization".into(),
            ));
        }
        let mut blocks: Vec<HermitianMatrix> = self.blocks.iter().map(|b| HermitianMatrix::zeros(b.dim)).collect();
        for k in 0..self.n_info {
            blocks[self.beam_block(k)] = cov.w[k].clone();
        }
        blocks[self.noise_block()] = cov.v.clone();
        blocks[self.tau_block()] = HermitianMatrix::from_real_diagonal(&[tau]);
        let sigma2 = params.noise_power;
        for (idx, spec) in self.blocks.iter().enumerate() {
            let value = match spec.role {
                BlockRole::SinrSlack(k) => {
                    let h = &channels.h[k];
                    let mut s = cov.w[k].quad_form(h) / params.sinr_req[k] - cov.v.quad_form(h) - sigma2;
                    for (m, w) in cov.w.iter().enumerate() {
                        if m != k {
                            s -= w.quad_form(h);
                        }
                    }
                    HermitianMatrix::from_real_diagonal(&[s])
                }
                BlockRole::SecrecySlack { j, k } => {
                    let g = &channels.g[j];
                    let q = cov
                        .v
                        .congruence(g)
                        .add(&HermitianMatrix::identity(self.n_rx).scale(sigma2));
                    q.scale(self.alpha.alpha[j][k]).sub(&cov.w[k].congruence(g))
                }
                BlockRole::PowerSlack => HermitianMatrix::from_real_diagonal(&[params.p_max - cov.total().trace()]),
                BlockRole::HarvestSlack(j) => {
                    let e = params.efficiency[j] * cov.total().congruence(&channels.g[j]).trace();
                    HermitianMatrix::from_real_diagonal(&[e - tau])
                }
                _ => continue,
            };
            blocks[idx] = value;
        }
        Ok(blocks)
    }

    /// Largest violation of the equalities and of block positivity.
    pub fn point_violation(&self, blocks: &[HermitianMatrix]) -> f64 {
        let eq = self.residuals(blocks).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let cone = blocks.iter().fold(0.0f64, |m, b| m.max(-b.min_eigenvalue()));
        eq.max(cone)
    }
}

/// Basis of Hermitian `n x n` matrices used to split a matrix equality
/// into real rows: `(row, col, is_imag, E)` with `Re Tr(E X)` equal to
/// `Re X[row,col]` or `Im X[row,col]`.
fn hermitian_entry_basis(n: usize) -> Vec<(usize, usize, bool, HermitianMatrix)> {
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in p..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(p, q)] += Complex64::new(0.5, 0.0);
            re[(q, p)] += Complex64::new(0.5, 0.0);
            out.push((p, q, false, HermitianMatrix::hermitian_part(&re)));
            if p != q {
                let mut im = ComplexMatrix::zeros(n, n);
                im[(q, p)] = Complex64::new(0.0, -0.5);
                im[(p, q)] = Complex64::new(0.0, 0.5);
                out.push((p, q, true, HermitianMatrix::hermitian_part(&im)));
            }
        }
    }
    out
}

fn is_zero(a: &HermitianMatrix) -> bool {
    a.as_matrix().iter().all(|z| *z == Complex64::new(0.0, 0.0))
}

struct RowBuilder {
    terms: Vec<(usize, HermitianMatrix)>,
}

impl RowBuilder {
    fn new() -> Self {
        Self { terms: Vec::new() }
    }

    fn push(&mut self, block: usize, a: HermitianMatrix) {
        if is_zero(&a) {
            return;
        }
        if let Some((_, existing)) = self.terms.iter_mut().find(|(b, _)| *b == block) {
            *existing = existing.add(&a);
        } else {
            self.terms.push((block, a));
        }
    }
}

/// Builds the relaxed program with free beam and noise covariances.
pub fn build_sdp(channels: &ChannelRealization, params: &ScenarioParams) -> Result<SdpProblem> {
    build_sdp_with(channels, params, &Parametrization::full(params.n_info))
}

/// Builds the relaxed program under a restricted parametrization of the
/// beam and noise covariances (used by the baseline schemes).
pub fn build_sdp_with(
    channels: &ChannelRealization,
    params: &ScenarioParams,
    param: &Parametrization,
) -> Result<SdpProblem> {
    params.validate()?;
    channels.check_dims(params)?;
    let alpha = AlphaTable::from_limits(&params.cap_limit)?;
    let (n_tx, n_rx, n_info, n_eh) = (params.n_tx, params.n_rx, params.n_info, params.n_eh);
    if param.beams.len() != n_info {
        return Err(Error::DimError(
            "one beam parametrization per information receiver".into(),
        ));
    }
    for b in &param.beams {
        if let BeamParam::FixedDirection(d) = b {
            if d.nrows() != n_tx || d.ncols() != 1 || (vec_norm(d) - 1.0).abs() > 1e-9 {
                return Err(Error::DimError(
                    "fixed beam directions must be unit n_tx x 1 vectors".into(),
                ));
            }
        }
    }
    match &param.noise {
        NoiseParam::Subspace(u) | NoiseParam::Isotropic(u) if u.nrows() != n_tx || u.ncols() == 0 => {
            return Err(Error::DimError(
                "noise subspace basis must be n_tx x r with r >= 1".into(),
            ));
        }
        _ => {}
    }

    let mut blocks = Vec::new();
    let mut add_block = |label: String, role: BlockRole, kind: BlockKind, dim: usize| {
        blocks.push(BlockSpec { label, role, kind, dim });
        blocks.len() - 1
    };
    let beam_blocks: Vec<usize> = (0..n_info)
        .map(|k| {
            let (kind, dim) = param.beams[k].block(n_tx);
            add_block(format!("W{}", k + 1), BlockRole::Beam(k), kind, dim)
        })
        .collect();
    let (kind, dim) = param.noise.block(n_tx);
    let noise_block = add_block("V".into(), BlockRole::Noise, kind, dim);
    let mut secrecy_blocks = vec![vec![0usize; n_info]; n_eh];
    for (j, row) in secrecy_blocks.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = add_block(
                format!("S{}_{}", j + 1, k + 1),
                BlockRole::SecrecySlack { j, k },
                BlockKind::Hermitian,
                n_rx,
            );
        }
    }
    let sinr_slacks: Vec<usize> = (0..n_info)
        .map(|k| add_block(format!("s_sinr{}", k + 1), BlockRole::SinrSlack(k), BlockKind::Real, 1))
        .collect();
    let power_slack = add_block("s_power".into(), BlockRole::PowerSlack, BlockKind::Real, 1);
    let harvest_slacks: Vec<usize> = (0..n_eh)
        .map(|j| {
            add_block(
                format!("s_harvest{}", j + 1),
                BlockRole::HarvestSlack(j),
                BlockKind::Real,
                1,
            )
        })
        .collect();
    let tau_block = add_block("tau".into(), BlockRole::Tau, BlockKind::Real, 1);

    let one = HermitianMatrix::identity(1);
    let sigma2 = params.noise_power;
    let channel_grams: Vec<HermitianMatrix> = channels.h.iter().map(HermitianMatrix::outer).collect();
    let mut constraints = Vec::new();

    // C1: Tr(H_k W_k)/Γ_k - Tr(H_k (Σ_{m≠k} W_m + V)) - s_k = σ².
    for k in 0..n_info {
        let hk = &channel_grams[k];
        let mut row = RowBuilder::new();
        for m in 0..n_info {
            let a = if m == k {
                hk.scale(1.0 / params.sinr_req[k])
            } else {
                hk.scale(-1.0)
            };
            row.push(beam_blocks[m], param.beams[m].reduce(&a));
        }
        row.push(noise_block, param.noise.reduce(&hk.scale(-1.0)));
        row.push(sinr_slacks[k], one.scale(-1.0));
        constraints.push(Constraint {
            family: ConstraintFamily::Sinr(k),
            label: format!("C1[{}]", k + 1),
            terms: row.terms,
            rhs: sigma2,
        });
    }

    // Secrecy: α (G^H V G + σ² I) - G^H W_k G - S = 0, entry by entry.
    let basis = hermitian_entry_basis(n_rx);
    for j in 0..n_eh {
        let g = &channels.g[j];
        for k in 0..n_info {
            let a_jk = alpha.alpha[j][k];
            for (p, q, imag, e) in &basis {
                let lifted = HermitianMatrix::hermitian_part(&(g * e.as_matrix() * g.adjoint()));
                let mut row = RowBuilder::new();
                row.push(beam_blocks[k], param.beams[k].reduce(&lifted.scale(-1.0)));
                row.push(noise_block, param.noise.reduce(&lifted.scale(a_jk)));
                row.push(secrecy_blocks[j][k], e.scale(-1.0));
                let rhs = if p == q && !imag { -a_jk * sigma2 } else { 0.0 };
                constraints.push(Constraint {
                    family: ConstraintFamily::Secrecy { j, k },
                    label: format!(
                        "C2[{},{}]({},{},{})",
                        j + 1,
                        k + 1,
                        p,
                        q,
                        if *imag { "im" } else { "re" }
                    ),
                    terms: row.terms,
                    rhs,
                });
            }
        }
    }

    // C3: Tr(V + Σ W_k) + s = P_max.
    let eye = HermitianMatrix::identity(n_tx);
    let mut row = RowBuilder::new();
    for k in 0..n_info {
        row.push(beam_blocks[k], param.beams[k].reduce(&eye));
    }
    row.push(noise_block, param.noise.reduce(&eye));
    row.push(power_slack, one.clone());
    constraints.push(Constraint {
        family: ConstraintFamily::Power,
        label: "C3".into(),
        terms: row.terms,
        rhs: params.p_max,
    });

    // C7: η_j Tr(G_j^H (Σ W_k + V) G_j) - τ - s_j = 0.
    for j in 0..n_eh {
        let g = &channels.g[j];
        let gram = HermitianMatrix::hermitian_part(&(g * g.adjoint())).scale(params.efficiency[j]);
        let mut row = RowBuilder::new();
        for k in 0..n_info {
            row.push(beam_blocks[k], param.beams[k].reduce(&gram));
        }
        row.push(noise_block, param.noise.reduce(&gram));
        row.push(tau_block, one.scale(-1.0));
        row.push(harvest_slacks[j], one.scale(-1.0));
        constraints.push(Constraint {
            family: ConstraintFamily::Harvest(j),
            label: format!("C7[{}]", j + 1),
            terms: row.terms,
            rhs: 0.0,
        });
    }

    Ok(SdpProblem {
        blocks,
        constraints,
        objective: vec![(tau_block, one)],
        param: param.clone(),
        alpha,
        n_tx,
        n_rx,
        n_info,
        n_eh,
    })
}

/// Plain-text problem in the dump format, independent of how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpedProblem {
    pub blocks: Vec<(String, BlockKind, usize)>,
    pub constraints: Vec<(String, Vec<(usize, HermitianMatrix)>, f64)>,
    pub objective: Vec<(usize, HermitianMatrix)>,
}

/// Writes the problem in the plain-text sparse dump format:
///
/// ```text
/// # swipt-sdp 1
/// block <label> <hermitian|real> <dim>
/// constraint <index> <label> <rhs>
/// coef <index> <block label> <row> <col> <re> <im>
/// objective <block label> <row> <col> <re> <im>
/// ```
///
/// Constraints are `Σ_b Re Tr(A_b X_b) = rhs` over PSD blocks and the
/// objective is maximized. Only the upper triangle (`row <= col`) of each
/// Hermitian coefficient is written; indices are zero-based.
pub fn write_dump(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# swipt-sdp 1");
    let _ = writeln!(
        out,
        "# maximize objective; constraints: sum_b Re Tr(A_b X_b) = rhs; X_b PSD"
    );
    for b in &problem.blocks {
        let kind = match b.kind {
            BlockKind::Hermitian => "hermitian",
            BlockKind::Real => "real",
        };
        let _ = writeln!(out, "block {} {} {}", b.label, kind, b.dim);
    }
    let write_coef = |out: &mut String, prefix: &str, label: &str, a: &HermitianMatrix| {
        let m = a.as_matrix();
        for r in 0..a.dim() {
            for c in r..a.dim() {
                let z = m[(r, c)];
                if z.re != 0.0 || z.im != 0.0 {
                    let _ = writeln!(out, "{prefix} {label} {r} {c} {:.17e} {:.17e}", z.re, z.im);
                }
            }
        }
    };
    for (i, c) in problem.constraints.iter().enumerate() {
        let _ = writeln!(out, "constraint {i} {} {:.17e}", c.label, c.rhs);
        for (b, a) in &c.terms {
            write_coef(&mut out, &format!("coef {i}"), &problem.blocks[*b].label, a);
        }
    }
    for (b, a) in &problem.objective {
        write_coef(&mut out, "objective", &problem.blocks[*b].label, a);
    }
    out
}

/// Parses the dump format written by [`write_dump`].
pub fn read_dump<R: BufRead>(reader: R) -> Result<DumpedProblem> {
    let bad = |line: usize, msg: &str| Error::InvalidConfig(format!("dump line {}: {msg}", line + 1));
    let mut blocks: Vec<(String, BlockKind, usize)> = Vec::new();
    let mut constraints: Vec<(String, Vec<(usize, ComplexMatrix)>, f64)> = Vec::new();
    let mut objective: Vec<(usize, ComplexMatrix)> = Vec::new();
    let find = |blocks: &[(String, BlockKind, usize)], label: &str| blocks.iter().position(|b| b.0 == label);
    let add = |terms: &mut Vec<(usize, ComplexMatrix)>, b: usize, dim: usize, r: usize, c: usize, z: Complex64| {
        let idx = match terms.iter().position(|(tb, _)| *tb == b) {
            Some(i) => i,
            None => {
                terms.push((b, ComplexMatrix::zeros(dim, dim)));
                terms.len() - 1
            }
        };
        let m = &mut terms[idx].1;
        m[(r, c)] = z;
        m[(c, r)] = z.conj();
    };
    for (ln, line) in reader.lines().enumerate() {
        let line = line.map_err(|e: io::Error| Error::InvalidConfig(e.to_string()))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.is_empty() || t[0].starts_with('#') {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad index"));
        match (t[0], t.len()) {
            ("block", 4) => {
                let kind = match t[2] {
                    "hermitian" => BlockKind::Hermitian,
                    "real" => BlockKind::Real,
                    _ => return Err(bad(ln, "unknown block kind")),
                };
                blocks.push((t[1].to_string(), kind, idx(t[3])?));
            }
            ("constraint", 4) => {
                if idx(t[1])? != constraints.len() {
                    return Err(bad(ln, "constraints must be numbered consecutively"));
                }
                constraints.push((t[2].to_string(), Vec::new(), num(t[3])?));
            }
            ("coef", 7) | ("objective", 6) => {
                let off = if t[0] == "coef" { 1 } else { 0 };
                let b = find(&blocks, t[1 + off]).ok_or_else(|| bad(ln, "unknown block"))?;
                let dim = blocks[b].2;
                let (r, c) = (idx(t[2 + off])?, idx(t[3 + off])?);
                if r > c || c >= dim {
                    return Err(bad(ln, "entry outside the upper triangle"));
                }
                let z = Complex64::new(num(t[4 + off])?, num(t[5 + off])?);
                if t[0] == "coef" {
                    let ci = idx(t[1])?;
                    let entry = constraints.get_mut(ci).ok_or_else(|| bad(ln, "unknown constraint"))?;
                    add(&mut entry.1, b, dim, r, c, z);
                } else {
                    add(&mut objective, b, dim, r, c, z);
                }
            }
            _ => return Err(bad(ln, "unrecognized record")),
        }
    }
    let herm = |terms: Vec<(usize, ComplexMatrix)>| {
        terms
            .into_iter()
            .map(|(b, m)| Ok((b, HermitianMatrix::new(m)?)))
            .collect::<Result<Vec<_>>>()
    };
    Ok(DumpedProblem {
        blocks,
        constraints: constraints
            .into_iter()
            .map(|(l, t, r)| Ok((l, herm(t)?, r)))
            .collect::<Result<Vec<_>>>()?,
        objective: herm(objective)?,
    })
}
