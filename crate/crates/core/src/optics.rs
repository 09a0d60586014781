//! Circuit elements: the balanced beam splitter, the bosonic loss channel and
//! the displacement operator.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::fock::{
    annihilation_op, DensityMatrix, Mode, Operator, TruncationConfig, TwoModeDensity, TwoModeOperator, TwoModeState,
    C64, ZERO,
};

/// Beam splitter `exp(θ(â₁†â₂ − â₁â₂†))`, stored as one real orthogonal block
/// per total photon number `N` in the basis `|k, N−k⟩`, `k = 0..=N`.
///
/// With `θ = π/4` this maps `|α⟩|γ⟩ → |(α+γ)/√2⟩|(γ−α)/√2⟩`, so the cat inputs
/// `|±α⟩` and `|±iα⟩` leave as the cross of amplitude `β = αe^{iπ/4}`.
/// Blocks are exact; truncation only drops output levels `≥ dim`.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    theta: f64,
    trunc: TruncationConfig,
    blocks: Vec<DMatrix<f64>>,
}

impl BeamSplitter {
    pub fn balanced(trunc: TruncationConfig) -> Self {
        Self::with_angle(FRAC_PI_4, trunc)
    }

    pub fn with_angle(theta: f64, trunc: TruncationConfig) -> Self {
        let max_total = 2 * (trunc.dim() - 1);
        let blocks = (0..=max_total).map(|total| block_unitary(theta, total)).collect();
        BeamSplitter { theta, trunc, blocks }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    /// Block acting on total photon number `total`.
    pub fn block(&self, total: usize) -> &DMatrix<f64> {
        &self.blocks[total]
    }

    /// `⟨m1, m2| U |n1, n2⟩`.
    pub fn element(&self, m1: usize, m2: usize, n1: usize, n2: usize) -> f64 {
        let total = n1 + n2;
        if m1 + m2 != total || total >= self.blocks.len() {
            return 0.0;
        }
        self.blocks[total][(m1, n1)]
    }

    pub fn apply(&self, psi: &TwoModeState) -> Result<TwoModeState> {
        self.trunc.ensure_same(&psi.trunc())?;
        let d = self.trunc.dim();
        let mut out = DVector::from_element(d * d, ZERO);
        for (total, block) in self.blocks.iter().enumerate() {
            let lo = total.saturating_sub(d - 1);
            let hi = total.min(d - 1);
            let input = DVector::from_fn(total + 1, |k, _| {
                if (lo..=hi).contains(&k) {
                    psi.amplitude(k, total - k)
                } else {
                    ZERO
                }
            });
            if input.iter().all(|z| *z == ZERO) {
                continue;
            }
            let output = block.map(C64::from) * input;
            for k in lo..=hi {
                out[k * d + (total - k)] = output[k];
            }
        }
        TwoModeState::new(out, self.trunc)
    }

    /// Dense `dim² × dim²` matrix of the truncated splitter.
    pub fn to_operator(&self) -> TwoModeOperator {
        let d = self.trunc.dim();
        let mut matrix = DMatrix::from_element(d * d, d * d, ZERO);
        for n1 in 0..d {
            for n2 in 0..d {
                let total = n1 + n2;
                for m1 in total.saturating_sub(d - 1)..=total.min(d - 1) {
                    matrix[(m1 * d + (total - m1), n1 * d + n2)] = C64::from(self.blocks[total][(m1, n1)]);
                }
            }
        }
        TwoModeOperator::new(matrix, self.trunc).expect("square by construction")
    }
}

fn block_unitary(theta: f64, total: usize) -> DMatrix<f64> {
    let size = total + 1;
    let mut generator = DMatrix::<f64>::zeros(size, size);
    for k in 0..total {
        // â₁†â₂|k, N−k⟩ = √((k+1)(N−k)) |k+1, N−k−1⟩ and its negated adjoint
        let c = (((k + 1) * (total - k)) as f64).sqrt();
        generator[(k + 1, k)] = c;
        generator[(k, k + 1)] = -c;
    }
    (generator * theta).exp()
}

/// Dense balanced beam splitter on the truncated two-mode space.
pub fn beam_splitter_unitary(trunc: TruncationConfig) -> TwoModeOperator {
    BeamSplitter::balanced(trunc).to_operator()
}

/// Probability that exactly `lost` of `n` photons are lost through a channel
/// of transmission `eta`.
pub fn loss_probability(n: usize, lost: usize, eta: f64) -> f64 {
    if lost > n {
        return 0.0;
    }
    binomial(n, lost) * eta.powi((n - lost) as i32) * (1.0 - eta).powi(lost as i32)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pure-loss channel with Kraus operators
/// `K_l = √((1−η)^l/l!) η^{n̂/2} â^l`, `l = 0..=kraus_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossChannel {
    eta: f64,
    kraus_cutoff: usize,
}

impl LossChannel {
    pub const TRACE_TOL: f64 = 1e-9;
    const CUTOFF_TAIL: f64 = 1e-12;

    pub fn new(eta: f64, kraus_cutoff: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(FockError::InvalidArgument(format!(
                "transmission must lie in [0, 1], got {eta}"
            )));
        }
        Ok(LossChannel { eta, kraus_cutoff })
    }

    /// Smallest cutoff for which losing more photons than kept Kraus terms
    /// has probability below 1e-12 for every level up to `max_level`.
    pub fn with_default_cutoff(eta: f64, max_level: usize) -> Result<Self> {
        let mut channel = Self::new(eta, max_level)?;
        let mut tail = 0.0;
        for lost in (1..=max_level).rev() {
            tail += loss_probability(max_level, lost, eta);
            if tail >= Self::CUTOFF_TAIL {
                channel.kraus_cutoff = lost;
                return Ok(channel);
            }
        }
        channel.kraus_cutoff = 0;
        Ok(channel)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kraus_cutoff(&self) -> usize {
        self.kraus_cutoff
    }

    pub fn kraus_operator(&self, lost: usize, trunc: TruncationConfig) -> Operator {
        let d = trunc.dim();
        let mut matrix = DMatrix::from_element(d, d, ZERO);
        for n in lost..d {
            matrix[(n - lost, n)] = C64::from(loss_probability(n, lost, self.eta).sqrt());
        }
        Operator::new(matrix, trunc).expect("square by construction")
    }

    pub fn kraus_operators(&self, trunc: TruncationConfig) -> Vec<Operator> {
        (0..=self.kraus_cutoff.min(trunc.dim() - 1))
            .map(|l| self.kraus_operator(l, trunc))
            .collect()
    }
}

fn check_trace(before: f64, after: f64) -> Result<()> {
    let deficit = before - after;
    if deficit > LossChannel::TRACE_TOL {
        return Err(FockError::TraceLoss { deficit });
    }
    Ok(())
}

pub fn apply_loss(rho: &DensityMatrix, channel: &LossChannel) -> Result<DensityMatrix> {
    let trunc = rho.trunc();
    let d = trunc.dim();
    let mut out = DMatrix::from_element(d, d, ZERO);
    for k in channel.kraus_operators(trunc) {
        out += k.matrix() * rho.matrix() * k.matrix().adjoint();
    }
    let out = DensityMatrix::new(out, trunc)?;
    check_trace(rho.trace(), out.trace())?;
    Ok(out)
}

/// Loss on one mode of a joint two-mode density.
pub fn apply_loss_two_mode(rho: &TwoModeDensity, mode: Mode, channel: &LossChannel) -> Result<TwoModeDensity> {
    let trunc = rho.trunc();
    let d2 = trunc.dim() * trunc.dim();
    let mut out = DMatrix::from_element(d2, d2, ZERO);
    for k in channel.kraus_operators(trunc) {
        let local = TwoModeOperator::local(&k, mode);
        out += local.matrix() * rho.matrix() * local.matrix().adjoint();
    }
    let out = TwoModeDensity::new(out, trunc)?;
    check_trace(rho.trace(), out.trace())?;
    Ok(out)
}

/// `D(γ) = exp(γâ† − γ*â)` exponentiated in the truncated space.
///
/// Exactly unitary, but deviates from the true displacement near the top
/// levels once `|γ|√dim` is not small.
pub fn displacement(gamma: C64, trunc: TruncationConfig) -> Operator {
    let a = annihilation_op(trunc);
    let generator = a.matrix().adjoint() * gamma - a.matrix() * gamma.conj();
    Operator::new(generator.exp(), trunc).expect("square by construction")
}

/// Matrix elements `⟨m|D(γ)|n⟩` of the untruncated displacement for
/// `m, n < dim`, from `√(m+1) d_{m+1,n} = √n d_{m,n−1} + γ d_{m,n}` seeded by
/// `d_{0,n} = e^{−|γ|²/2} (−γ*)ⁿ/√n!`.
pub fn displacement_elements(gamma: C64, trunc: TruncationConfig) -> Operator {
    let d = trunc.dim();
    let mut matrix = DMatrix::from_element(d, d, ZERO);
    let mut c = C64::from((-0.5 * gamma.norm_sqr()).exp());
    for n in 0..d {
        matrix[(0, n)] = c;
        c = c * (-gamma.conj()) / ((n + 1) as f64).sqrt();
    }
    for m in 0..d - 1 {
        let inv = 1.0 / ((m + 1) as f64).sqrt();
        for n in 0..d {
            let down = if n > 0 {
                matrix[(m, n - 1)] * (n as f64).sqrt()
            } else {
                ZERO
            };
            matrix[(m + 1, n)] = (down + gamma * matrix[(m, n)]) * inv;
        }
    }
    Operator::new(matrix, trunc).expect("square by construction")
}
