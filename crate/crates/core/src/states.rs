//! Constructors for the coherent, cat, squeezed and photon-subtracted states
//! used by the circuits.
//!
//! Constructors evaluate the exact Fock series past the truncation, reject the
//! state if the discarded probability exceeds `trunc.tail_tol()`, and
//! renormalize what is kept.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::fock::{annihilation_op, FockState, Normalize, TruncationConfig, C64, ONE, ZERO, ZERO_NORM_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CatAxis {
    /// Components `|±α⟩`.
    Real,
    /// Components `|±iα⟩`.
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatPhase {
    pub axis: CatAxis,
    pub parity: Parity,
}

impl CatPhase {
    pub const REAL_EVEN: CatPhase = CatPhase {
        axis: CatAxis::Real,
        parity: Parity::Even,
    };
    pub const IMAGINARY_EVEN: CatPhase = CatPhase {
        axis: CatAxis::Imaginary,
        parity: Parity::Even,
    };
}

/// Which squeezing operator is applied to the vacuum: `Ŝ = e^{r/2(â² − â†²)}`
/// or its adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SqueezeSign {
    S,
    SDagger,
}

impl SqueezeSign {
    /// Sign of the `|2⟩` coefficient relative to `|0⟩`.
    fn ratio_sign(self) -> f64 {
        match self {
            SqueezeSign::S => -1.0,
            SqueezeSign::SDagger => 1.0,
        }
    }
}

/// `β = α e^{iπ/4}`, the output amplitude of the balanced splitter for cat
/// inputs of amplitude `α`.
pub fn rotate_eighth(alpha: C64) -> C64 {
    alpha * C64::from_polar(1.0, FRAC_PI_4)
}

/// Number of series terms needed so that a Poisson tail of mean `|z|²` is far
/// below double precision.
fn series_extent(z_abs: f64, dim: usize) -> usize {
    let extent = (z_abs * z_abs + 15.0 * z_abs + 60.0).ceil() as usize;
    extent.max(dim)
}

/// `e^{−|z|²/2} zⁿ/√n!` for `n < len`.
pub(crate) fn coherent_coefficients(z: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut c = C64::from((-0.5 * z.norm_sqr()).exp());
    for n in 0..len {
        out.push(c);
        c = c * z / ((n + 1) as f64).sqrt();
    }
    out
}

/// Keeps the first `dim` coefficients of an (unnormalized) series after
/// checking the discarded tail.
fn truncate_series(coefficients: &[C64], trunc: TruncationConfig) -> Result<FockState> {
    let dim = trunc.dim();
    let within: f64 = coefficients[..dim].iter().map(|c| c.norm_sqr()).sum();
    let beyond: f64 = coefficients[dim..].iter().map(|c| c.norm_sqr()).sum();
    let total = within + beyond;
    if total.sqrt() < ZERO_NORM_TOL {
        return Err(FockError::ZeroNorm { norm: total.sqrt() });
    }
    let tail = beyond / total;
    if tail > trunc.tail_tol() {
        return Err(FockError::Truncation {
            tail,
            tol: trunc.tail_tol(),
            dim,
        });
    }
    let kept = FockState::new(DVector::from_column_slice(&coefficients[..dim]), trunc)?;
    Ok(kept.normalized()?.0)
}

pub fn coherent(alpha: C64, trunc: TruncationConfig) -> Result<FockState> {
    let len = series_extent(alpha.norm(), trunc.dim());
    truncate_series(&coherent_coefficients(alpha, len), trunc)
}

/// Normalized `|c⟩ ± |−c⟩` with `c = α` or `c = iα`.
pub fn two_cat(alpha: C64, phase: CatPhase, trunc: TruncationConfig) -> Result<FockState> {
    let c = match phase.axis {
        CatAxis::Real => alpha,
        CatAxis::Imaginary => alpha * C64::i(),
    };
    let keep_odd = phase.parity == Parity::Odd;
    let len = series_extent(alpha.norm(), trunc.dim());
    let coefficients: Vec<C64> = coherent_coefficients(c, len)
        .into_iter()
        .enumerate()
        .map(|(n, z)| if (n % 2 == 1) == keep_odd { z * 2.0 } else { ZERO })
        .collect();
    truncate_series(&coefficients, trunc)
}

/// `√(2(1 + e^{−2|α|²}))`, the norm of `|α⟩ + |−α⟩`.
pub fn two_cat_normalization(alpha: f64) -> f64 {
    (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt()
}

fn check_class(k: usize) -> Result<()> {
    if k > 3 {
        return Err(FockError::InvalidArgument(format!(
            "four-component cat index must be 0..=3, got {k}"
        )));
    }
    Ok(())
}

/// `|Φ_k(β)⟩ ∝ Σ_{n ≡ k mod 4} βⁿ/√n! |n⟩`.
pub fn four_cat(beta: C64, k: usize, trunc: TruncationConfig) -> Result<FockState> {
    check_class(k)?;
    let len = series_extent(beta.norm(), trunc.dim());
    let coefficients: Vec<C64> = coherent_coefficients(beta, len)
        .into_iter()
        .enumerate()
        .map(|(n, z)| if n % 4 == k { z } else { ZERO })
        .collect();
    truncate_series(&coefficients, trunc)
}

/// `|Φ_k(β)⟩` assembled from the four coherent components
/// `|β⟩ + (−1)^k|−β⟩ + (−i)^k|iβ⟩ + i^k|−iβ⟩`.
pub fn four_cat_from_coherents(beta: C64, k: usize, trunc: TruncationConfig) -> Result<FockState> {
    check_class(k)?;
    let i = C64::i();
    let weights = [ONE, (-ONE).powu(k as u32), (-i).powu(k as u32), i.powu(k as u32)];
    let centers = [beta, -beta, i * beta, -i * beta];
    let mut sum = DVector::from_element(trunc.dim(), ZERO);
    for (w, c) in weights.iter().zip(centers) {
        sum += coherent(c, trunc)?.amplitudes() * *w;
    }
    Ok(FockState::new(sum, trunc)?.normalized()?.0)
}

/// Exact squeezed-vacuum coefficients for `n < len`, without truncation
/// renormalization.
pub(crate) fn squeezed_coefficients(r: f64, sign: SqueezeSign, len: usize) -> Vec<C64> {
    let t = r.tanh() * sign.ratio_sign();
    let mut out = vec![ZERO; len];
    let mut c = 1.0 / r.cosh().sqrt();
    let mut m = 0usize;
    while 2 * m < len {
        out[2 * m] = C64::from(c);
        c *= t * ((2 * m + 1) as f64 / (2 * m + 2) as f64).sqrt();
        m += 1;
    }
    out
}

fn check_squeezing(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(FockError::InvalidArgument(format!(
            "squeezing parameter must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}

fn squeezed_tail(r: f64, sign: SqueezeSign, trunc: TruncationConfig) -> Result<()> {
    let within: f64 = squeezed_coefficients(r, sign, trunc.dim())
        .iter()
        .map(|c| c.norm_sqr())
        .sum();
    let tail = (1.0 - within).max(0.0);
    if tail > trunc.tail_tol() {
        return Err(FockError::Truncation {
            tail,
            tol: trunc.tail_tol(),
            dim: trunc.dim(),
        });
    }
    Ok(())
}

/// `Ŝ|0⟩` (or `Ŝ†|0⟩`) computed by exponentiating the generator.
///
/// The exponential is taken in a working space twice as large as `trunc`
/// and then cut back; exponentiating directly in `trunc` lets the boundary
/// leak into the low levels well above the size of the discarded tail.
pub fn squeezed_vacuum(r: f64, sign: SqueezeSign, trunc: TruncationConfig) -> Result<FockState> {
    check_squeezing(r)?;
    squeezed_tail(r, sign, trunc)?;
    let work = TruncationConfig::with_dim(2 * trunc.dim())?;
    let a = annihilation_op(work);
    let a2 = &a * &a;
    let generator = a2.matrix() - a2.matrix().adjoint();
    let scale = match sign {
        SqueezeSign::S => 0.5 * r,
        SqueezeSign::SDagger => -0.5 * r,
    };
    let unitary = (generator * C64::from(scale)).exp();
    let kept = unitary.view((0, 0), (trunc.dim(), 1)).column(0).into_owned();
    Ok(FockState::new(kept, trunc)?.normalized()?.0)
}

/// Closed-form squeezed vacuum, `(cosh r)^{−1/2} Σ (∓tanh r)^m √((2m)!)/(2^m m!) |2m⟩`.
pub fn squeezed_vacuum_series(r: f64, sign: SqueezeSign, trunc: TruncationConfig) -> Result<FockState> {
    check_squeezing(r)?;
    squeezed_tail(r, sign, trunc)?;
    let state = FockState::from_vec(squeezed_coefficients(r, sign, trunc.dim()), trunc)?;
    Ok(state.normalized()?.0)
}

/// Normalized `â|ψ⟩` together with `‖â|ψ⟩‖`.
pub fn photon_subtract(state: &FockState) -> Result<(FockState, f64)> {
    annihilation_op(state.trunc()).apply(state)?.normalized()
}
