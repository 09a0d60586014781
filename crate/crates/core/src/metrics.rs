//! Fidelities, the Wigner function and the displacement quantum Fisher
//! information.

use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::FRAC_2_PI;

use nalgebra::DMatrix;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{cat_circuit, cat_target, HERALD_MODE};
use crate::detection::pnrd_outcome_distribution;
use crate::error::{FockError, Result};
use crate::fock::{DensityMatrix, FockState, TruncationConfig, C64, ZERO};
use crate::optics::{displacement, displacement_elements};

/// Eigenvalues below `−NEGATIVITY_TOL` mean the input is not a state; small
/// negative ones are drift and are clamped to zero.
pub const NEGATIVITY_TOL: f64 = 1e-6;
/// Eigenvalues below this are left out of the support.
const SUPPORT_TOL: f64 = 1e-13;
const IMAG_TOL: f64 = 1e-9;

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, target: &FockState) -> Result<f64> {
    rho.trunc().ensure_same(&target.trunc())?;
    let v = target.amplitudes();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Support of a state: eigenvalues and eigenvectors above [`SUPPORT_TOL`].
struct Support {
    sqrt_values: Vec<f64>,
    vectors: DMatrix<C64>,
}

fn support(rho: &DensityMatrix) -> Result<Support> {
    let (values, vectors) = rho.eigen();
    if values[0] < -NEGATIVITY_TOL {
        return Err(FockError::NonPositive { eigenvalue: values[0] });
    }
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > SUPPORT_TOL).collect();
    if keep.is_empty() {
        return Err(FockError::ZeroNorm { norm: 0.0 });
    }
    Ok(Support {
        sqrt_values: keep.iter().map(|&i| values[i].sqrt()).collect(),
        vectors: vectors.select_columns(&keep),
    })
}

/// Sum of singular values of `diag(√a) A diag(√b)`.
fn weighted_nuclear_norm(left: &[f64], core: DMatrix<C64>, right: &[f64]) -> f64 {
    let weighted = DMatrix::from_fn(core.nrows(), core.ncols(), |i, j| core[(i, j)] * (left[i] * right[j]));
    weighted.singular_values().iter().sum()
}

/// Uhlmann fidelity `(Tr√(√ρ σ √ρ))²`.
///
/// Computed as the squared nuclear norm of `√ρ√σ`, which avoids square roots
/// of nearly vanishing eigenvalues.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.trunc().ensure_same(&sigma.trunc())?;
    let a = support(rho)?;
    let b = support(sigma)?;
    let overlap = a.vectors.adjoint() * &b.vectors;
    let root = weighted_nuclear_norm(&a.sqrt_values, overlap, &b.sqrt_values);
    Ok((root * root).clamp(0.0, 1.0))
}

/// Phase-space sampling window; `x` and `p` are quadratures with
/// `q̂ = (â + â†)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_x: usize,
    pub n_p: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, n_x: usize, n_p: usize) -> Result<Self> {
        let bounds = [x_min, x_max, p_min, p_max];
        if bounds.iter().any(|b| !b.is_finite()) || x_max < x_min || p_max < p_min {
            return Err(FockError::InvalidArgument(
                "grid bounds must be finite and ordered".into(),
            ));
        }
        if n_x == 0 || n_p == 0 {
            return Err(FockError::InvalidArgument(
                "grid needs at least one point per axis".into(),
            ));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            p_min,
            p_max,
            n_x,
            n_p,
        })
    }

    /// Square `n × n` grid over `[−half_width, half_width]²`.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![min];
        }
        let step = (max - min) / (n - 1) as f64;
        (0..n).map(|i| min + i as f64 * step).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.n_x)
    }

    pub fn ps(&self) -> Vec<f64> {
        Self::axis(self.p_min, self.p_max, self.n_p)
    }

    /// Largest `|γ|²` on the grid.
    pub fn max_gamma_sqr(&self) -> f64 {
        let x = self.x_min.abs().max(self.x_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        0.5 * (x * x + p * p)
    }
}

/// Wigner function samples, row `i` at `p = ps[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_x: usize,
    pub n_p: usize,
    /// Row-major `n_p × n_x`.
    pub values: Vec<f64>,
    /// False when some point has `|γ|² > dim/4`.
    pub reliable: bool,
}

impl WignerGrid {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            x_min: self.x_min,
            x_max: self.x_max,
            p_min: self.p_min,
            p_max: self.p_max,
            n_x: self.n_x,
            n_p: self.n_p,
        }
    }

    pub fn value(&self, ip: usize, ix: usize) -> f64 {
        self.values[ip * self.n_x + ix]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_x)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal `∬ W dx dp` over the window.
    pub fn integral(&self) -> f64 {
        let weights = |n: usize, min: f64, max: f64| -> Vec<f64> {
            if n == 1 {
                return vec![0.0];
            }
            let h = (max - min) / (n - 1) as f64;
            (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
        };
        let wx = weights(self.n_x, self.x_min, self.x_max);
        let wp = weights(self.n_p, self.p_min, self.p_max);
        self.rows()
            .zip(&wp)
            .map(|(row, w)| w * row.iter().zip(&wx).map(|(v, u)| v * u).sum::<f64>())
            .sum()
    }
}

/// `W(γ) = (2/π) Tr[ρ D(γ) Π D†(γ)]` evaluated as `(2/π) Tr[ρ D(2γ) Π]`.
fn wigner_at(rho: &DensityMatrix, gamma: C64) -> C64 {
    let d = rho.dim();
    let disp = displacement_elements(gamma * 2.0, rho.trunc());
    let disp = disp.matrix();
    let m = rho.matrix();
    let mut acc = ZERO;
    for col in 0..d {
        let mut column = ZERO;
        for row in 0..d {
            column += m[(col, row)] * disp[(row, col)];
        }
        if col % 2 == 0 {
            acc += column;
        } else {
            acc -= column;
        }
    }
    acc * FRAC_2_PI
}

/// Wigner function at quadrature point `(x, p)`, `γ = (x + ip)/√2`.
pub fn wigner_point(rho: &DensityMatrix, x: f64, p: f64) -> Result<f64> {
    check_hermitian(rho)?;
    real_part(wigner_at(rho, C64::new(x, p) * FRAC_1_SQRT_2))
}

fn check_hermitian(rho: &DensityMatrix) -> Result<()> {
    let err = rho.hermiticity_error();
    if err > IMAG_TOL {
        return Err(FockError::InvalidArgument(format!(
            "density matrix is not Hermitian (error {err:.3e})"
        )));
    }
    Ok(())
}

fn real_part(w: C64) -> Result<f64> {
    if w.im.abs() > IMAG_TOL {
        return Err(FockError::InvalidArgument(format!(
            "Wigner value has imaginary part {:.3e}",
            w.im
        )));
    }
    Ok(w.re)
}

/// Samples the Wigner function of `rho` on `grid`.
pub fn wigner(rho: &DensityMatrix, grid: &GridSpec) -> Result<WignerGrid> {
    check_hermitian(rho)?;
    let xs = grid.xs();
    let ps = grid.ps();
    let row = |p: &f64| -> Result<Vec<f64>> {
        xs.iter()
            .map(|&x| real_part(wigner_at(rho, C64::new(x, *p) * FRAC_1_SQRT_2)))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<Vec<f64>>> = ps.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<Vec<f64>>> = ps.iter().map(row).collect();
    let mut values = Vec::with_capacity(grid.n_x * grid.n_p);
    for r in rows {
        values.extend(r?);
    }
    Ok(WignerGrid {
        x_min: grid.x_min,
        x_max: grid.x_max,
        p_min: grid.p_min,
        p_max: grid.p_max,
        n_x: grid.n_x,
        n_p: grid.n_p,
        values,
        reliable: grid.max_gamma_sqr() <= rho.dim() as f64 / 4.0,
    })
}

/// Finite-difference displacement QFI along direction `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiEstimate {
    /// Richardson-extrapolated value.
    pub value: f64,
    pub epsilon_used: f64,
    pub phi: f64,
    /// `|value − estimate at ε/2|`.
    pub richardson_residual: f64,
}

pub const DEFAULT_QFI_EPSILON: f64 = 1e-3;

/// `8(1 − √F(ρ, D ρ D†))/ε²` with `D = D(εe^{iφ})`, at `ε` and `ε/2`,
/// combined by one Richardson step.
pub fn qfi_displacement(rho: &DensityMatrix, phi: f64, epsilon: f64) -> Result<QfiEstimate> {
    if !(1e-4..=1e-1).contains(&epsilon) {
        return Err(FockError::InvalidArgument(format!(
            "epsilon must lie in [1e-4, 1e-1], got {epsilon}"
        )));
    }
    let s = support(rho)?;
    // D ρ D† shares the spectrum of ρ, so √F is the nuclear norm of √Λ V†DV √Λ.
    let estimate = |eps: f64| {
        let d = displacement(C64::from_polar(eps, phi), rho.trunc());
        let core = s.vectors.adjoint() * d.matrix() * &s.vectors;
        let root = weighted_nuclear_norm(&s.sqrt_values, core, &s.sqrt_values);
        8.0 * (1.0 - root) / (eps * eps)
    };
    let coarse = estimate(epsilon);
    let fine = estimate(0.5 * epsilon);
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(QfiEstimate {
        value: value.max(0.0),
        epsilon_used: epsilon,
        phi,
        richardson_residual: (value - fine).abs(),
    })
}

/// Fidelity of one heralded outcome with its four-cat target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeFidelity {
    pub n: usize,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldedFidelity {
    pub mean: f64,
    pub std: f64,
    pub per_outcome: Vec<OutcomeFidelity>,
}

impl HeraldedFidelity {
    fn weighted(outcomes: &[OutcomeFidelity]) -> (f64, f64) {
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        if total <= 0.0 {
            return (f64::NAN, f64::NAN);
        }
        let mean = outcomes.iter().map(|o| o.probability * o.fidelity).sum::<f64>() / total;
        let var = outcomes
            .iter()
            .map(|o| o.probability * (o.fidelity - mean).powi(2))
            .sum::<f64>()
            / total;
        (mean, var.sqrt())
    }

    /// Probability-weighted mean over outcomes with `n ≡ k (mod 4)`.
    pub fn class_mean(&self, k: usize) -> f64 {
        let class: Vec<OutcomeFidelity> = self.per_outcome.iter().copied().filter(|o| o.n % 4 == k % 4).collect();
        Self::weighted(&class).0
    }

    /// `max − min` of the per-outcome fidelities.
    pub fn spread(&self) -> f64 {
        let fs = self.per_outcome.iter().map(|o| o.fidelity);
        fs.clone().fold(f64::NEG_INFINITY, f64::max) - fs.fold(f64::INFINITY, f64::min)
    }
}

/// Cat circuit with a PNRD of efficiency `eta`, scored against
/// `|Φ_{n mod 4}(αe^{iπ/4})⟩` for each outcome `n ≤ n_cutoff`.
pub fn mean_heralded_fidelity(alpha: f64, eta: f64, n_cutoff: usize) -> Result<HeraldedFidelity> {
    mean_heralded_fidelity_with(alpha, eta, n_cutoff, TruncationConfig::for_amplitude(alpha))
}

pub fn mean_heralded_fidelity_with(
    alpha: f64,
    eta: f64,
    n_cutoff: usize,
    trunc: TruncationConfig,
) -> Result<HeraldedFidelity> {
    let psi = cat_circuit(alpha, trunc)?;
    let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, eta, n_cutoff)?;
    let targets = (0..4)
        .map(|k| cat_target(alpha, k, trunc))
        .collect::<Result<Vec<_>>>()?;
    let mut per_outcome = Vec::new();
    for rec in dist.records().iter().filter(|r| r.is_heralded()) {
        per_outcome.push(OutcomeFidelity {
            n: rec.n(),
            probability: rec.probability(),
            fidelity: fidelity_pure(rec.conditional()?, &targets[rec.n() % 4])?,
        });
    }
    let (mean, std) = HeraldedFidelity::weighted(&per_outcome);
    Ok(HeraldedFidelity { mean, std, per_outcome })
}
