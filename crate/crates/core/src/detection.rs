//! Detector models and heralded conditional states.
//!
//! An inefficient detector is an ideal one behind a pure-loss channel. The
//! loss acts on the measured mode of the joint state, so the heralded state
//! keeps the correlations carried off by the lost photons.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::fock::{
    hermitian_eigen, DensityMatrix, FockState, Mode, Normalize, Operator, TruncationConfig, TwoModeDensity,
    TwoModeState, C64, ZERO, ZERO_NORM_TOL,
};
use crate::optics::loss_probability;

/// Outcome count used for outcome distributions unless stated otherwise.
pub const DEFAULT_OUTCOME_CUTOFF: usize = 20;

const POVM_TOL: f64 = 1e-12;

/// One detector outcome and the state it heralds on the other mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldRecord {
    n: usize,
    probability: f64,
    conditional: Option<DensityMatrix>,
}

impl HeraldRecord {
    pub(crate) fn from_unnormalized(n: usize, rho: DensityMatrix) -> Self {
        let probability = rho.trace();
        let conditional = if probability < ZERO_NORM_TOL {
            None
        } else {
            Some(DensityMatrix::new(rho.matrix() / C64::from(probability), rho.trunc()).expect("same shape"))
        };
        HeraldRecord {
            n,
            probability,
            conditional,
        }
    }

    /// Record for a branch computed without cancellation, so that any
    /// non-zero norm is meaningful and the conditional is kept.
    pub(crate) fn from_exact_branch(n: usize, branch: &FockState) -> Result<Self> {
        let probability = branch.norm().powi(2);
        let (state, _) = branch.normalized()?;
        Ok(HeraldRecord {
            n,
            probability,
            conditional: Some(state.to_density()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn is_heralded(&self) -> bool {
        self.conditional.is_some()
    }

    /// The normalized heralded state, or `ZeroNorm` for an outcome that
    /// (numerically) never occurs.
    pub fn conditional(&self) -> Result<&DensityMatrix> {
        self.conditional.as_ref().ok_or(FockError::ZeroNorm {
            norm: self.probability.max(0.0).sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectorKind {
    /// Photon-number resolving.
    Pnrd,
    /// Single click/no-click detector.
    OnOff,
    /// The mode split evenly over `m` on-off detectors.
    MultiplexedOnOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    kind: DetectorKind,
    eta: f64,
    m: usize,
}

impl DetectorModel {
    fn new(kind: DetectorKind, eta: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(FockError::InvalidArgument(format!(
                "efficiency must lie in [0, 1], got {eta}"
            )));
        }
        if m == 0 {
            return Err(FockError::InvalidArgument("need at least one detector".into()));
        }
        Ok(DetectorModel { kind, eta, m })
    }

    pub fn pnrd(eta: f64) -> Result<Self> {
        Self::new(DetectorKind::Pnrd, eta, 1)
    }

    pub fn onoff(eta: f64) -> Result<Self> {
        Self::new(DetectorKind::OnOff, eta, 1)
    }

    pub fn multiplexed(m: usize, eta: f64) -> Result<Self> {
        Self::new(DetectorKind::MultiplexedOnOff, eta, m)
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Probability of reporting `outcome` given `photons` incident photons.
    ///
    /// For the PNRD the outcome is the photon count; for on-off detectors it
    /// is the number of clicks, where multiplexed detection resolves only 0
    /// or exactly 1 click.
    pub fn outcome_weight(&self, outcome: usize, photons: usize) -> Result<f64> {
        let eta = self.eta;
        match (self.kind, outcome) {
            (DetectorKind::Pnrd, n) => Ok(if n <= photons {
                loss_probability(photons, photons - n, eta)
            } else {
                0.0
            }),
            (DetectorKind::OnOff | DetectorKind::MultiplexedOnOff, 0) => Ok((1.0 - eta).powi(photons as i32)),
            (DetectorKind::OnOff, 1) => Ok(1.0 - (1.0 - eta).powi(photons as i32)),
            (DetectorKind::MultiplexedOnOff, 1) => {
                // every detected photon lands in the same one of the m detectors
                let m = self.m as f64;
                let p = photons as i32;
                Ok((m * ((1.0 - eta + eta / m).powi(p) - (1.0 - eta).powi(p))).max(0.0))
            }
            (kind, outcome) => Err(FockError::InvalidArgument(format!(
                "outcome {outcome} is not resolved by a {kind:?} detector"
            ))),
        }
    }

    /// Diagonal POVM element for `outcome`.
    pub fn povm_element(&self, outcome: usize, trunc: TruncationConfig) -> Result<Operator> {
        let diagonal = (0..trunc.dim())
            .map(|photons| self.outcome_weight(outcome, photons))
            .collect::<Result<Vec<f64>>>()?;
        Operator::from_diagonal(&diagonal, trunc)
    }
}

/// Ideal photon counting of `measured` with outcome `n`.
pub fn pnrd_project(psi: &TwoModeState, measured: Mode, n: usize) -> Result<HeraldRecord> {
    let branch = psi.project(measured, n)?;
    Ok(HeraldRecord::from_unnormalized(n, branch.to_density()))
}

/// Heralded states for outcomes `0..=n_cutoff` of a PNRD of efficiency `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    records: Vec<HeraldRecord>,
    residual: f64,
}

impl OutcomeDistribution {
    pub fn records(&self) -> &[HeraldRecord] {
        &self.records
    }

    /// Probability of outcomes above the cutoff (and of truncated levels).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(HeraldRecord::probability).sum()
    }
}

/// Loss of transmission `eta` on `measured`, then ideal counting.
///
/// Outcome `n` heralds `Σ_{m ≥ n} P(m−n lost | m) |v_m⟩⟨v_m|`, with `v_m` the
/// unnormalized branch of the joint state in which `measured` holds `m`
/// photons. All Kraus terms allowed by the truncation are kept.
pub fn pnrd_outcome_distribution(
    psi: &TwoModeState,
    measured: Mode,
    eta: f64,
    n_cutoff: usize,
) -> Result<OutcomeDistribution> {
    let detector = DetectorModel::pnrd(eta)?;
    let trunc = psi.trunc();
    let d = trunc.dim();
    if n_cutoff >= d {
        return Err(FockError::InvalidArgument(format!(
            "outcome cutoff {n_cutoff} must be below dim {d}"
        )));
    }
    let branches = (0..d).map(|m| psi.project(measured, m)).collect::<Result<Vec<_>>>()?;
    let norm_sq = psi.norm().powi(2);
    let mut records = Vec::with_capacity(n_cutoff + 1);
    for n in 0..=n_cutoff {
        let terms = branches
            .iter()
            .enumerate()
            .skip(n)
            .map(|(m, v)| (detector.outcome_weight(n, m).expect("pnrd resolves all counts"), v))
            .filter(|(w, _)| *w > 0.0);
        let rho = DensityMatrix::mixture(terms, trunc)?;
        records.push(HeraldRecord::from_unnormalized(n, rho));
    }
    let captured: f64 = records.iter().map(HeraldRecord::probability).sum();
    Ok(OutcomeDistribution {
        records,
        residual: norm_sq - captured,
    })
}

/// `Σ_{n≥1} m^{−(n−1)} |n⟩⟨n|`: exactly one click among `m` ideal on-off
/// detectors sharing the mode. `m = 1` is the plain click projector `I − |0⟩⟨0|`.
pub fn onoff_click_povm(m: usize, trunc: TruncationConfig) -> Result<Operator> {
    if m == 0 {
        return Err(FockError::InvalidArgument("need at least one detector".into()));
    }
    let diagonal: Vec<f64> = (0..trunc.dim())
        .map(|n| if n == 0 { 0.0 } else { (m as f64).powi(-(n as i32 - 1)) })
        .collect();
    Operator::from_diagonal(&diagonal, trunc)
}

fn check_povm(povm: &Operator) -> Result<()> {
    if !povm.is_hermitian(POVM_TOL) {
        return Err(FockError::InvalidArgument("POVM element is not Hermitian".into()));
    }
    let (values, _) = hermitian_eigen(povm.matrix());
    if values[0] < -POVM_TOL || values[values.len() - 1] > 1.0 + POVM_TOL {
        return Err(FockError::InvalidArgument(
            "POVM element eigenvalues must lie in [0, 1]".into(),
        ));
    }
    Ok(())
}

fn sqrt_psd(matrix: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(matrix);
    let roots = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|&v| C64::from(v.max(0.0).sqrt())));
    &vectors * DMatrix::from_diagonal(&roots) * vectors.adjoint()
}

fn finish_conditioning(rho: DensityMatrix) -> Result<(f64, DensityMatrix)> {
    let probability = rho.trace();
    if probability < ZERO_NORM_TOL {
        return Err(FockError::ZeroNorm {
            norm: probability.max(0.0).sqrt(),
        });
    }
    let trunc = rho.trunc();
    Ok((
        probability,
        DensityMatrix::new(rho.matrix() / C64::from(probability), trunc)?,
    ))
}

/// Conditions a joint density on the POVM element `povm` of `measured`.
///
/// Returns `Tr[(I⊗Π)ρ]` and the normalized state of the other mode.
pub fn condition_on_povm(rho: &TwoModeDensity, measured: Mode, povm: &Operator) -> Result<(f64, DensityMatrix)> {
    rho.trunc().ensure_same(&povm.trunc())?;
    check_povm(povm)?;
    let trunc = rho.trunc();
    let d = trunc.dim();
    let m = rho.matrix();
    let flat = |kept: usize, meas: usize| match measured {
        Mode::Second => kept * d + meas,
        Mode::First => meas * d + kept,
    };
    let reduced = if povm.is_diagonal(0.0) {
        let weights = povm.diagonal_real();
        DMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .filter(|&k| weights[k] != 0.0)
                .map(|k| m[(flat(i, k), flat(j, k))] * weights[k])
                .sum()
        })
    } else {
        let root = sqrt_psd(povm.matrix());
        // (I ⊗ √Π) ρ (I ⊗ √Π), traced over the measured mode
        DMatrix::from_fn(d, d, |i, j| {
            let mut acc = ZERO;
            for k in 0..d {
                for p in 0..d {
                    let left = root[(k, p)];
                    if left == ZERO {
                        continue;
                    }
                    for q in 0..d {
                        acc += left * m[(flat(i, p), flat(j, q))] * root[(q, k)];
                    }
                }
            }
            acc
        })
    };
    finish_conditioning(DensityMatrix::new(reduced, trunc)?)
}

/// [`condition_on_povm`] for a pure joint state and a diagonal POVM, without
/// forming the joint density.
pub fn condition_pure_on_povm(psi: &TwoModeState, measured: Mode, povm: &Operator) -> Result<(f64, DensityMatrix)> {
    psi.trunc().ensure_same(&povm.trunc())?;
    check_povm(povm)?;
    if !povm.is_diagonal(0.0) {
        return condition_on_povm(&psi.to_density(), measured, povm);
    }
    let branches = (0..psi.dim())
        .map(|m| psi.project(measured, m))
        .collect::<Result<Vec<_>>>()?;
    let weights = povm.diagonal_real();
    let terms = weights
        .iter()
        .zip(&branches)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, v)| (*w, v));
    finish_conditioning(DensityMatrix::mixture(terms, psi.trunc())?)
}

/// Probability that the cat circuit's detector sees vacuum,
/// `e^{−|β|²}(1 + e^{−2|β|²} + 2e^{−|β|²}cos|β|²)/(1 + e^{−2|β|²})²`.
pub fn success_probability_closed_form(beta: C64) -> f64 {
    let b2 = beta.norm_sqr();
    let e1 = (-b2).exp();
    let e2 = (-2.0 * b2).exp();
    e1 * (1.0 + e2 + 2.0 * e1 * b2.cos()) / (1.0 + e2).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cat_circuit, cat_target, HERALD_MODE};
    use crate::fock::{tensor, FockState};
    use crate::optics::{apply_loss_two_mode, LossChannel};
    use crate::states::coherent;

    fn trunc(d: usize) -> TruncationConfig {
        TruncationConfig::with_dim(d).unwrap()
    }

    fn pure_fidelity(rho: &DensityMatrix, target: &FockState) -> f64 {
        let v = target.amplitudes();
        (v.adjoint() * rho.matrix() * v)[(0, 0)].re
    }

    #[test]
    fn vacuum_projection() {
        let t = trunc(5);
        let vac = TwoModeState::basis(0, 0, t).unwrap();
        let hit = pnrd_project(&vac, Mode::Second, 0).unwrap();
        assert_eq!(hit.probability(), 1.0);
        assert_eq!(hit.conditional().unwrap(), &FockState::vacuum(t).to_density());
        let miss = pnrd_project(&vac, Mode::Second, 1).unwrap();
        assert_eq!(miss.probability(), 0.0);
        assert!(!miss.is_heralded());
        assert!(matches!(miss.conditional(), Err(FockError::ZeroNorm { .. })));
        assert!(pnrd_project(&vac, Mode::Second, 5).is_err());
    }

    #[test]
    fn every_ideal_outcome_heralds_a_four_cat() {
        let alpha = 2.0;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        for n in 0..=12 {
            let rec = pnrd_project(&psi, HERALD_MODE, n).unwrap();
            let target = cat_target(alpha, n % 4, t).unwrap();
            let f = pure_fidelity(rec.conditional().unwrap(), &target);
            assert!((f - 1.0).abs() < 1e-9, "n={n} F={f}");
        }
    }

    #[test]
    fn outcome_probabilities_follow_the_poisson_comb() {
        let alpha: f64 = 1.5;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        let b2 = alpha * alpha;
        let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
        // ‖|β⟩ + (−1)^k|−β⟩ + (−i)^k|iβ⟩ + i^k|−iβ⟩‖² = 16 e^{−|β|²} Σ_{m≡k} |β|^{2m}/m!
        let class_norm = |k: usize| {
            16.0 * (-b2).exp()
                * (0..80)
                    .filter(|m| m % 4 == k)
                    .map(|m| b2.powi(m as i32) / fact(m))
                    .sum::<f64>()
        };
        let n_alpha4 = (2.0 * (1.0 + (-2.0 * b2).exp())).powi(2);
        for n in 0..=15 {
            let expected = (-b2).exp() * b2.powi(n as i32) / fact(n) * class_norm(n % 4) / n_alpha4;
            let got = pnrd_project(&psi, HERALD_MODE, n).unwrap().probability();
            assert!((got - expected).abs() < 1e-9, "n={n}: {got} vs {expected}");
        }
    }

    #[test]
    fn lossless_distribution_reduces_to_projection() {
        let alpha = 1.2;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, 1.0, 12).unwrap();
        for rec in dist.records() {
            let direct = pnrd_project(&psi, HERALD_MODE, rec.n()).unwrap();
            assert!((rec.probability() - direct.probability()).abs() < 1e-12);
            let diff = rec.conditional().unwrap().matrix() - direct.conditional().unwrap().matrix();
            assert!(diff.camax() < 1e-12);
        }
        assert!(dist.residual() >= -1e-12);
        assert!(pnrd_outcome_distribution(&psi, HERALD_MODE, 1.0, t.dim()).is_err());
    }

    #[test]
    fn blind_detector_leaves_the_reduced_state() {
        let alpha = 1.0;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, 0.0, 5).unwrap();
        let first = &dist.records()[0];
        assert!((first.probability() - 1.0).abs() < 1e-12);
        let reduced = psi.reduced(Mode::First);
        assert!((first.conditional().unwrap().matrix() - reduced.matrix()).camax() < 1e-12);
        assert!(dist.records()[1..].iter().all(|r| r.probability() == 0.0));
    }

    #[test]
    fn loss_before_counting_matches_dense_channel() {
        let t = trunc(7).with_tail_tol(1e-2).unwrap();
        let psi = cat_circuit(0.6, t).unwrap();
        let eta = 0.8;
        let fast = pnrd_outcome_distribution(&psi, Mode::Second, eta, 4).unwrap();
        let lossy = apply_loss_two_mode(&psi.to_density(), Mode::Second, &LossChannel::new(eta, 6).unwrap()).unwrap();
        for rec in fast.records() {
            let projector = FockState::basis(rec.n(), t).unwrap().to_density();
            let projector = Operator::new(projector.matrix().clone(), t).unwrap();
            let (p, rho) = condition_on_povm(&lossy, Mode::Second, &projector).unwrap();
            assert!((p - rec.probability()).abs() < 1e-12);
            assert!((rho.matrix() - rec.conditional().unwrap().matrix()).camax() < 1e-10);
        }
    }

    #[test]
    fn conditionals_are_states() {
        let alpha = 1.8;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, 0.85, 20).unwrap();
        for rec in dist.records().iter().filter(|r| r.is_heralded()) {
            let rho = rec.conditional().unwrap();
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.hermiticity_error() < 1e-12);
            assert!(rho.min_eigenvalue() > -1e-9);
        }
        assert!((dist.total_probability() + dist.residual() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn click_povm_entries() {
        let t = trunc(12);
        let single = onoff_click_povm(1, t).unwrap();
        let mut expected = Operator::identity(t).matrix().clone();
        expected[(0, 0)] = ZERO;
        assert_eq!(single.matrix(), &expected);
        assert_eq!(onoff_click_povm(2, t).unwrap().matrix()[(3, 3)].re, 0.25);
        let (values, _) = hermitian_eigen(onoff_click_povm(5, t).unwrap().matrix());
        assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(onoff_click_povm(0, t).is_err());
    }

    #[test]
    fn detector_models_reduce_to_ideal_povms() {
        let t = trunc(10);
        for m in [1, 2, 4, 8] {
            let model = DetectorModel::multiplexed(m, 1.0).unwrap();
            let povm = model.povm_element(1, t).unwrap();
            assert!((povm.matrix() - onoff_click_povm(m, t).unwrap().matrix()).camax() < 1e-14);
        }
        let onoff = DetectorModel::onoff(0.7).unwrap();
        let sum = onoff.povm_element(0, t).unwrap().matrix() + onoff.povm_element(1, t).unwrap().matrix();
        assert!((sum - Operator::identity(t).matrix()).camax() < 1e-14);
        let pnrd = DetectorModel::pnrd(0.6).unwrap();
        let total = (0..10).fold(DMatrix::from_element(10, 10, ZERO), |acc, n| {
            acc + pnrd.povm_element(n, t).unwrap().matrix()
        });
        assert!((total - Operator::identity(t).matrix()).camax() < 1e-13);
        assert!(onoff.povm_element(2, t).is_err());
        assert!(DetectorModel::pnrd(1.1).is_err());
        assert!(DetectorModel::multiplexed(0, 0.9).is_err());
    }

    #[test]
    fn identity_povm_gives_reduced_state() {
        let t = trunc(6).with_tail_tol(1e-3).unwrap();
        let psi = tensor(
            &coherent(C64::new(0.5, 0.2), t).unwrap(),
            &coherent(C64::new(-0.3, 0.1), t).unwrap(),
        )
        .unwrap();
        let (p, rho) = condition_on_povm(&psi.to_density(), Mode::Second, &Operator::identity(t)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((rho.matrix() - psi.reduced(Mode::First).matrix()).camax() < 1e-12);
    }

    #[test]
    fn non_diagonal_povm_uses_square_root() {
        let t = trunc(4);
        let h = C64::from(0.5f64.sqrt());
        let plus = FockState::from_vec(vec![h, h, ZERO, ZERO], t).unwrap();
        let povm = Operator::new(plus.to_density().matrix().clone(), t).unwrap();
        let psi = tensor(&FockState::basis(1, t).unwrap(), &plus).unwrap();
        let (p, rho) = condition_on_povm(&psi.to_density(), Mode::Second, &povm).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((rho.matrix() - FockState::basis(1, t).unwrap().to_density().matrix()).camax() < 1e-12);
        let (p2, _) = condition_pure_on_povm(&psi, Mode::Second, &povm).unwrap();
        assert!((p2 - 1.0).abs() < 1e-12);

        let bad = Operator::from_diagonal(&[1.5, 0.0, 0.0, 0.0], t).unwrap();
        assert!(condition_on_povm(&psi.to_density(), Mode::Second, &bad).is_err());
    }

    #[test]
    fn pure_and_dense_conditioning_agree() {
        let t = trunc(8).with_tail_tol(1e-2).unwrap();
        let psi = cat_circuit(0.8, t).unwrap();
        for m in [1, 3] {
            let povm = onoff_click_povm(m, t).unwrap();
            let (p1, r1) = condition_on_povm(&psi.to_density(), Mode::Second, &povm).unwrap();
            let (p2, r2) = condition_pure_on_povm(&psi, Mode::Second, &povm).unwrap();
            assert!((p1 - p2).abs() < 1e-13);
            assert!((r1.matrix() - r2.matrix()).camax() < 1e-12);
        }
    }

    #[test]
    fn closed_form_success_probability() {
        assert_eq!(success_probability_closed_form(ZERO), 1.0);
        for b in [1.0, 3.0] {
            let t = TruncationConfig::for_amplitude(b);
            let psi = cat_circuit(b, t).unwrap();
            let numeric = pnrd_project(&psi, HERALD_MODE, 0).unwrap().probability();
            let closed = success_probability_closed_form(C64::from_polar(b, 0.7));
            assert!((numeric - closed).abs() < 1e-10, "b={b}: {numeric} vs {closed}");
        }
        let p1 = success_probability_closed_form(C64::from(1.0));
        assert!((p1 - 0.4375).abs() < 5e-3, "{p1}");
    }

    #[test]
    fn low_amplitude_click_herald_is_nearly_pure() {
        let alpha = 0.1;
        let t = TruncationConfig::for_amplitude(alpha);
        let psi = cat_circuit(alpha, t).unwrap();
        let (_, rho) = condition_pure_on_povm(&psi, HERALD_MODE, &onoff_click_povm(1, t).unwrap()).unwrap();
        let best = (0..4)
            .map(|k| pure_fidelity(&rho, &cat_target(alpha, k, t).unwrap()))
            .fold(0.0, f64::max);
        assert!(best > 0.99, "{best}");
    }
}
