//! Truncated Fock-space primitives.
//!
//! Every object carries the [`TruncationConfig`] it was built in; operations
//! that combine two objects check that their truncations agree. Two-mode
//! amplitudes are stored row-major in `(n1, n2)`: the flat index of
//! `|n1, n2⟩` is `n1 * dim + n2`.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FockError, Result};

pub type C64 = Complex64;

/// Norms (or traces) below this are treated as zero.
pub const ZERO_NORM_TOL: f64 = 1e-14;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationConfig {
    dim: usize,
    tail_tol: f64,
}

impl TruncationConfig {
    pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

    pub fn new(dim: usize, tail_tol: f64) -> Result<Self> {
        if dim < 2 {
            return Err(FockError::InvalidArgument(format!("dim must be at least 2, got {dim}")));
        }
        if !(0.0..1.0).contains(&tail_tol) {
            return Err(FockError::InvalidArgument(format!(
                "tail_tol must lie in [0, 1), got {tail_tol}"
            )));
        }
        Ok(TruncationConfig { dim, tail_tol })
    }

    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, Self::DEFAULT_TAIL_TOL)
    }

    /// Default truncation for states whose largest coherent amplitude is
    /// `amp`: `max(20, ceil(|amp|² + 8|amp| + 12))` levels.
    pub fn for_amplitude(amp: f64) -> Self {
        TruncationConfig {
            dim: default_dim(amp),
            tail_tol: Self::DEFAULT_TAIL_TOL,
        }
    }

    pub fn with_tail_tol(self, tail_tol: f64) -> Result<Self> {
        Self::new(self.dim, tail_tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub(crate) fn ensure_same(&self, other: &TruncationConfig) -> Result<()> {
        if self.dim != other.dim {
            return Err(FockError::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

pub fn default_dim(amp: f64) -> usize {
    let a = amp.abs();
    let heuristic = (a * a + 8.0 * a + 12.0).ceil() as usize;
    heuristic.max(20)
}

/// One of the two modes of a [`TwoModeState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    /// Maps the 1-based mode labels used in the literature onto [`Mode`].
    pub fn from_index(index: usize) -> Result<Mode> {
        match index {
            1 => Ok(Mode::First),
            2 => Ok(Mode::Second),
            other => Err(FockError::InvalidArgument(format!(
                "mode index must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn other(self) -> Mode {
        match self {
            Mode::First => Mode::Second,
            Mode::Second => Mode::First,
        }
    }
}

/// Normalization shared by kets and density matrices.
///
/// Returns the normalized object together with the original norm (kets) or
/// trace (density matrices).
pub trait Normalize: Sized {
    fn normalized(&self) -> Result<(Self, f64)>;
}

pub fn normalize<T: Normalize>(state: &T) -> Result<(T, f64)> {
    state.normalized()
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a C64>) -> Result<()> {
    if values.into_iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(FockError::InvalidArgument("non-finite entry".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: DVector<C64>,
    trunc: TruncationConfig,
}

impl FockState {
    pub fn new(amplitudes: DVector<C64>, trunc: TruncationConfig) -> Result<Self> {
        if amplitudes.len() != trunc.dim() {
            return Err(FockError::DimMismatch {
                left: amplitudes.len(),
                right: trunc.dim(),
            });
        }
        check_finite(amplitudes.iter())?;
        Ok(FockState { amplitudes, trunc })
    }

    pub fn from_vec(amplitudes: Vec<C64>, trunc: TruncationConfig) -> Result<Self> {
        Self::new(DVector::from_vec(amplitudes), trunc)
    }

    pub fn basis(n: usize, trunc: TruncationConfig) -> Result<Self> {
        if n >= trunc.dim() {
            return Err(FockError::InvalidArgument(format!(
                "Fock level {n} outside truncation dim {}",
                trunc.dim()
            )));
        }
        let mut amplitudes = DVector::from_element(trunc.dim(), ZERO);
        amplitudes[n] = ONE;
        Ok(FockState { amplitudes, trunc })
    }

    pub fn vacuum(trunc: TruncationConfig) -> Self {
        Self::basis(0, trunc).expect("dim >= 2")
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes.get(n).copied().unwrap_or(ZERO)
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<C64> {
        self.trunc.ensure_same(&other.trunc)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: C64) -> FockState {
        FockState {
            amplitudes: &self.amplitudes * factor,
            trunc: self.trunc,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            trunc: self.trunc,
        }
    }

    /// Fock levels carrying more than `tol` of probability.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > tol)
            .map(|(n, _)| n)
            .collect()
    }
}

impl Normalize for FockState {
    fn normalized(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm < ZERO_NORM_TOL {
            return Err(FockError::ZeroNorm { norm });
        }
        Ok((self.scaled(C64::from(1.0 / norm)), norm))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    trunc: TruncationConfig,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, trunc: TruncationConfig) -> Result<Self> {
        if matrix.nrows() != trunc.dim() || matrix.ncols() != trunc.dim() {
            return Err(FockError::DimMismatch {
                left: matrix.nrows(),
                right: trunc.dim(),
            });
        }
        check_finite(matrix.iter())?;
        Ok(Operator { matrix, trunc })
    }

    pub fn identity(trunc: TruncationConfig) -> Self {
        Operator {
            matrix: DMatrix::identity(trunc.dim(), trunc.dim()),
            trunc,
        }
    }

    pub fn from_diagonal(diagonal: &[f64], trunc: TruncationConfig) -> Result<Self> {
        let diag = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::from(x)));
        Self::new(DMatrix::from_diagonal(&diag), trunc)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            trunc: self.trunc,
        }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        self.trunc.ensure_same(&state.trunc)?;
        Ok(FockState {
            amplitudes: &self.matrix * &state.amplitudes,
            trunc: self.trunc,
        })
    }

    pub fn expectation(&self, state: &FockState) -> Result<C64> {
        let applied = self.apply(state)?;
        state.inner(&applied)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).camax() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.matrix.nrows();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.trunc.dim(), rhs.trunc.dim(), "operator dims differ");
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            trunc: self.trunc,
        }
    }
}

/// `â` with `⟨n−1|â|n⟩ = √n`.
pub fn annihilation_op(trunc: TruncationConfig) -> Operator {
    let d = trunc.dim();
    let mut matrix = DMatrix::from_element(d, d, ZERO);
    for n in 1..d {
        matrix[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    Operator { matrix, trunc }
}

pub fn creation_op(trunc: TruncationConfig) -> Operator {
    annihilation_op(trunc).dagger()
}

pub fn number_op(trunc: TruncationConfig) -> Operator {
    let diag: Vec<f64> = (0..trunc.dim()).map(|n| n as f64).collect();
    Operator::from_diagonal(&diag, trunc).expect("dimensions agree")
}

/// Parity `(−1)^n̂`.
pub fn parity_op(trunc: TruncationConfig) -> Operator {
    let diag: Vec<f64> = (0..trunc.dim()).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Operator::from_diagonal(&diag, trunc).expect("dimensions agree")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amplitudes: DVector<C64>,
    trunc: TruncationConfig,
}

impl TwoModeState {
    pub fn new(amplitudes: DVector<C64>, trunc: TruncationConfig) -> Result<Self> {
        let d = trunc.dim();
        if amplitudes.len() != d * d {
            return Err(FockError::DimMismatch {
                left: amplitudes.len(),
                right: d * d,
            });
        }
        check_finite(amplitudes.iter())?;
        Ok(TwoModeState { amplitudes, trunc })
    }

    /// Builds the state from a `dim × dim` coefficient matrix with rows
    /// indexing mode 1 and columns indexing mode 2.
    pub fn from_matrix(coefficients: &DMatrix<C64>, trunc: TruncationConfig) -> Result<Self> {
        let d = trunc.dim();
        if coefficients.nrows() != d || coefficients.ncols() != d {
            return Err(FockError::DimMismatch {
                left: coefficients.nrows(),
                right: d,
            });
        }
        let amplitudes = DVector::from_fn(d * d, |i, _| coefficients[(i / d, i % d)]);
        Self::new(amplitudes, trunc)
    }

    pub fn basis(n1: usize, n2: usize, trunc: TruncationConfig) -> Result<Self> {
        let d = trunc.dim();
        if n1 >= d || n2 >= d {
            return Err(FockError::InvalidArgument(format!(
                "|{n1},{n2}⟩ outside truncation dim {d}"
            )));
        }
        let mut amplitudes = DVector::from_element(d * d, ZERO);
        amplitudes[n1 * d + n2] = ONE;
        Ok(TwoModeState { amplitudes, trunc })
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.trunc.dim() + n2
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C64 {
        self.amplitudes[self.index(n1, n2)]
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Coefficient matrix `c[(n1, n2)]`.
    pub fn as_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |n1, n2| self.amplitudes[n1 * d + n2])
    }

    /// Unnormalized state of the other mode after projecting `measured` onto `|n⟩`.
    pub fn project(&self, measured: Mode, n: usize) -> Result<FockState> {
        let d = self.dim();
        if n >= d {
            return Err(FockError::InvalidArgument(format!(
                "outcome {n} outside truncation dim {d}"
            )));
        }
        let amplitudes = DVector::from_fn(d, |k, _| match measured {
            Mode::First => self.amplitudes[n * d + k],
            Mode::Second => self.amplitudes[k * d + n],
        });
        Ok(FockState {
            amplitudes,
            trunc: self.trunc,
        })
    }

    pub fn to_density(&self) -> TwoModeDensity {
        TwoModeDensity {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            trunc: self.trunc,
        }
    }

    /// Reduced state of `keep`, computed without forming the joint density.
    pub fn reduced(&self, keep: Mode) -> DensityMatrix {
        let c = self.as_matrix();
        let matrix = match keep {
            Mode::First => &c * c.adjoint(),
            Mode::Second => c.transpose() * c.conjugate(),
        };
        DensityMatrix {
            matrix,
            trunc: self.trunc,
        }
    }
}

impl Normalize for TwoModeState {
    fn normalized(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm < ZERO_NORM_TOL {
            return Err(FockError::ZeroNorm { norm });
        }
        Ok((
            TwoModeState {
                amplitudes: &self.amplitudes / C64::from(norm),
                trunc: self.trunc,
            },
            norm,
        ))
    }
}

pub fn tensor(a: &FockState, b: &FockState) -> Result<TwoModeState> {
    a.trunc.ensure_same(&b.trunc)?;
    let d = a.dim();
    let amplitudes = DVector::from_fn(d * d, |i, _| a.amplitudes[i / d] * b.amplitudes[i % d]);
    Ok(TwoModeState {
        amplitudes,
        trunc: a.trunc,
    })
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
pub(crate) fn hermitian_eigen(matrix: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (matrix + matrix.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    trunc: TruncationConfig,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>, trunc: TruncationConfig) -> Result<Self> {
        if matrix.nrows() != trunc.dim() || matrix.ncols() != trunc.dim() {
            return Err(FockError::DimMismatch {
                left: matrix.nrows(),
                right: trunc.dim(),
            });
        }
        check_finite(matrix.iter())?;
        Ok(DensityMatrix { matrix, trunc })
    }

    pub fn from_pure(state: &FockState) -> Self {
        state.to_density()
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|` over the given (unnormalized allowed) kets.
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (f64, &'a FockState)>, trunc: TruncationConfig) -> Result<Self> {
        let d = trunc.dim();
        let mut matrix = DMatrix::from_element(d, d, ZERO);
        for (weight, state) in terms {
            trunc.ensure_same(&state.trunc)?;
            matrix += &state.amplitudes * state.amplitudes.adjoint() * C64::from(weight);
        }
        Self::new(matrix, trunc)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        hermitian_eigen(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0[0]
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.trunc.ensure_same(&op.trunc)?;
        Ok((&self.matrix * &op.matrix).trace())
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, op: &Operator) -> Result<DensityMatrix> {
        self.trunc.ensure_same(&op.trunc)?;
        Ok(DensityMatrix {
            matrix: &op.matrix * &self.matrix * op.matrix.adjoint(),
            trunc: self.trunc,
        })
    }

    pub fn population(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }
}

impl Normalize for DensityMatrix {
    fn normalized(&self) -> Result<(Self, f64)> {
        let trace = self.trace();
        if trace.abs() < ZERO_NORM_TOL {
            return Err(FockError::ZeroNorm { norm: trace });
        }
        Ok((
            DensityMatrix {
                matrix: &self.matrix / C64::from(trace),
                trunc: self.trunc,
            },
            trace,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensity {
    matrix: DMatrix<C64>,
    trunc: TruncationConfig,
}

impl TwoModeDensity {
    pub fn new(matrix: DMatrix<C64>, trunc: TruncationConfig) -> Result<Self> {
        let d2 = trunc.dim() * trunc.dim();
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(FockError::DimMismatch {
                left: matrix.nrows(),
                right: d2,
            });
        }
        check_finite(matrix.iter())?;
        Ok(TwoModeDensity { matrix, trunc })
    }

    pub fn from_pure(state: &TwoModeState) -> Self {
        state.to_density()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }
}

pub fn partial_trace(rho: &TwoModeDensity, keep: Mode) -> DensityMatrix {
    let d = rho.trunc.dim();
    let m = &rho.matrix;
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        (0..d)
            .map(|k| match keep {
                Mode::First => m[(i * d + k, j * d + k)],
                Mode::Second => m[(k * d + i, k * d + j)],
            })
            .sum()
    });
    DensityMatrix {
        matrix,
        trunc: rho.trunc,
    }
}

/// Dense operator on the two-mode space, indexed like [`TwoModeState`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeOperator {
    matrix: DMatrix<C64>,
    trunc: TruncationConfig,
}

impl TwoModeOperator {
    pub fn new(matrix: DMatrix<C64>, trunc: TruncationConfig) -> Result<Self> {
        let d2 = trunc.dim() * trunc.dim();
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(FockError::DimMismatch {
                left: matrix.nrows(),
                right: d2,
            });
        }
        Ok(TwoModeOperator { matrix, trunc })
    }

    /// `a ⊗ b`.
    pub fn kron(a: &Operator, b: &Operator) -> Result<Self> {
        a.trunc.ensure_same(&b.trunc)?;
        Ok(TwoModeOperator {
            matrix: a.matrix.kronecker(&b.matrix),
            trunc: a.trunc,
        })
    }

    /// `op` acting on `mode`, identity on the other.
    pub fn local(op: &Operator, mode: Mode) -> Self {
        let id = Operator::identity(op.trunc);
        match mode {
            Mode::First => Self::kron(op, &id),
            Mode::Second => Self::kron(&id, op),
        }
        .expect("same truncation")
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn apply(&self, state: &TwoModeState) -> Result<TwoModeState> {
        self.trunc.ensure_same(&state.trunc)?;
        Ok(TwoModeState {
            amplitudes: &self.matrix * &state.amplitudes,
            trunc: self.trunc,
        })
    }

    pub fn conjugate(&self, rho: &TwoModeDensity) -> Result<TwoModeDensity> {
        self.trunc.ensure_same(&rho.trunc)?;
        Ok(TwoModeDensity {
            matrix: &self.matrix * &rho.matrix * self.matrix.adjoint(),
            trunc: self.trunc,
        })
    }
}

impl Mul for &TwoModeOperator {
    type Output = TwoModeOperator;

    fn mul(self, rhs: &TwoModeOperator) -> TwoModeOperator {
        assert_eq!(self.trunc.dim(), rhs.trunc.dim(), "operator dims differ");
        TwoModeOperator {
            matrix: &self.matrix * &rhs.matrix,
            trunc: self.trunc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trunc(d: usize) -> TruncationConfig {
        TruncationConfig::with_dim(d).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn truncation_validation() {
        assert!(TruncationConfig::new(1, 1e-10).is_err());
        assert!(TruncationConfig::new(4, 1.0).is_err());
        assert!(TruncationConfig::new(4, -1e-3).is_err());
        assert_eq!(TruncationConfig::for_amplitude(0.5).dim(), 20);
        // 9 + 24 + 12
        assert_eq!(TruncationConfig::for_amplitude(3.0).dim(), 45);
        assert_eq!(TruncationConfig::for_amplitude(-2.5).dim(), 39);
    }

    #[test]
    fn ladder_identities() {
        let t = trunc(8);
        let a = annihilation_op(t);
        let one = a.apply(&FockState::basis(1, t).unwrap()).unwrap();
        assert_eq!(one, FockState::basis(0, t).unwrap());
        let zero = a.apply(&FockState::vacuum(t)).unwrap();
        assert_eq!(zero.norm(), 0.0);
        let five = a.apply(&FockState::basis(5, t).unwrap()).unwrap();
        assert!(close(five.amplitude(4), C64::from(5f64.sqrt()), 1e-15));
        assert_eq!(five.support(0.0), vec![4]);
    }

    #[test]
    fn number_operator_is_exact_diagonal() {
        let t = trunc(12);
        let a = annihilation_op(t);
        let n = &a.dagger() * &a;
        assert!((n.matrix() - number_op(t).matrix()).camax() < 1e-13);
        assert!(n.is_diagonal(0.0));
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let t = trunc(10);
        let a = annihilation_op(t);
        let ad = a.dagger();
        let comm = (&a * &ad).matrix() - (&ad * &a).matrix();
        for i in 0..9 {
            for j in 0..9 {
                let expected = if i == j { ONE } else { ZERO };
                assert!(close(comm[(i, j)], expected, 1e-14));
            }
        }
        // the top level shows the truncation
        assert!(close(comm[(9, 9)], C64::from(-9.0), 1e-14));
    }

    #[test]
    fn tensor_examples() {
        let t = trunc(5);
        let vac = tensor(&FockState::vacuum(t), &FockState::vacuum(t)).unwrap();
        assert_eq!(vac, TwoModeState::basis(0, 0, t).unwrap());
        let s = tensor(&FockState::basis(1, t).unwrap(), &FockState::basis(2, t).unwrap()).unwrap();
        assert_eq!(s.amplitudes()[7], ONE);
        assert_eq!(s.amplitude(1, 2), ONE);
        assert!(tensor(&FockState::vacuum(t), &FockState::vacuum(trunc(6))).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let t = trunc(4);
        for n1 in 0..4 {
            for n2 in 0..4 {
                let s = TwoModeState::basis(n1, n2, t).unwrap();
                let c = s.as_matrix();
                assert_eq!(c[(n1, n2)], ONE);
                assert_eq!(TwoModeState::from_matrix(&c, t).unwrap(), s);
                assert_eq!(s.project(Mode::Second, n2).unwrap(), FockState::basis(n1, t).unwrap());
                assert_eq!(s.project(Mode::First, n1).unwrap(), FockState::basis(n2, t).unwrap());
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let t = trunc(2);
        let rho = TwoModeState::basis(0, 0, t).unwrap().to_density();
        assert_eq!(partial_trace(&rho, Mode::First), FockState::vacuum(t).to_density());

        let h = C64::from(0.5f64.sqrt());
        let bell = TwoModeState::new(DVector::from_vec(vec![h, ZERO, ZERO, h]), t).unwrap();
        let reduced = partial_trace(&bell.to_density(), Mode::Second);
        assert!(close(reduced.matrix()[(0, 0)], C64::from(0.5), 1e-15));
        assert!(close(reduced.matrix()[(1, 1)], C64::from(0.5), 1e-15));
        assert!(close(reduced.matrix()[(0, 1)], ZERO, 1e-15));
        assert_eq!(reduced, bell.reduced(Mode::Second));
    }

    #[test]
    fn mode_labels() {
        assert_eq!(Mode::from_index(1).unwrap(), Mode::First);
        assert_eq!(Mode::from_index(2).unwrap(), Mode::Second);
        assert!(matches!(Mode::from_index(3), Err(FockError::InvalidArgument(_))));
        assert!(Mode::from_index(0).is_err());
    }

    #[test]
    fn normalize_examples() {
        let t = trunc(4);
        let twice = FockState::vacuum(t).scaled(C64::from(2.0));
        let (unit, norm) = normalize(&twice).unwrap();
        assert_eq!(unit, FockState::vacuum(t));
        assert_eq!(norm, 2.0);

        let zero = FockState::vacuum(t).scaled(ZERO);
        assert!(matches!(normalize(&zero), Err(FockError::ZeroNorm { .. })));

        let (same, norm) = normalize(&FockState::basis(3, t).unwrap()).unwrap();
        assert_eq!(same, FockState::basis(3, t).unwrap());
        assert_eq!(norm, 1.0);

        let rho = FockState::vacuum(t).to_density();
        let doubled = DensityMatrix::new(rho.matrix() * C64::from(2.0), t).unwrap();
        let (back, trace) = normalize(&doubled).unwrap();
        assert_eq!(back, rho);
        assert_eq!(trace, 2.0);
    }

    #[test]
    fn mixture_is_weighted_projector_sum() {
        let t = trunc(3);
        let h = C64::from(0.5f64.sqrt());
        let plus = FockState::from_vec(vec![h, C64::new(0.0, 0.5f64.sqrt()), ZERO], t).unwrap();
        let rho = DensityMatrix::mixture([(1.0, &plus)], t).unwrap();
        assert_eq!(rho, plus.to_density());
        assert!(close(rho.matrix()[(1, 0)], C64::new(0.0, 0.5), 1e-15));
    }

    fn state_strategy(d: usize) -> impl Strategy<Value = FockState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
            .prop_filter("nonzero", |v| v.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3))
            .prop_map(move |v| {
                let s =
                    FockState::from_vec(v.into_iter().map(|(re, im)| C64::new(re, im)).collect(), trunc(d)).unwrap();
                s.normalized().unwrap().0
            })
    }

    proptest! {
        #[test]
        fn tensor_partial_trace_round_trip(a in state_strategy(4), b in state_strategy(4)) {
            let joint = tensor(&a, &b).unwrap();
            prop_assert!((joint.norm() - a.norm() * b.norm()).abs() < 1e-12);
            let rho = joint.to_density();
            let first = partial_trace(&rho, Mode::First);
            let second = partial_trace(&rho, Mode::Second);
            prop_assert!((first.matrix() - a.to_density().matrix()).camax() < 1e-12);
            prop_assert!((second.matrix() - b.to_density().matrix()).camax() < 1e-12);
            prop_assert!((first.trace() - rho.trace()).abs() < 1e-12);
            prop_assert!(first.hermiticity_error() < 1e-14);
        }
    }
}
