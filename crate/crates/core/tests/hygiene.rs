//! Numerical sanity of the building blocks.

use catsim::metrics::{wigner, wigner_point, GridSpec};
use catsim::optics::{apply_loss, BeamSplitter, LossChannel};
use catsim::states::{coherent, four_cat, rotate_eighth, two_cat, CatPhase};
use catsim::{annihilation_op, DensityMatrix, FockState, Mode, TruncationConfig, TwoModeOperator, C64};
use nalgebra::DMatrix;
use std::f64::consts::FRAC_2_PI;

#[test]
fn splitter_blocks_are_orthogonal() {
    let splitter = BeamSplitter::balanced(TruncationConfig::with_dim(30).unwrap());
    for total in 0..=58 {
        let b = splitter.block(total);
        let err = (b.transpose() * b - DMatrix::<f64>::identity(total + 1, total + 1)).amax();
        assert!(err < 1e-10, "N={total}: {err}");
    }
}

#[test]
fn loss_keeps_trace_and_coherence() {
    let trunc = TruncationConfig::with_dim(40).unwrap();
    for eta in [0.3, 0.9] {
        let channel = LossChannel::with_default_cutoff(eta, 39).unwrap();
        for alpha in [C64::new(1.0, 0.0), C64::new(-0.7, 1.4)] {
            let out = apply_loss(&coherent(alpha, trunc).unwrap().to_density(), &channel).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-9);
            let expected = coherent(alpha * eta.sqrt(), trunc).unwrap().to_density();
            assert!((out.matrix() - expected.matrix()).camax() < 1e-9);
        }
        let cat = two_cat(C64::from(1.5), CatPhase::REAL_EVEN, trunc)
            .unwrap()
            .to_density();
        assert!((apply_loss(&cat, &channel).unwrap().trace() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn wigner_values_stay_within_parity_bound() {
    let trunc = TruncationConfig::with_dim(40).unwrap();
    let states: Vec<DensityMatrix> = vec![
        FockState::vacuum(trunc).to_density(),
        FockState::basis(3, trunc).unwrap().to_density(),
        four_cat(rotate_eighth(C64::from(2.0)), 1, trunc).unwrap().to_density(),
        DensityMatrix::mixture(
            [
                (0.5, &FockState::basis(1, trunc).unwrap()),
                (0.5, &coherent(C64::new(0.5, 0.5), trunc).unwrap()),
            ],
            trunc,
        )
        .unwrap(),
    ];
    let grid = GridSpec::square(4.0, 61).unwrap();
    for rho in &states {
        let w = wigner(rho, &grid).unwrap();
        assert!(w.max() <= FRAC_2_PI + 1e-9 && w.min() >= -FRAC_2_PI - 1e-9);
    }
    assert!((wigner_point(&states[0], 0.0, 0.0).unwrap() - FRAC_2_PI).abs() < 1e-12);
    let one = FockState::basis(1, trunc).unwrap().to_density();
    assert!((wigner_point(&one, 0.0, 0.0).unwrap() + FRAC_2_PI).abs() < 1e-12);
}

#[test]
fn splitter_maps_pair_subtraction_to_difference_of_squares() {
    let trunc = TruncationConfig::with_dim(10).unwrap();
    let d = trunc.dim();
    let u = BeamSplitter::balanced(trunc).to_operator();
    let a = annihilation_op(trunc);
    let a1 = TwoModeOperator::local(&a, Mode::First);
    let a2 = TwoModeOperator::local(&a, Mode::Second);
    let lhs = &u * &(&a1 * &a2);
    let squares = (&a1 * &a1).matrix() - (&a2 * &a2).matrix();
    let rhs = squares * C64::from(0.5) * u.matrix();
    for n1 in 0..d {
        for n2 in 0..d {
            if n1 + n2 > d - 3 {
                continue;
            }
            let col = n1 * d + n2;
            let err = (lhs.matrix().column(col) - rhs.column(col)).camax();
            assert!(err < 1e-9, "({n1},{n2}): {err}");
        }
    }
}
