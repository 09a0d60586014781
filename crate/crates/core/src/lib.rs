//! Simulation of four-component cat state generation: two cat (or
//! photon-subtracted squeezed) states meet on a balanced beam splitter and one
//! output is measured by a photon counter, heralding a four-component cat in
//! the other.

pub mod circuit;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod metrics;
pub mod optics;
pub mod states;

pub use error::{FockError, Result};
pub use fock::{
    annihilation_op, creation_op, normalize, number_op, parity_op, partial_trace, tensor, DensityMatrix, FockState,
    Mode, Normalize, Operator, TruncationConfig, TwoModeDensity, TwoModeOperator, TwoModeState, C64,
};
