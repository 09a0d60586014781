//! The generation circuit: even cats `|α⟩+|−α⟩` and `|iα⟩+|−iα⟩` combined on a
//! balanced beam splitter. Mode 2 goes to the detector, mode 1 carries the
//! heralded four-component cat of amplitude `β = αe^{iπ/4}`.

use crate::error::Result;
use crate::fock::{tensor, FockState, Mode, TruncationConfig, TwoModeState, C64};
use crate::optics::BeamSplitter;
use crate::states::{four_cat, rotate_eighth, two_cat, CatPhase};

/// Mode measured by the heralding detector.
pub const HERALD_MODE: Mode = Mode::Second;

/// Joint output state for cat inputs of real amplitude `alpha`.
pub fn cat_circuit(alpha: f64, trunc: TruncationConfig) -> Result<TwoModeState> {
    let a = C64::from(alpha);
    let input = tensor(
        &two_cat(a, CatPhase::REAL_EVEN, trunc)?,
        &two_cat(a, CatPhase::IMAGINARY_EVEN, trunc)?,
    )?;
    BeamSplitter::balanced(trunc).apply(&input)
}

/// `|Φ_k(αe^{iπ/4})⟩`, the state heralded by outcomes `n ≡ k (mod 4)`.
pub fn cat_target(alpha: f64, k: usize, trunc: TruncationConfig) -> Result<FockState> {
    four_cat(rotate_eighth(C64::from(alpha)), k, trunc)
}
