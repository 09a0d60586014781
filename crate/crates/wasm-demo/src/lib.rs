//! wasm-bindgen exports for the static page in `www/`.
//!
//! Every export returns a flat `Float64Array`. The plain Rust functions behind
//! them are what the native tests exercise.

use catsim::experiments::{click_herald, heralded_wigner as class_wigner, RunConfig};
use catsim::metrics::{mean_heralded_fidelity, GridSpec};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request, per side.
pub const MAX_POINTS: usize = 161;

fn js(err: catsim::FockError) -> JsError {
    JsError::new(&err.to_string())
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Wigner function of the class-0 heralded state, row-major `points x points`
/// over `[-half_width, half_width]^2`, followed by a reliability flag (1 or 0).
pub fn heralded_wigner(abs_beta: f64, eta: f64, half_width: f64, points: usize) -> catsim::Result<Vec<f64>> {
    let points = points.clamp(2, MAX_POINTS);
    let grid = class_wigner(
        abs_beta,
        eta,
        0,
        &GridSpec::square(half_width, points)?,
        &RunConfig::default(),
    )?;
    let mut out = grid.values.clone();
    out.push(if grid.reliable { 1.0 } else { 0.0 });
    Ok(out)
}

/// Mean heralded fidelity over all PNRD outcomes for `steps` efficiencies
/// evenly spaced in `[eta_min, 1]`.
pub fn fidelity_curve(abs_beta: f64, eta_min: f64, steps: usize) -> catsim::Result<Vec<f64>> {
    linspace(eta_min, 1.0, steps)
        .into_iter()
        .map(|eta| Ok(mean_heralded_fidelity(abs_beta, eta, RunConfig::default().n_cutoff)?.mean))
        .collect()
}

/// Click-heralded fidelity followed by click probability for each of `steps`
/// input amplitudes in `[alpha_min, alpha_max]`: `[f0, p0, f1, p1, ...]`.
pub fn click_curve(m: usize, alpha_min: f64, alpha_max: f64, steps: usize) -> catsim::Result<Vec<f64>> {
    let config = RunConfig::default();
    let mut out = Vec::with_capacity(2 * steps);
    for alpha in linspace(alpha_min, alpha_max, steps) {
        let (f, p) = click_herald(alpha, m, &config)?;
        out.extend([f, p]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = heraldedWigner)]
pub fn heralded_wigner_js(abs_beta: f64, eta: f64, half_width: f64, points: usize) -> Result<Vec<f64>, JsError> {
    heralded_wigner(abs_beta, eta, half_width, points).map_err(js)
}

#[wasm_bindgen(js_name = fidelityCurve)]
pub fn fidelity_curve_js(abs_beta: f64, eta_min: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    fidelity_curve(abs_beta, eta_min, steps).map_err(js)
}

#[wasm_bindgen(js_name = clickCurve)]
pub fn click_curve_js(m: usize, alpha_min: f64, alpha_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    click_curve(m, alpha_min, alpha_max, steps).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wigner_has_grid_plus_flag() {
        let w = heralded_wigner(1.5, 1.0, 4.0, 21).unwrap();
        assert_eq!(w.len(), 21 * 21 + 1);
        assert_eq!(w[21 * 21], 1.0);
        let peak = w[..441].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        assert!(peak <= std::f64::consts::FRAC_2_PI + 1e-9);
    }

    #[test]
    fn fidelity_curve_ends_at_one() {
        let f = fidelity_curve(1.5, 0.8, 5).unwrap();
        assert_eq!(f.len(), 5);
        assert!((f[4] - 1.0).abs() < 1e-8);
        assert!(f.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn click_curve_pairs() {
        let c = click_curve(4, 0.1, 1.0, 4).unwrap();
        assert_eq!(c.len(), 8);
        assert!(c[0] > 0.95);
        assert!(c.chunks(2).all(|fp| (0.0..=1.0).contains(&fp[1])));
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(fidelity_curve(1.5, 1.5, 3).is_err());
        assert!(click_curve(0, 0.1, 1.0, 3).is_err());
    }
}
