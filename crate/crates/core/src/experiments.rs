//! Parameter sweeps behind the figure data, the squeezing optimizer and
//! CSV/JSON output.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::Serialize;
use serde_json::{json, Value};

use crate::circuit::{cat_circuit, cat_target, HERALD_MODE};
use crate::detection::{
    condition_pure_on_povm, onoff_click_povm, pnrd_outcome_distribution, HeraldRecord, DEFAULT_OUTCOME_CUTOFF,
};
use crate::error::{FockError, Result};
use crate::fock::{tensor, DensityMatrix, FockState, Mode, TruncationConfig, C64};
use crate::metrics::{
    fidelity_pure, mean_heralded_fidelity_with, qfi_displacement, wigner, GridSpec, WignerGrid, DEFAULT_QFI_EPSILON,
};
use crate::optics::BeamSplitter;
use crate::states::{coherent, four_cat, squeezed_coefficients, SqueezeSign};

/// Tabular output of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
}

impl SweepResult {
    fn new(schema: &[&str], metadata: BTreeMap<String, Value>) -> Self {
        SweepResult {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.schema.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.schema.iter().position(|s| s == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Header line plus one line per row, `,`-separated, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.schema.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }
}

/// Twelve significant digits, shortest of fixed or exponent notation, with
/// trailing zeros removed.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

/// Parses `lo:hi:step` (inclusive of `hi`) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| FockError::InvalidArgument(format!("invalid grid {text:?}: {what}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(bad("expected lo:hi:step"));
        };
        let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
        if !(step > 0.0 && step.is_finite()) || hi < lo || !lo.is_finite() || !hi.is_finite() {
            return Err(bad("need lo <= hi and a positive step"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| {
                let v = lo + i as f64 * step;
                if (v - hi).abs() < 1e-12 {
                    hi
                } else {
                    v
                }
            })
            .collect())
    } else {
        let values = text.split(',').map(number).collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        Ok(values)
    }
}

/// Like [`parse_grid`] for non-negative integers.
pub fn parse_int_grid(text: &str) -> Result<Vec<usize>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(FockError::InvalidArgument(format!("{v} is not a non-negative integer")))
            }
        })
        .collect()
}

/// Truncation shared by the runners: fixed `dim`, or the amplitude heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub tail_tol: f64,
    pub n_cutoff: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: None,
            tail_tol: TruncationConfig::DEFAULT_TAIL_TOL,
            n_cutoff: DEFAULT_OUTCOME_CUTOFF,
        }
    }
}

impl RunConfig {
    /// Truncation for states of amplitude `amp`, at least `min_dim` levels.
    pub fn trunc_for(&self, amp: f64, min_dim: usize) -> Result<TruncationConfig> {
        let dim = self
            .dim
            .unwrap_or_else(|| TruncationConfig::for_amplitude(amp).dim().max(min_dim));
        TruncationConfig::new(dim, self.tail_tol)
    }

    fn metadata(&self, figure: &str) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("figure".into(), json!(figure));
        m.insert(
            "dim".into(),
            match self.dim {
                Some(d) => json!(d),
                None => json!("auto"),
            },
        );
        m.insert("tail_tol".into(), json!(self.tail_tol));
        m.insert("n_cutoff".into(), json!(self.n_cutoff));
        m.insert("seedless".into(), json!(true));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m
    }
}

/// Order-preserving map, in parallel when the `parallel` feature is on.
fn map_ordered<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

fn require_nonempty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(FockError::InvalidArgument(format!("{what} must not be empty")));
    }
    Ok(())
}

pub const FIG2_BETAS: [f64; 4] = [1.0, 1.5, 2.0, 2.5];
pub const FIG2_ETAS: &str = "0.8:1.0:0.01";

/// Mean and spread of the heralded-state fidelity against PNRD efficiency.
pub fn run_fig2(betas: &[f64], etas: &[f64], config: &RunConfig) -> Result<SweepResult> {
    require_nonempty(betas, "amplitude list")?;
    require_nonempty(etas, "efficiency grid")?;
    let mut meta = config.metadata("fig2");
    meta.insert("abs_beta".into(), json!(betas));
    meta.insert("eta".into(), json!(etas));
    meta.insert(
        "target".into(),
        json!("four_cat(|beta| e^{i pi/4}, n mod 4) per outcome"),
    );
    let jobs: Vec<(f64, f64)> = betas.iter().flat_map(|&b| etas.iter().map(move |&e| (b, e))).collect();
    let rows = map_ordered(&jobs, |&(beta, eta)| {
        let f = mean_heralded_fidelity_with(beta, eta, config.n_cutoff, config.trunc_for(beta, config.n_cutoff + 1)?)?;
        Ok(vec![beta, eta, f.mean, f.std])
    })?;
    let mut out = SweepResult::new(&["abs_beta", "eta", "mean_fidelity", "std_fidelity"], meta);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Heralded state for PNRD outcomes `n ≡ k (mod 4)`, `n ≤ n_cutoff`, pooled
/// with their probabilities.
pub fn heralded_class_state(alpha: f64, eta: f64, k: usize, config: &RunConfig) -> Result<DensityMatrix> {
    class_state_in(alpha, eta, k, config, config.n_cutoff + 1)
}

fn class_state_in(alpha: f64, eta: f64, k: usize, config: &RunConfig, min_dim: usize) -> Result<DensityMatrix> {
    let trunc = config.trunc_for(alpha, min_dim)?;
    let psi = cat_circuit(alpha, trunc)?;
    let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, eta, config.n_cutoff)?;
    let mut acc = nalgebra::DMatrix::from_element(trunc.dim(), trunc.dim(), C64::from(0.0));
    let mut total = 0.0;
    for rec in dist.records().iter().filter(|r| r.n() % 4 == k % 4 && r.is_heralded()) {
        acc += rec.conditional()?.matrix() * C64::from(rec.probability());
        total += rec.probability();
    }
    if total <= 0.0 {
        return Err(FockError::ZeroNorm { norm: 0.0 });
    }
    DensityMatrix::new(acc / C64::from(total), trunc)
}

/// Wigner function of [`heralded_class_state`] on `grid`. Unless the config
/// fixes the dimension, the space is grown until the grid is reliable.
pub fn heralded_wigner(alpha: f64, eta: f64, k: usize, grid: &GridSpec, config: &RunConfig) -> Result<WignerGrid> {
    let min_dim = (config.n_cutoff + 1).max((4.0 * grid.max_gamma_sqr()).ceil() as usize);
    wigner(&class_state_in(alpha, eta, k, config, min_dim)?, grid)
}

/// A labelled Wigner panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerPanel {
    pub label: String,
    pub abs_beta: f64,
    pub eta: f64,
    pub grid: WignerGrid,
}

/// The states heralded by `n ≡ 0 (mod 4)` at `|β| ∈ {1.5, 2.5}` for
/// `η = 0.9` (i, ii) and `η = 1` (iii, iv).
pub fn fig2_wigner_panels(grid: &GridSpec, config: &RunConfig) -> Result<Vec<WignerPanel>> {
    let cases = [("i", 1.5, 0.9), ("ii", 2.5, 0.9), ("iii", 1.5, 1.0), ("iv", 2.5, 1.0)];
    map_ordered(&cases, |&(label, beta, eta)| {
        Ok(WignerPanel {
            label: label.into(),
            abs_beta: beta,
            eta,
            grid: heralded_wigner(beta, eta, 0, grid, config)?,
        })
    })
}

pub const FIG3_BETAS: &str = "0.5:3.0:0.1";
pub const FIG3_ETAS: [f64; 3] = [1.0, 0.95, 0.9];
pub const FIG3_PHIS: [f64; 2] = [0.0, FRAC_PI_4];

/// Displacement QFI of the heralded state, averaged over PNRD outcomes
/// `n ≤ n_cutoff` with their probabilities.
pub fn heralded_qfi(alpha: f64, eta: f64, phi: f64, config: &RunConfig) -> Result<(f64, f64)> {
    let trunc = config.trunc_for(alpha, config.n_cutoff + 1)?;
    let psi = cat_circuit(alpha, trunc)?;
    let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, eta, config.n_cutoff)?;
    let (mut total, mut qfi, mut residual) = (0.0, 0.0, 0.0f64);
    for rec in dist.records().iter().filter(|r| r.is_heralded()) {
        let q = qfi_displacement(rec.conditional()?, phi, DEFAULT_QFI_EPSILON)?;
        total += rec.probability();
        qfi += rec.probability() * q.value;
        residual = residual.max(q.richardson_residual);
    }
    Ok((qfi / total, residual))
}

/// Outcome-averaged displacement QFI against amplitude and efficiency.
pub fn run_fig3(betas: &[f64], etas: &[f64], phis: &[f64], config: &RunConfig) -> Result<SweepResult> {
    require_nonempty(betas, "amplitude grid")?;
    require_nonempty(etas, "efficiency list")?;
    require_nonempty(phis, "direction samples")?;
    let mut meta = config.metadata("fig3");
    meta.insert("abs_beta".into(), json!(betas));
    meta.insert("eta".into(), json!(etas));
    meta.insert("phi".into(), json!(phis));
    meta.insert("epsilon".into(), json!(DEFAULT_QFI_EPSILON));
    meta.insert(
        "averaging".into(),
        json!("probability-weighted over PNRD outcomes n <= n_cutoff"),
    );
    let baseline = qfi_displacement(
        &coherent(C64::from(1.0), TruncationConfig::new(30, config.tail_tol)?)?.to_density(),
        0.0,
        DEFAULT_QFI_EPSILON,
    )?;
    meta.insert("coherent_baseline_qfi".into(), json!(baseline.value));
    let jobs: Vec<(f64, f64, f64)> = betas
        .iter()
        .flat_map(|&b| etas.iter().flat_map(move |&e| phis.iter().map(move |&p| (b, e, p))))
        .collect();
    let rows = map_ordered(&jobs, |&(beta, eta, phi)| {
        let (q, res) = heralded_qfi(beta, eta, phi, config)?;
        Ok(vec![beta, eta, phi, q, res])
    })?;
    let mut out = SweepResult::new(&["abs_beta", "eta", "phi", "qfi", "richardson_residual"], meta);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

pub const FIG4_ALPHAS: &str = "0.05:2.0:0.05";
pub const FIG4_MS: [usize; 4] = [1, 2, 4, 8];

/// Click heralding with `m` multiplexed on-off detectors: best four-cat
/// fidelity and click probability.
pub fn click_herald(alpha: f64, m: usize, config: &RunConfig) -> Result<(f64, f64)> {
    let trunc = config.trunc_for(alpha, 2)?;
    let psi = cat_circuit(alpha, trunc)?;
    let (probability, rho) = condition_pure_on_povm(&psi, HERALD_MODE, &onoff_click_povm(m, trunc)?)?;
    let mut best: f64 = 0.0;
    for k in 0..4 {
        best = best.max(fidelity_pure(&rho, &cat_target(alpha, k, trunc)?)?);
    }
    Ok((best, probability))
}

pub fn run_fig4(alphas: &[f64], ms: &[usize], config: &RunConfig) -> Result<SweepResult> {
    require_nonempty(alphas, "amplitude grid")?;
    require_nonempty(ms, "detector counts")?;
    if ms.contains(&0) {
        return Err(FockError::InvalidArgument("need at least one detector".into()));
    }
    let mut meta = config.metadata("fig4");
    meta.insert("abs_alpha".into(), json!(alphas));
    meta.insert("m".into(), json!(ms));
    meta.insert(
        "target".into(),
        json!("argmax_k <Phi_k|rho|Phi_k> at beta = alpha e^{i pi/4}"),
    );
    let jobs: Vec<(usize, f64)> = ms.iter().flat_map(|&m| alphas.iter().map(move |&a| (m, a))).collect();
    let rows = map_ordered(&jobs, |&(m, alpha)| {
        let (f, p) = click_herald(alpha, m, config)?;
        Ok(vec![alpha, m as f64, f, p])
    })?;
    let mut out = SweepResult::new(&["abs_alpha", "m", "fidelity", "probability"], meta);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Four-cat class matched by the herald of outcome `n`: the heralded state
/// lives on `|n−2⟩` and `|n+2⟩`.
pub fn subtracted_target_class(n: usize) -> usize {
    (n + 2) % 4
}

/// Prepares `â₁Ŝ₁|0⟩ ⊗ â₂Ŝ₂†|0⟩`, combines the modes on the splitter and
/// counts `n` photons in mode 2.
///
/// Inputs use exact squeezed coefficients in a working space that holds
/// every input pair with at most `2n + 2` photons, which is all that can
/// reach `(m, n)` with `m ≤ n + 2`. The outcome probability therefore
/// carries no truncation error. The conditional is returned in `trunc`.
pub fn herald_from_subtracted(r: f64, n: usize, trunc: TruncationConfig) -> Result<HeraldRecord> {
    SubtractedSource::new(n).herald(r, trunc)
}

/// Splitter cache for repeated heralds at a fixed outcome.
struct SubtractedSource {
    n: usize,
    work: TruncationConfig,
    splitter: BeamSplitter,
}

impl SubtractedSource {
    fn new(n: usize) -> Self {
        let work = TruncationConfig::with_dim(2 * n + 3).expect("valid dim");
        SubtractedSource {
            n,
            work,
            splitter: BeamSplitter::balanced(work),
        }
    }

    fn subtracted(&self, r: f64, sign: SqueezeSign) -> Result<FockState> {
        let d = self.work.dim();
        let s = squeezed_coefficients(r, sign, d + 1);
        let norm = r.sinh();
        let amps = (0..d).map(|m| s[m + 1] * (((m + 1) as f64).sqrt() / norm)).collect();
        FockState::from_vec(amps, self.work)
    }

    fn herald(&self, r: f64, trunc: TruncationConfig) -> Result<HeraldRecord> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(FockError::InvalidArgument(format!(
                "squeezing parameter must be finite and non-negative, got {r}"
            )));
        }
        if r == 0.0 {
            return Err(FockError::ZeroNorm { norm: 0.0 });
        }
        let n = self.n;
        if n + 2 >= trunc.dim() {
            return Err(FockError::InvalidArgument(format!(
                "outcome {n} needs dim > {}, got {}",
                n + 2,
                trunc.dim()
            )));
        }
        let input = tensor(
            &self.subtracted(r, SqueezeSign::S)?,
            &self.subtracted(r, SqueezeSign::SDagger)?,
        )?;
        let output = self.splitter.apply(&input)?;
        let branch = output.project(Mode::Second, n)?;
        // (m, n) is exact only while every input pair of total m + n fits the
        // working space; beyond that the branch vanishes identically.
        let complete = self.work.dim() - 1 - n;
        let kept = (0..trunc.dim())
            .map(|m| {
                if m <= complete {
                    branch.amplitude(m)
                } else {
                    C64::from(0.0)
                }
            })
            .collect();
        HeraldRecord::from_exact_branch(n, &FockState::from_vec(kept, trunc)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub r_star: f64,
    pub fidelity_at_r_star: f64,
    pub probability_at_r_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// True when the fidelity does not depend on `r` (outcomes 0 and 1).
    pub flat: bool,
}

pub const SQUEEZING_RANGE: (f64, f64) = (0.01, 2.5);
const COARSE_POINTS: usize = 64;
const R_TOL: f64 = 1e-5;

/// Squeezing that maximizes the fidelity of the outcome-`n` herald with
/// `|Φ_k(β e^{iπ/4})⟩`, `k = (n+2) mod 4`.
pub fn optimize_squeezing(beta: f64, n: usize) -> Result<OptimizationResult> {
    optimize_squeezing_for(beta, n, subtracted_target_class(n), &RunConfig::default())
}

pub fn optimize_squeezing_for(beta: f64, n: usize, k: usize, config: &RunConfig) -> Result<OptimizationResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(FockError::InvalidArgument(format!(
            "target amplitude must be positive, got {beta}"
        )));
    }
    let trunc = config.trunc_for(beta, n + 3)?;
    let target = four_cat(C64::from_polar(beta, FRAC_PI_4), k, trunc)?;
    let source = SubtractedSource::new(n);
    let objective = |r: f64| -> Result<(f64, f64)> {
        let rec = source.herald(r, trunc)?;
        Ok((fidelity_pure(rec.conditional()?, &target)?, rec.probability()))
    };

    let (lo, hi) = SQUEEZING_RANGE;
    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|i| lo + i as f64 * step).collect();
    let values = grid
        .iter()
        .map(|&r| objective(r).map(|v| v.0))
        .collect::<Result<Vec<f64>>>()?;
    let (best_i, best_f) =
        values.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, f)| if f > acc.1 { (i, f) } else { acc },
        );
    let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
    if best_f - worst < 1e-12 {
        let r_star = 0.5 * (lo + hi);
        let (f, p) = objective(r_star)?;
        return Ok(OptimizationResult {
            r_star,
            fidelity_at_r_star: f,
            probability_at_r_star: p,
            bracket: (lo, hi),
            iterations: 0,
            flat: true,
        });
    }

    let bracket = (
        grid[best_i.saturating_sub(1)],
        grid[(best_i + 1).min(COARSE_POINTS - 1)],
    );
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = bracket;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?.0;
    let mut fd = objective(d)?.0;
    let mut iterations = 0;
    while b - a > R_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?.0;
        }
        iterations += 1;
    }
    let candidates = [(c, fc), (d, fd), (grid[best_i], best_f)];
    let (r_star, _) = candidates.iter().copied().fold(
        (f64::NAN, f64::NEG_INFINITY),
        |acc, x| if x.1 > acc.1 { x } else { acc },
    );
    let (f, p) = objective(r_star)?;
    Ok(OptimizationResult {
        r_star,
        fidelity_at_r_star: f,
        probability_at_r_star: p,
        bracket,
        iterations,
        flat: false,
    })
}

pub const FIG5_NS: &str = "0:9:1";
pub const FIG5_BETAS: &str = "0.1:3.0:0.1";

pub fn run_fig5(ns: &[usize], betas: &[f64], config: &RunConfig) -> Result<SweepResult> {
    require_nonempty(ns, "outcome list")?;
    require_nonempty(betas, "amplitude grid")?;
    let mut meta = config.metadata("fig5");
    meta.insert("n".into(), json!(ns));
    meta.insert("beta_target".into(), json!(betas));
    meta.insert("target".into(), json!("four_cat(beta e^{i pi/4}, (n + 2) mod 4)"));
    meta.insert("r_range".into(), json!([SQUEEZING_RANGE.0, SQUEEZING_RANGE.1]));
    let jobs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| betas.iter().map(move |&b| (n, b))).collect();
    let rows = map_ordered(&jobs, |&(n, beta)| {
        let opt = optimize_squeezing_for(beta, n, subtracted_target_class(n), config)?;
        Ok(vec![
            n as f64,
            beta,
            opt.r_star,
            opt.fidelity_at_r_star,
            opt.probability_at_r_star,
        ])
    })?;
    let mut out = SweepResult::new(&["n", "beta_target", "r_star", "fidelity", "outcome_probability"], meta);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// `{"dim", "amplitudes": [[re, im], ...], "metadata"}`, one amplitude per
/// line.
pub fn state_json(state: &FockState, metadata: BTreeMap<String, Value>) -> String {
    let amplitudes: Vec<String> = state
        .amplitudes()
        .iter()
        .map(|z| format!("    {}", json!([z.re, z.im])))
        .collect();
    format!(
        "{{\n  \"dim\": {},\n  \"amplitudes\": [\n{}\n  ],\n  \"metadata\": {}\n}}\n",
        state.dim(),
        amplitudes.join(",\n"),
        json!(metadata)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(2.5), "2.5");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-123456.789), "-123456.789");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(0.0000185863176725), "1.85863176725e-5");
        assert_eq!(format_number(0.000123), "0.000123");
        assert_eq!(format_number(2.5e13), "2.5e13");
        assert_eq!(format_number(1.0000000000000002), "1");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.8:1.0:0.01").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 1.0);
        assert_eq!(parse_grid("1,2.5, 3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_grid("2:2:0.5").unwrap(), vec![2.0]);
        assert_eq!(parse_int_grid("0:9:1").unwrap(), (0..10).collect::<Vec<_>>());
        for bad in ["", "1:2", "2:1:0.1", "0:1:0", "a,b", "1.5:x:1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
        assert!(parse_int_grid("0.5").is_err());
    }

    #[test]
    fn csv_layout() {
        let mut r = SweepResult::new(&["a", "b"], BTreeMap::new());
        r.push(vec![1.0, 0.25]);
        r.push(vec![2.0, 1e-9]);
        assert_eq!(r.to_csv(), "a,b\n1,0.25\n2,1e-9\n");
        assert_eq!(r.column("b").unwrap(), vec![0.25, 1e-9]);
        assert!(r.column("c").is_none());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"][1], "b");
    }

    #[test]
    fn subtracted_input_is_normalized() {
        let src = SubtractedSource::new(20);
        let s = src.subtracted(0.4, SqueezeSign::S).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!((0..s.dim()).step_by(2).all(|m| s.amplitude(m) == C64::from(0.0)));
        // Ŝ carries (−tanh r)^m on |2m⟩
        assert!(s.amplitude(1).re < 0.0 && s.amplitude(3).re > 0.0);
    }

    #[test]
    fn herald_rejects_unusable_inputs() {
        let t = TruncationConfig::with_dim(20).unwrap();
        assert!(matches!(
            herald_from_subtracted(0.0, 2, t),
            Err(FockError::ZeroNorm { .. })
        ));
        assert!(herald_from_subtracted(-0.1, 2, t).is_err());
        assert!(herald_from_subtracted(0.5, 18, t).is_err());
    }

    #[test]
    fn state_dump_shape() {
        let t = TruncationConfig::with_dim(3).unwrap();
        let s = FockState::basis(1, t).unwrap();
        let v: Value = serde_json::from_str(&state_json(&s, BTreeMap::new())).unwrap();
        assert_eq!(v["dim"], 3);
        assert_eq!(v["amplitudes"][1], json!([1.0, 0.0]));
    }
}
