//! State recipes such as `coherent:1.0` or `four_cat:1.5,45deg,0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use catsim::circuit::{cat_circuit, HERALD_MODE};
use catsim::detection::{condition_pure_on_povm, onoff_click_povm, pnrd_outcome_distribution};
use catsim::states::{
    coherent, four_cat, photon_subtract, squeezed_vacuum_series, two_cat, CatAxis, CatPhase, Parity, SqueezeSign,
};
use catsim::{DensityMatrix, FockError, FockState, Result, TruncationConfig, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    Vacuum,
    Fock(usize),
    Coherent(C64),
    TwoCat(C64, Parity),
    FourCat(C64, usize),
    Squeezed(f64, SqueezeSign),
    Subtracted(f64, SqueezeSign),
    /// Cat circuit heralded by `n` counts of a PNRD with efficiency `eta`.
    Heralded {
        alpha: f64,
        eta: f64,
        n: usize,
    },
    /// Cat circuit heralded by a click among `m` on-off detectors.
    Click {
        alpha: f64,
        m: usize,
    },
}

fn invalid(msg: impl Into<String>) -> FockError {
    FockError::InvalidArgument(msg.into())
}

/// Radians, or degrees with a `deg` suffix.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let (number, scale) = match t.strip_suffix("deg") {
        Some(n) => (n, PI / 180.0),
        None => (t, 1.0),
    };
    number
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| invalid(format!("invalid angle {text:?}")))
}

fn number<T: FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| invalid(format!("invalid {what} {text:?}")))
}

fn sign(text: Option<&str>) -> Result<SqueezeSign> {
    match text.map(str::trim) {
        None | Some("s") | Some("S") => Ok(SqueezeSign::S),
        Some("sdag") | Some("Sdag") | Some("s_dagger") => Ok(SqueezeSign::SDagger),
        Some(other) => Err(invalid(format!("unknown squeezing sign {other:?} (use s or sdag)"))),
    }
}

fn amplitude(args: &[&str]) -> Result<C64> {
    let amp: f64 = number(args.first().ok_or_else(|| invalid("missing amplitude"))?, "amplitude")?;
    let arg = match args.get(1) {
        Some(a) => parse_angle(a)?,
        None => 0.0,
    };
    Ok(C64::from_polar(amp, arg))
}

impl FromStr for Recipe {
    type Err = FockError;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let args: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',').collect()
        };
        let arity = |lo: usize, hi: usize| {
            if (lo..=hi).contains(&args.len()) {
                Ok(())
            } else {
                Err(invalid(format!(
                    "{kind} takes {lo} to {hi} parameters, got {}",
                    args.len()
                )))
            }
        };
        match kind.trim() {
            "vacuum" => arity(0, 0).map(|_| Recipe::Vacuum),
            "fock" => {
                arity(1, 1)?;
                Ok(Recipe::Fock(number(args[0], "photon number")?))
            }
            "coherent" => {
                arity(1, 2)?;
                Ok(Recipe::Coherent(amplitude(&args)?))
            }
            "two_cat" => {
                arity(1, 3)?;
                let (parity, amp_args) = match args.last().map(|s| s.trim()) {
                    Some("even") => (Parity::Even, &args[..args.len() - 1]),
                    Some("odd") => (Parity::Odd, &args[..args.len() - 1]),
                    _ => (Parity::Even, &args[..]),
                };
                if amp_args.len() > 2 {
                    return Err(invalid("two_cat takes amplitude[,angle][,even|odd]"));
                }
                Ok(Recipe::TwoCat(amplitude(amp_args)?, parity))
            }
            "four_cat" => {
                arity(3, 3)?;
                let k: usize = number(args[2], "class")?;
                if k > 3 {
                    return Err(invalid(format!("class must be 0..3, got {k}")));
                }
                Ok(Recipe::FourCat(amplitude(&args[..2])?, k))
            }
            "squeezed" | "subtracted" => {
                arity(1, 2)?;
                let r: f64 = number(args[0], "squeezing")?;
                let s = sign(args.get(1).copied())?;
                Ok(if kind == "squeezed" {
                    Recipe::Squeezed(r, s)
                } else {
                    Recipe::Subtracted(r, s)
                })
            }
            "heralded" => {
                arity(3, 3)?;
                Ok(Recipe::Heralded {
                    alpha: number(args[0], "amplitude")?,
                    eta: number(args[1], "efficiency")?,
                    n: number(args[2], "photon count")?,
                })
            }
            "click" => {
                arity(2, 2)?;
                Ok(Recipe::Click {
                    alpha: number(args[0], "amplitude")?,
                    m: number(args[1], "detector count")?,
                })
            }
            other => Err(invalid(format!(
                "unknown state {other:?}; expected vacuum, fock, coherent, two_cat, four_cat, squeezed, \
                 subtracted, heralded or click"
            ))),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let polar = |z: &C64| format!("{},{}", z.norm(), z.arg());
        let sign = |s: &SqueezeSign| match s {
            SqueezeSign::S => "s",
            SqueezeSign::SDagger => "sdag",
        };
        match self {
            Recipe::Vacuum => write!(f, "vacuum"),
            Recipe::Fock(n) => write!(f, "fock:{n}"),
            Recipe::Coherent(z) => write!(f, "coherent:{}", polar(z)),
            Recipe::TwoCat(z, p) => {
                let p = if *p == Parity::Even { "even" } else { "odd" };
                write!(f, "two_cat:{},{p}", polar(z))
            }
            Recipe::FourCat(z, k) => write!(f, "four_cat:{},{k}", polar(z)),
            Recipe::Squeezed(r, s) => write!(f, "squeezed:{r},{}", sign(s)),
            Recipe::Subtracted(r, s) => write!(f, "subtracted:{r},{}", sign(s)),
            Recipe::Heralded { alpha, eta, n } => write!(f, "heralded:{alpha},{eta},{n}"),
            Recipe::Click { alpha, m } => write!(f, "click:{alpha},{m}"),
        }
    }
}

/// Smallest multiple of ten holding a squeezed vacuum to `tail_tol`.
fn squeezed_dim(r: f64, tail_tol: f64) -> usize {
    let t2 = r.tanh().powi(2);
    if t2 == 0.0 {
        return 20;
    }
    // |c_{2m}|² decays like t^{2m}/√m; this bound is generous
    let m = (tail_tol * (1.0 - t2) / 4.0).ln() / t2.ln();
    let d = (2.0 * m.max(0.0)).ceil() as usize + 4;
    (d.max(20)).div_ceil(10) * 10
}

impl Recipe {
    /// Default truncation when no dimension is given.
    pub fn default_dim(&self, tail_tol: f64, n_cutoff: usize) -> usize {
        match self {
            Recipe::Vacuum => 20,
            Recipe::Fock(n) => (n + 1).max(20),
            Recipe::Coherent(z) | Recipe::TwoCat(z, _) | Recipe::FourCat(z, _) => {
                TruncationConfig::for_amplitude(z.norm()).dim()
            }
            Recipe::Squeezed(r, _) | Recipe::Subtracted(r, _) => squeezed_dim(*r, tail_tol) + 2,
            Recipe::Heralded { alpha, n, .. } => TruncationConfig::for_amplitude(*alpha)
                .dim()
                .max(n + 1)
                .max(n_cutoff + 1),
            Recipe::Click { alpha, .. } => TruncationConfig::for_amplitude(*alpha).dim(),
        }
    }

    /// The state as a ket; mixed recipes are rejected.
    pub fn pure(&self, trunc: TruncationConfig) -> Result<FockState> {
        match *self {
            Recipe::Vacuum => Ok(FockState::vacuum(trunc)),
            Recipe::Fock(n) => FockState::basis(n, trunc),
            Recipe::Coherent(z) => coherent(z, trunc),
            Recipe::TwoCat(z, parity) => two_cat(
                z,
                CatPhase {
                    axis: CatAxis::Real,
                    parity,
                },
                trunc,
            ),
            Recipe::FourCat(z, k) => four_cat(z, k, trunc),
            Recipe::Squeezed(r, s) => squeezed_vacuum_series(r, s, trunc),
            Recipe::Subtracted(r, s) => Ok(photon_subtract(&squeezed_vacuum_series(r, s, trunc)?)?.0),
            Recipe::Heralded { .. } | Recipe::Click { .. } => {
                Err(invalid(format!("{self} is a mixed state and has no amplitudes")))
            }
        }
    }

    pub fn density(&self, trunc: TruncationConfig, n_cutoff: usize) -> Result<DensityMatrix> {
        match *self {
            Recipe::Heralded { alpha, eta, n } => {
                let psi = cat_circuit(alpha, trunc)?;
                let dist = pnrd_outcome_distribution(&psi, HERALD_MODE, eta, n_cutoff.max(n))?;
                Ok(dist.records()[n].conditional()?.clone())
            }
            Recipe::Click { alpha, m } => {
                let psi = cat_circuit(alpha, trunc)?;
                Ok(condition_pure_on_povm(&psi, HERALD_MODE, &onoff_click_povm(m, trunc)?)?.1)
            }
            _ => Ok(self.pure(trunc)?.to_density()),
        }
    }
}
