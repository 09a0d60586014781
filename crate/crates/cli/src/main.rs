use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use catsim::experiments::{
    fig2_wigner_panels, format_number, parse_grid, parse_int_grid, run_fig2, run_fig3, run_fig4, run_fig5, state_json,
    RunConfig, SweepResult, FIG2_ETAS, FIG3_BETAS, FIG4_ALPHAS, FIG5_BETAS, FIG5_NS,
};
use catsim::metrics::{qfi_displacement, wigner, GridSpec, DEFAULT_QFI_EPSILON};
use catsim::{FockError, TruncationConfig};

mod recipe;
use recipe::{parse_angle, Recipe};

#[derive(Parser, Debug)]
#[command(
    name = "catsim",
    version,
    about = "Four-component cat state generation in a truncated Fock space"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Fock levels per mode (default: chosen from the amplitude).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Largest probability allowed outside the truncation.
    #[arg(long, global = true, default_value_t = TruncationConfig::DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// Highest photon count kept in outcome sums.
    #[arg(long, global = true, default_value_t = 20)]
    n_cutoff: usize,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a gnuplot script for the table.
    #[arg(long, global = true)]
    plot_script: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean heralded fidelity against PNRD efficiency.
    Fig2 {
        #[arg(long, default_value = "1.0,1.5,2.0,2.5")]
        beta: String,
        #[arg(long, default_value = FIG2_ETAS)]
        eta: String,
        /// Write Wigner grids of the four panel states to this JSON file.
        #[arg(long)]
        wigner_panels: Option<PathBuf>,
        /// Half-width and points per axis of the panel grids.
        #[arg(long, default_value = "4.0,81")]
        panel_grid: String,
    },
    /// Outcome-averaged displacement QFI.
    Fig3 {
        #[arg(long, default_value = FIG3_BETAS)]
        beta: String,
        #[arg(long, default_value = "1.0,0.95,0.9")]
        eta: String,
        /// Directions: list or lo:hi:step, radians or with a deg suffix.
        #[arg(long, default_value = "0,45deg")]
        phi: String,
    },
    /// Click heralding with multiplexed on-off detectors.
    Fig4 {
        #[arg(long, default_value = FIG4_ALPHAS)]
        alpha: String,
        #[arg(long, default_value = "1,2,4,8")]
        m: String,
    },
    /// Photon-subtracted squeezed inputs with optimized squeezing.
    Fig5 {
        #[arg(long, default_value = FIG5_NS)]
        n: String,
        #[arg(long, default_value = FIG5_BETAS)]
        beta: String,
    },
    /// Fock amplitudes of a state.
    State(StateArgs),
    /// Wigner function of a state on a square grid.
    Wigner {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 4.0)]
        half_width: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Displacement QFI of a state.
    Qfi {
        #[arg(long)]
        state: String,
        /// Directions: list or lo:hi:step, radians or with a deg suffix.
        #[arg(long, default_value = "0")]
        phi: String,
        #[arg(long, default_value_t = DEFAULT_QFI_EPSILON)]
        epsilon: f64,
    },
}

#[derive(Args, Debug)]
struct StateArgs {
    /// vacuum, fock, coherent, two_cat, four_cat, squeezed or subtracted.
    kind: Option<String>,
    /// Full recipe such as four_cat:1.5,45deg,0 instead of KIND and flags.
    #[arg(long, conflicts_with = "kind")]
    state: Option<String>,
    #[arg(long, alias = "alpha")]
    beta: Option<f64>,
    /// Phase of the amplitude, radians or with a deg suffix.
    #[arg(long, default_value = "0")]
    arg: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    /// s or sdag.
    #[arg(long, default_value = "s")]
    sign: String,
    /// even or odd.
    #[arg(long, default_value = "even")]
    parity: String,
}

impl StateArgs {
    fn recipe(&self) -> Result<Recipe, FockError> {
        if let Some(text) = &self.state {
            return text.parse();
        }
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| FockError::InvalidArgument("give a state kind or --state".into()))?;
        let need =
            |v: Option<f64>, flag: &str| v.ok_or_else(|| FockError::InvalidArgument(format!("{kind} needs --{flag}")));
        let angle = parse_angle(&self.arg)?;
        let text = match kind {
            "vacuum" => "vacuum".to_string(),
            "fock" => format!("fock:{}", need(self.n.map(|n| n as f64), "n")?),
            "coherent" => format!("coherent:{},{angle}", need(self.beta, "beta")?),
            "two_cat" => format!("two_cat:{},{angle},{}", need(self.beta, "beta")?, self.parity),
            "four_cat" => format!("four_cat:{},{angle},{}", need(self.beta, "beta")?, self.k.unwrap_or(0)),
            "squeezed" | "subtracted" => format!("{kind}:{},{}", need(self.r, "r")?, self.sign),
            other => format!("{other}:"),
        };
        text.parse()
    }
}

/// Numerical failures exit with 3, bad input with 2.
fn exit_code(err: &FockError) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

enum Failure {
    Model(FockError),
    Io(io::Error),
}

impl From<FockError> for Failure {
    fn from(e: FockError) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(global: &Global, text: &str) -> io::Result<()> {
    match &global.out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn render(global: &Global, sweep: &SweepResult) -> String {
    match global.format {
        Format::Csv => sweep.to_csv(),
        Format::Json => sweep.to_json(),
    }
}

fn plot_script(sweep: &SweepResult, data: &Path) -> String {
    let schema = &sweep.schema;
    let figure = sweep.metadata.get("figure").and_then(Value::as_str).unwrap_or("sweep");
    let (x, y, group) = match figure {
        "fig2" => (2, 3, 1),
        "fig3" => (1, 4, 2),
        "fig4" => (1, 3, 2),
        "fig5" => (2, 4, 1),
        _ => (1, 2, 0),
    };
    let mut s = String::new();
    s.push_str(&format!("# {figure}: {} against {}\n", schema[y - 1], schema[x - 1]));
    s.push_str("set datafile separator ','\nset key outside\n");
    s.push_str(&format!(
        "set xlabel '{}'\nset ylabel '{}'\n",
        schema[x - 1],
        schema[y - 1]
    ));
    let file = data.display();
    if group == 0 {
        s.push_str(&format!(
            "plot '{file}' using {x}:{y} skip 1 with linespoints notitle\n"
        ));
    } else {
        let mut keys: Vec<f64> = sweep.rows.iter().map(|r| r[group - 1]).collect();
        keys.dedup();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let name = &schema[group - 1];
        let series: Vec<String> = keys
            .iter()
            .map(|k| {
                let k = format_number(*k);
                format!(
                    "'{file}' using (abs(${group}-{k})<1e-9?${x}:1/0):{y} skip 1 with linespoints title '{name}={k}'"
                )
            })
            .collect();
        s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    }
    s
}

/// A `lo:hi:step` range in radians, or a list of angles.
fn parse_angles(text: &str) -> Result<Vec<f64>, FockError> {
    if text.contains(':') {
        parse_grid(text)
    } else {
        text.split(',').map(parse_angle).collect()
    }
}

fn config(global: &Global) -> RunConfig {
    RunConfig {
        dim: global.dim,
        tail_tol: global.tail_tol,
        n_cutoff: global.n_cutoff,
    }
}

fn recipe_trunc(global: &Global, recipe: &Recipe) -> Result<TruncationConfig, FockError> {
    let dim = global
        .dim
        .unwrap_or_else(|| recipe.default_dim(global.tail_tol, global.n_cutoff));
    TruncationConfig::new(dim, global.tail_tol)
}

fn finish_sweep(global: &Global, sweep: &SweepResult) -> Result<(), Failure> {
    emit(global, &render(global, sweep))?;
    if let Some(path) = &global.plot_script {
        let data = global.out.clone().unwrap_or_else(|| PathBuf::from("data.csv"));
        fs::write(path, plot_script(sweep, &data))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let global = &cli.global;
    let cfg = config(global);
    match &cli.command {
        Command::Fig2 {
            beta,
            eta,
            wigner_panels,
            panel_grid,
        } => {
            let sweep = run_fig2(&parse_grid(beta)?, &parse_grid(eta)?, &cfg)?;
            if let Some(path) = wigner_panels {
                let spec = parse_grid(panel_grid)?;
                let [half, points] = spec[..] else {
                    return Err(FockError::InvalidArgument("--panel-grid takes HALF_WIDTH,POINTS".into()).into());
                };
                let grid = GridSpec::square(half, points as usize)?;
                let panels = fig2_wigner_panels(&grid, &cfg)?;
                let mut text = serde_json::to_string_pretty(&panels).expect("plain data");
                text.push('\n');
                fs::write(path, text)?;
            }
            finish_sweep(global, &sweep)
        }
        Command::Fig3 { beta, eta, phi } => {
            let phis = parse_angles(phi)?;
            finish_sweep(global, &run_fig3(&parse_grid(beta)?, &parse_grid(eta)?, &phis, &cfg)?)
        }
        Command::Fig4 { alpha, m } => finish_sweep(global, &run_fig4(&parse_grid(alpha)?, &parse_int_grid(m)?, &cfg)?),
        Command::Fig5 { n, beta } => finish_sweep(global, &run_fig5(&parse_int_grid(n)?, &parse_grid(beta)?, &cfg)?),
        Command::State(args) => {
            let recipe = args.recipe()?;
            let trunc = recipe_trunc(global, &recipe)?;
            let state = recipe.pure(trunc)?;
            let text = match global.format {
                Format::Json => {
                    let mut meta = BTreeMap::new();
                    meta.insert("state".into(), json!(recipe.to_string()));
                    meta.insert("tail_tol".into(), json!(trunc.tail_tol()));
                    state_json(&state, meta)
                }
                Format::Csv => {
                    let mut s = String::from("n,re,im\n");
                    for (n, z) in state.amplitudes().iter().enumerate() {
                        s.push_str(&format!("{n},{},{}\n", format_number(z.re), format_number(z.im)));
                    }
                    s
                }
            };
            Ok(emit(global, &text)?)
        }
        Command::Wigner {
            state,
            half_width,
            points,
        } => {
            let recipe: Recipe = state.parse()?;
            let trunc = recipe_trunc(global, &recipe)?;
            let rho = recipe.density(trunc, global.n_cutoff)?;
            let grid = wigner(&rho, &GridSpec::square(*half_width, *points)?)?;
            if !grid.reliable {
                eprintln!("warning: grid reaches |gamma|^2 > dim/4; increase --dim for trustworthy edges");
            }
            let text = match global.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&grid).expect("plain data");
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let (xs, ps) = (grid.spec().xs(), grid.spec().ps());
                    let mut s = String::from("x,p,w\n");
                    for (ip, p) in ps.iter().enumerate() {
                        for (ix, x) in xs.iter().enumerate() {
                            s.push_str(&format!(
                                "{},{},{}\n",
                                format_number(*x),
                                format_number(*p),
                                format_number(grid.value(ip, ix))
                            ));
                        }
                    }
                    s
                }
            };
            Ok(emit(global, &text)?)
        }
        Command::Qfi { state, phi, epsilon } => {
            let recipe: Recipe = state.parse()?;
            let trunc = recipe_trunc(global, &recipe)?;
            let rho = recipe.density(trunc, global.n_cutoff)?;
            let phis = parse_angles(phi)?;
            let mut meta = BTreeMap::new();
            meta.insert("state".into(), json!(recipe.to_string()));
            meta.insert("dim".into(), json!(trunc.dim()));
            meta.insert("epsilon".into(), json!(epsilon));
            let mut sweep = SweepResult {
                schema: ["phi", "qfi", "richardson_residual"].map(String::from).to_vec(),
                rows: Vec::new(),
                metadata: meta,
            };
            for p in phis {
                let q = qfi_displacement(&rho, p, *epsilon)?;
                sweep.rows.push(vec![p, q.value, q.richardson_residual]);
            }
            finish_sweep(global, &sweep)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
