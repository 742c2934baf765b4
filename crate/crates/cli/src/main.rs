//! `qdiff`: state summaries, flow tables, verifier sweeps and plot data.
//!
//! Exit codes: 0 success, 1 I/O, 2 parse, 3 validation, 4 verification
//! failure, 5 unconverged quadrature or finite-difference step below roundoff.

mod input;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qdiff::fock::{
    amplitude, displaced_thermal_fock, displaced_thermal_log, relative_entropy_with_log,
    spectral_entropy, spectral_overlap, spectral_purity, FockDensityMatrix,
};
use qdiff::functionals::{entropy, hs_overlap, purity, relative_entropy};
use qdiff::grid::{grid_dirichlet_with_tolerance, grid_purity_with_tolerance, wigner_samples};
use qdiff::semigroup::evolve_gaussian;
use qdiff::verify::{self, TheoremId};
use qdiff::{EntropicProfile, Error, GaussianState, RunConfig};
use serde_json::json;

use input::Input;
use output::{csv_bytes, num, to_json, write_file, Stamp};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Validation(String),
    Core(Error),
    VerificationFailed(Vec<TheoremId>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::VerificationFailed(_) => 4,
            CliError::Core(e) => match e {
                Error::DimensionMismatch { .. } => 2,
                Error::QuadratureUnconverged { .. } | Error::StepTooSmall(_) => 5,
                _ => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::VerificationFailed(t) => {
                let tags: Vec<_> = t.iter().map(|t| t.tag()).collect();
                write!(f, "verification failed: {}", tags.join(", "))
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qdiff",
    version,
    about = "Quantum diffusion semigroup verification suite"
)]
struct Cli {
    /// JSON run configuration; missing fields take defaults.
    #[arg(long, global = true, env = "QDIFF_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report and data files.
    #[arg(long, global = true, default_value = "qdiff-out")]
    out: PathBuf,
    /// Nash constant used for every mode count.
    #[arg(long, global = true)]
    nash_constant: Option<f64>,
    /// Time step for flow derivatives.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    grid_l: Option<f64>,
    #[arg(long, global = true)]
    grid_m: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validation flags, symplectic spectrum and functionals of a state.
    State { spec: PathBuf },
    /// Functionals along the flow as CSV on stdout.
    Evolve {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        t: Vec<f64>,
    },
    /// Run one verifier (by tag) or `all`, writing JSON and CSV reports.
    Verify { target: String },
    /// Compare closed forms with the truncated Fock oracle for a
    /// thermal, coherent or displaced-thermal state.
    Oracle {
        spec: PathBuf,
        /// Reference state for overlap and relative entropy.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Gnuplot-ready grids (one-mode inputs) or flow curves.
    PlotData {
        spec: PathBuf,
        #[arg(long, value_enum)]
        what: PlotKind,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        t: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Wigner,
    Chi,
    Flow,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(c) = cli.nash_constant {
        cfg.nash_constant = Some(c);
    }
    if let Some(d) = cli.delta {
        cfg.delta_t = d;
    }
    if let Some(l) = cli.grid_l {
        cfg.grid_l = l;
    }
    if let Some(m) = cli.grid_m {
        cfg.grid_m = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "divergent".into())
}

const FLOW_COLUMNS: [&str; 6] = [
    "t",
    "entropy",
    "purity",
    "fisher_j",
    "dirichlet",
    "entropy_power",
];

fn flow_rows(state: &GaussianState, ts: &[f64]) -> Result<Vec<Vec<String>>, CliError> {
    ts.iter()
        .map(|&t| {
            let p = EntropicProfile::of(&evolve_gaussian(state, t)?)?;
            Ok(vec![
                num(t),
                num(p.entropy),
                num(p.purity),
                fmt_opt(p.fisher_j),
                num(p.dirichlet),
                num(p.entropy_power),
            ])
        })
        .collect()
}

fn cmd_state(spec: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let stamp = Stamp::of(cfg);
    let doc = match Input::load(spec)? {
        Input::Gaussian(st) => {
            let validation = st.validate()?;
            json!({
                "config_hash": stamp.config_hash,
                "seed": stamp.seed,
                "state": st.to_spec(),
                "validation": validation,
                "symplectic_eigenvalues": st.williamson()?.nu,
                "profile": EntropicProfile::of(&st)?,
            })
        }
        mixture @ Input::Mixture(_) => {
            let grid = mixture.grid(cfg.grid()?)?;
            let w = wigner_samples(&grid)?;
            json!({
                "config_hash": stamp.config_hash,
                "seed": stamp.seed,
                "grid": grid.header(),
                "purity": grid_purity_with_tolerance(&grid, cfg.quadrature_tolerance)?,
                "dirichlet": grid_dirichlet_with_tolerance(&grid, cfg.quadrature_tolerance)?,
                "min_wigner": w.min,
                "wigner_nonnegative": w.nonnegative,
            })
        }
    };
    print!("{}", to_json(&doc));
    Ok(())
}

fn cmd_evolve(spec: &Path, ts: &[f64], cfg: &RunConfig) -> Result<(), CliError> {
    let input = Input::load(spec)?;
    let state = input.gaussian("evolve")?;
    let stamp = Stamp::of(cfg);
    let bytes = csv_bytes(&json!(stamp), &FLOW_COLUMNS, flow_rows(state, ts)?);
    print!("{}", String::from_utf8(bytes).expect("csv is utf-8"));
    Ok(())
}

fn cmd_verify(target: &str, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let theorems: Vec<TheoremId> = if target == "all" {
        TheoremId::ALL.to_vec()
    } else {
        vec![target
            .parse()
            .map_err(|_| CliError::Parse(format!("unknown verifier {target:?}")))?]
    };
    ensure_dir(out)?;
    let stamp = Stamp::of(cfg);
    let mut failed = Vec::new();
    let mut first_error = None;
    for t in theorems {
        match verify::run(t, cfg) {
            Ok(report) => {
                output::write_report(out, &stamp, cfg, &report)?;
                println!("{}", output::summary_line(&report));
                if !report.passed() {
                    failed.push(t);
                }
            }
            Err(e) => {
                println!("{:<15} ERROR  {e}", t.tag());
                first_error.get_or_insert(CliError::Core(e));
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None if !failed.is_empty() => Err(CliError::VerificationFailed(failed)),
        None => Ok(()),
    }
}

/// `(nu, alpha)` of a one-mode state with isotropic covariance `nu I`.
fn fock_params(state: &GaussianState) -> Result<(f64, qdiff::Complex64), CliError> {
    let c = state.cov();
    if state.n() != 1 || (c[(0, 0)] - c[(1, 1)]).abs() > 1e-12 || c[(0, 1)].abs() > 1e-12 {
        return Err(CliError::Validation(
            "the Fock oracle needs a one-mode state with covariance nu * I".into(),
        ));
    }
    let mu = state.mean();
    Ok((c[(0, 0)], amplitude(mu[0], mu[1])))
}

fn fock_image(state: &GaussianState, dim: usize) -> Result<FockDensityMatrix, CliError> {
    let (nu, alpha) = fock_params(state)?;
    Ok(displaced_thermal_fock(nu, alpha, dim)?)
}

fn cmd_oracle(
    spec: &Path,
    reference: Option<&Path>,
    dim: Option<usize>,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let dim = dim.unwrap_or(cfg.fock_dim);
    let input = Input::load(spec)?;
    let state = input.gaussian("oracle")?;
    let fock = fock_image(state, dim)?;
    let stamp = Stamp::of(cfg);
    let mut doc = json!({
        "config_hash": stamp.config_hash,
        "seed": stamp.seed,
        "dim": dim,
        "entropy": {"closed_form": entropy(state)?, "fock": spectral_entropy(&fock)},
        "purity": {"closed_form": purity(state)?, "fock": spectral_purity(&fock)},
    });
    if let Some(path) = reference {
        let other_input = Input::load(path)?;
        let other = other_input.gaussian("oracle reference")?;
        let other_fock = fock_image(other, dim)?;
        doc["overlap"] = json!({
            "closed_form": hs_overlap(state, other)?,
            "fock": spectral_overlap(&fock, &other_fock)?,
        });
        let (nu, alpha) = fock_params(other)?;
        let log_other = displaced_thermal_log(nu, alpha, dim)?;
        doc["relative_entropy"] = json!({
            "closed_form": relative_entropy(state, other)?,
            "fock": relative_entropy_with_log(&fock, &log_other)?,
        });
    }
    print!("{}", to_json(&doc));
    Ok(())
}

fn cmd_plot_data(
    spec: &Path,
    what: PlotKind,
    ts: &[f64],
    cfg: &RunConfig,
    out: &Path,
) -> Result<(), CliError> {
    let input = Input::load(spec)?;
    let stamp = Stamp::of(cfg);
    ensure_dir(out)?;
    match what {
        PlotKind::Flow => {
            let path = out.join("flow.csv");
            let bytes = match &input {
                Input::Gaussian(st) => csv_bytes(&json!(stamp), &FLOW_COLUMNS, flow_rows(st, ts)?),
                Input::Mixture(_) => {
                    let grid = input.grid(cfg.grid()?)?;
                    let rows = ts
                        .iter()
                        .map(|&t| {
                            let g = grid.evolve(t)?;
                            Ok(vec![
                                num(t),
                                num(grid_purity_with_tolerance(&g, cfg.quadrature_tolerance)?),
                                num(grid_dirichlet_with_tolerance(&g, cfg.quadrature_tolerance)?),
                            ])
                        })
                        .collect::<Result<Vec<_>, CliError>>()?;
                    csv_bytes(&json!(stamp), &["t", "purity", "dirichlet"], rows)
                }
            };
            write_file(&path, &bytes)?;
            println!("{}", path.display());
        }
        PlotKind::Wigner | PlotKind::Chi => {
            let base = input.grid(cfg.grid()?)?;
            for &t in ts {
                let g = base.evolve(t)?;
                let cfg_g = g.config();
                let m = cfg_g.m;
                let mut header = json!({
                    "config_hash": stamp.config_hash,
                    "seed": stamp.seed,
                    "t": t,
                    "grid": g.header(),
                });
                let (name, columns, rows): (_, &[&str], Vec<Vec<String>>) = match what {
                    PlotKind::Wigner => {
                        let w = wigner_samples(&g)?;
                        header["min_wigner"] = json!(w.min);
                        header["integral"] = json!(w.integral);
                        let rows = (0..m * m)
                            .map(|k| {
                                vec![num(w.coord(k / m)), num(w.coord(k % m)), num(w.values[k])]
                            })
                            .collect();
                        ("wigner", &["u_q", "u_p", "wigner"], rows)
                    }
                    _ => {
                        let rows = (0..m * m)
                            .map(|k| {
                                let v = g.chi()[k];
                                vec![
                                    num(cfg_g.coord(k / m)),
                                    num(cfg_g.coord(k % m)),
                                    num(v.re),
                                    num(v.im),
                                ]
                            })
                            .collect();
                        ("chi", &["q", "p", "re", "im"], rows)
                    }
                };
                let path = out.join(format!("{name}_t{t}.csv"));
                write_file(&path, &csv_bytes(&header, columns, rows))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::State { spec } => cmd_state(spec, &cfg),
        Command::Evolve { spec, t } => cmd_evolve(spec, t, &cfg),
        Command::Verify { target } => cmd_verify(target, &cfg, &cli.out),
        Command::Oracle {
            spec,
            reference,
            dim,
        } => cmd_oracle(spec, reference.as_deref(), *dim, &cfg),
        Command::PlotData { spec, what, t } => cmd_plot_data(spec, *what, t, &cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdiff: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
