use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qkolkata::classical::classical_report;
use qkolkata::experiments::{
    export_csv, export_json, export_svg_heatmap, ghz_family, run_sweep, threads_from_env, write_file,
    SweepConfig,
};
use qkolkata::qstate::StateJson;
use qkolkata::su_param::{fourier_gate, UnitaryJson};
use qkolkata::{
    best_response, build_partition, optimize_symmetric, symmetric_payoff, Error, GameSpec, Matrix,
    OptimizerConfig, State,
};

#[derive(Debug, Parser)]
#[command(name = "qkolkata", version, about = "Symmetric quantum Kolkata restaurant game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct SearchArgs {
    /// Multi-start restarts.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ascent iterations per restart.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

impl SearchArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize the shared strategy for one GHZ-family state.
    Optimize {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run the (M, N) grid of optimizations.
    Sweep {
        #[arg(long, default_value_t = 20)]
        mmax: usize,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
        /// Write the table here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write an SVG heatmap.
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Record the Nash gap of every cell.
        #[arg(long)]
        nash: bool,
    },
    /// Optimize, then search for the best unilateral deviation.
    NashCheck {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Expected payoff of every player for a state file and a shared unitary file.
    Payoff {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        unitary: PathBuf,
    },
    /// Classical uniform baseline and best symmetric mixed strategy.
    Classical {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Simplex grid resolution before local polish.
        #[arg(long, default_value_t = 60)]
        grid: usize,
    },
    /// Dump the winner set (and L/G/D class for 3x3) of every outcome.
    Partition {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Dump a GHZ-family state, optionally after a shared local unitary.
    State {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        /// Apply the Fourier gate on every player.
        #[arg(long, conflicts_with = "unitary")]
        fourier: bool,
        /// Apply the unitary from this file on every player.
        #[arg(long)]
        unitary: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("cannot encode output: {e}")))?;
    emit(&text)
}

fn emit(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .map_err(|source| Error::Io { path: "<stdout>".into(), source })
}

#[derive(Serialize)]
struct NashReport {
    theta: f64,
    phi: f64,
    payoff: f64,
    deviation_payoff: f64,
    gap: f64,
    converged: bool,
}

#[derive(Serialize)]
struct PayoffReport {
    payoffs: Vec<f64>,
}

fn run(cli: Cli) -> Result<(), Error> {
    let partition = || build_partition(GameSpec::three_qutrits());
    match cli.command {
        Command::Optimize { theta, phi, search } => {
            let initial: State = ghz_family(theta, phi);
            let result = optimize_symmetric(&initial, &partition()?, &search.config())?;
            print_json(&result.to_json())
        }
        Command::Sweep { mmax, nmax, search, out, output, heatmap, nash } => {
            let config = SweepConfig {
                m_max: mmax,
                n_max: nmax,
                optimizer: search.config(),
                nash,
                threads: threads_from_env(),
            };
            let rows = run_sweep(&config)?;
            let unconverged = rows.iter().filter(|r| !r.converged).count();
            if unconverged > 0 {
                eprintln!("warning: {unconverged} of {} cells did not meet the convergence tolerances", rows.len());
            }
            let table = match out {
                Format::Csv => export_csv(&rows)?,
                Format::Json => export_json(&rows)? + "\n",
            };
            match output {
                Some(path) => write_file(&path, &table)?,
                None => emit(&table)?,
            }
            if let Some(path) = heatmap {
                write_file(&path, &export_svg_heatmap(&rows, mmax, nmax)?)?;
            }
            Ok(())
        }
        Command::NashCheck { theta, phi, search } => {
            let partition = partition()?;
            let initial: State = ghz_family(theta, phi);
            let config = search.config();
            let optimum = optimize_symmetric(&initial, &partition, &config)?;
            let payoff = symmetric_payoff(&optimum.best_unitary, &initial, &partition)?;
            let deviation = best_response(&initial, &optimum.best_unitary, 0, &partition, &config)?;
            print_json(&NashReport {
                theta,
                phi,
                payoff,
                deviation_payoff: deviation.payoff,
                gap: deviation.payoff - payoff,
                converged: optimum.converged && deviation.converged,
            })
        }
        Command::Payoff { state, unitary } => {
            let initial = State::from_json(&read_json::<StateJson>(&state)?)?;
            let u = Matrix::from_json(&read_json::<UnitaryJson>(&unitary)?)?;
            if !u.is_unitary(1e-9) {
                eprintln!("warning: {} is not unitary (defect {:e})", unitary.display(), u.unitarity_defect());
            }
            let partition = build_partition(GameSpec::new(initial.n(), initial.m())?)?;
            let final_state = initial.apply_local(&vec![u; initial.n()])?;
            print_json(&PayoffReport { payoffs: partition.payoffs(&final_state)? })
        }
        Command::Classical { n, m, grid } => print_json(&classical_report(GameSpec::new(n, m)?, grid)?),
        Command::Partition { n, m } => print_json(&build_partition(GameSpec::new(n, m)?)?.dump()),
        Command::State { theta, phi, fourier, unitary } => {
            let mut state: State = ghz_family(theta, phi);
            let u = match (fourier, unitary) {
                (true, _) => Some(fourier_gate(3)?),
                (false, Some(path)) => Some(Matrix::from_json(&read_json::<UnitaryJson>(&path)?)?),
                (false, None) => None,
            };
            if let Some(u) = u {
                state = state.apply_local(&[u.clone(), u.clone(), u])?;
            }
            print_json(&state.to_json())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
