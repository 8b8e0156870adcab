use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use spinchain::config::{load_spec, ExperimentSpec, Preset};
use spinchain::experiment::{self, ConvergenceRow};
use spinchain::model::BasisIndex;
use spinchain::{Error, Result};

#[derive(Parser)]
#[command(name = "spinchain", version, about = "Pulse-level simulator for Ising-coupled spin-chain qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file.
    Run {
        spec: PathBuf,
        /// Override the integrator step.
        #[arg(long)]
        step: Option<f64>,
        /// Directory for the trace and summary files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a built-in experiment (not, hadamard, cnot, ccnot, teleport).
    Preset {
        name: String,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Rerun at successively halved steps and estimate the convergence order.
    Converge {
        /// Experiment file, or the name of a built-in experiment.
        spec: String,
        #[arg(long, default_value_t = 3)]
        halvings: usize,
        /// Starting step (defaults to the experiment's step).
        #[arg(long)]
        step: Option<f64>,
    },
    /// Print a built-in experiment in the file format.
    Describe { name: String },
}

fn resolve(out: &Path, given: Option<&Path>, fallback: String) -> PathBuf {
    match given {
        Some(p) if p.is_absolute() => p.to_path_buf(),
        Some(p) => out.join(p),
        None => out.join(fallback),
    }
}

fn run_and_write(mut spec: ExperimentSpec, step: Option<f64>, out: &Path) -> Result<()> {
    if step.is_some() {
        spec.step = step;
    }
    let n = spec.n();
    for p in &spec.pulses {
        if let (Ok(a), Ok(b)) = (BasisIndex::new(p.i, n), BasisIndex::new(p.j, n)) {
            info!("R{}{}({} pi): {} <-> {}", p.i, p.j, p.multiple, a.ket(), b.ket());
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    let result = experiment::run_experiment(&spec)?;
    let trace = resolve(out, spec.trace.as_deref(), format!("{}_trace.csv", spec.name));
    let summary = resolve(out, spec.summary.as_deref(), format!("{}_summary.json", spec.name));
    experiment::write_trace_file(&trace, &result.series)?;
    experiment::write_summary_file(&summary, &result.summary)?;
    println!("{}", experiment::summary_json(&result.summary));
    info!("wrote {} and {}", trace.display(), summary.display());
    Ok(())
}

fn print_convergence(rows: &[ConvergenceRow]) {
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
    println!("{:>14} {:>14} {:>14} {:>14} {:>10}  status", "step", "delta", "pop_delta", "ratio", "order");
    for r in rows {
        let status = r.error.as_deref().unwrap_or("ok");
        let order = r.order.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:>14.6e} {:>14} {:>14} {:>14} {:>10}  {status}",
            r.step,
            opt(r.delta),
            opt(r.population_delta),
            opt(r.ratio),
            order
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { spec, step, out } => run_and_write(load_spec(&spec)?, step, &out),
        Command::Preset { name, step, out } => run_and_write(name.parse::<Preset>()?.spec(), step, &out),
        Command::Converge { spec, halvings, step } => {
            let path = Path::new(&spec);
            let mut spec = match spec.parse::<Preset>() {
                Ok(p) if !path.exists() => p.spec(),
                _ => load_spec(path)?,
            };
            if step.is_some() {
                spec.step = step;
            }
            let rows = experiment::convergence_report(&spec, halvings)?;
            print_convergence(&rows);
            Ok(())
        }
        Command::Describe { name } => {
            print!("{}", name.parse::<Preset>()?.spec().describe());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
