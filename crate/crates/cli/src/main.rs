//! `tomo` - data-pattern tomography experiment driver.
//!
//! Exit codes: 0 success, 2 config error, 3 solver non-convergence in at
//! least one cell (results are still written, rows carry a converged flag).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tomo_cli::{config, engine, Experiment, RunOptions};

#[derive(Parser)]
#[command(
    name = "tomo",
    about = "Data-pattern tomography of optical quantum states",
    long_about = None,
    after_help = "\
Output CSV columns (per-cell experiments):\n  \
experiment,state,grid_kind,nodes,pitch,radial_step,angular_step,n_rep,sigma,\n  \
trial,fidelity,purity,hs_distance,witness_trace,witness_trace_precise,\n  \
negativity,detected,min_pt_eig,objective,iterations,converged,\n  \
constraint_violation,preclip_min_eig\n\
Aggregated experiments (noise-sweep, reconstruct-sweep) report\n  \
trials,fidelity_mean/std/min/max,purity_mean,witness_trace_mean/max,\n  \
negativity_mean,detected_all,converged_all,constraint_violation_max\n\
per cell instead of per-trial values; pass --raw to also keep per-trial rows\n\
in <output>.raw.csv. Plot-ready x,y series go to --plot-dir, one file per\n\
state, x being the sweep axis (pitch, radial step, n_rep or sigma)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit each state on a single probe grid and report metrics
    Represent(RunArgs),
    /// Fit each state across a grid-parameter sweep
    RepresentSweep(RunArgs),
    /// Perturb fitted coefficients with Gaussian noise and track fidelity
    NoiseSweep(RunArgs),
    /// Simulate finite-copy data patterns and reconstruct states
    ReconstructSweep(RunArgs),
    /// Representation sweep reporting entanglement-witness columns
    WitnessTable(RunArgs),
    /// Representation sweep reporting purity columns
    PurityTable(RunArgs),
    /// Emit the probe-grid amplitudes as CSV (xi,mode,re,im)
    GridDump(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the JSON experiment config
    config: PathBuf,
    /// Override the config master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of the config output_path (stdout if neither)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = rayon default)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also keep per-trial rows for aggregated experiments
    #[arg(long)]
    raw: bool,
    /// Serialize every fitted state next to the output file
    #[arg(long)]
    dump_states: bool,
    /// Directory for plot-ready x,y series (one file per state)
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Represent(_) => Experiment::Represent,
            Command::RepresentSweep(_) => Experiment::RepresentSweep,
            Command::NoiseSweep(_) => Experiment::NoiseSweep,
            Command::ReconstructSweep(_) => Experiment::ReconstructSweep,
            Command::WitnessTable(_) => Experiment::WitnessTable,
            Command::PurityTable(_) => Experiment::PurityTable,
            Command::GridDump(_) => Experiment::GridDump,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Represent(a)
            | Command::RepresentSweep(a)
            | Command::NoiseSweep(a)
            | Command::ReconstructSweep(a)
            | Command::WitnessTable(a)
            | Command::PurityTable(a)
            | Command::GridDump(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let experiment = cli.command.experiment();
    let args = cli.command.args();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match config::validate_config(&text, experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let output: Option<PathBuf> = args
        .output
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    if args.dump_states && output.is_none() {
        eprintln!("config error: --dump-states requires an output path (config `output_path` or --output)");
        return ExitCode::from(2);
    }

    let opts = RunOptions {
        raw_rows: args.raw,
        dump_states: args.dump_states,
    };
    let run_it = || engine::run(&cfg, &opts);
    let summary = if args.threads > 0 {
        let pool = match rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
        {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                return ExitCode::FAILURE;
            }
        };
        pool.install(run_it)
    } else {
        run_it()
    };
    let summary = match summary {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    if let Err(e) = write_outputs(&summary, output.as_deref(), args.plot_dir.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }

    if summary.nonconverged > 0 {
        eprintln!(
            "warning: {} cell(s) did not converge within the iteration budget",
            summary.nonconverged
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn write_outputs(
    summary: &engine::RunSummary,
    output: Option<&Path>,
    plot_dir: Option<&Path>,
) -> std::io::Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, &summary.csv)?;
            if let Some(raw) = &summary.raw_csv {
                std::fs::write(raw_path(path), raw)?;
            }
            if !summary.dumped_states.is_empty() {
                let dir = states_dir(path);
                std::fs::create_dir_all(&dir)?;
                for (stem, text) in &summary.dumped_states {
                    std::fs::write(dir.join(format!("{stem}.csv")), text)?;
                }
            }
        }
        None => print!("{}", summary.csv),
    }
    if let Some(dir) = plot_dir {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &summary.plot_series {
            std::fs::write(dir.join(format!("{name}.csv")), text)?;
        }
    }
    Ok(())
}

fn raw_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".raw.csv");
    PathBuf::from(os)
}

fn states_dir(path: &Path) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_owned();
    let mut dir = path.to_path_buf();
    let mut name = stem;
    name.push("_states");
    dir.set_file_name(name);
    dir
}
