//! Sweep execution: builds the cell grid for an experiment, runs the cells on
//! a rayon pool, and renders deterministic CSV output.
//!
//! Determinism contract: cells are keyed by their list indices, every random
//! stream is derived from `(master_seed, lane, indices...)`, and rows are
//! sorted by key before rendering, so output bytes do not depend on worker
//! count or schedule.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;
use tomo_core::{
    assemble, build_witness, evaluate_witness, exact_probe_patterns, fidelity, fit_pattern,
    fit_state, hs_distance, named_state, negativity, partial_transpose, probabilities, purity,
    sample_pattern, split_seed, DataPattern, DensityMatrix, Error as CoreError, GridSpec,
    MeasurementSet, ProbeBasis,
};

use crate::config::{Experiment, ExperimentConfig};

/// Seed-derivation lanes; combined as
/// `split_seed(split_seed(master, lane), index...)`.
const LANE_NOISE: u64 = 1;
const LANE_PROBE: u64 = 2;
const LANE_SIGNAL: u64 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Also produce per-trial rows for aggregated experiments.
    pub raw_rows: bool,
    /// Serialize every fitted state (CSV text, keyed by cell label).
    pub dump_states: bool,
}

/// Everything a run produces, as strings so callers decide about files.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub csv: String,
    /// Per-trial rows when requested on an aggregated experiment.
    pub raw_csv: Option<String>,
    /// Plot-ready `x,y` series keyed by `(series name)`.
    pub plot_series: Vec<(String, String)>,
    /// Serialized states when requested: `(file stem, csv text)`.
    pub dumped_states: Vec<(String, String)>,
    /// Number of cells whose solver did not converge.
    pub nonconverged: usize,
}

// One computed cell ------------------------------------------------------------

#[derive(Debug, Clone)]
struct Row {
    // key fields
    state_idx: usize,
    grid_idx: usize,
    n_rep_idx: usize,
    sigma_idx: usize,
    trial: u64,
    // identity
    state: String,
    grid: Option<GridSpec>,
    n_rep: Option<u64>,
    sigma: Option<f64>,
    // metrics (absent where not applicable)
    fidelity: Option<f64>,
    purity: Option<f64>,
    hs_distance: Option<f64>,
    witness_trace: Option<f64>,
    witness_trace_precise: Option<f64>,
    negativity: Option<f64>,
    detected: Option<bool>,
    min_pt_eig: Option<f64>,
    objective: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
    constraint_violation: Option<f64>,
    preclip_min_eig: Option<f64>,
    dumped: Option<(String, String)>,
}

impl Row {
    fn key(&self) -> (usize, usize, usize, usize, u64) {
        (
            self.state_idx,
            self.grid_idx,
            self.n_rep_idx,
            self.sigma_idx,
            self.trial,
        )
    }

    fn empty(state_idx: usize, grid_idx: usize, state: &str, grid: &GridSpec) -> Self {
        Row {
            state_idx,
            grid_idx,
            n_rep_idx: 0,
            sigma_idx: 0,
            trial: 0,
            state: state.to_string(),
            grid: Some(*grid),
            n_rep: None,
            sigma: None,
            fidelity: None,
            purity: None,
            hs_distance: None,
            witness_trace: None,
            witness_trace_precise: None,
            negativity: None,
            detected: None,
            min_pt_eig: None,
            objective: None,
            iterations: None,
            converged: None,
            constraint_violation: None,
            preclip_min_eig: None,
            dumped: None,
        }
    }
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

fn grid_columns(grid: &Option<GridSpec>) -> (String, String, String, String, String) {
    match grid {
        Some(GridSpec::Square { nodes, pitch }) => (
            "square".into(),
            format!("{nodes}"),
            format!("{pitch}"),
            String::new(),
            String::new(),
        ),
        Some(GridSpec::Helical {
            nodes,
            radial_step,
            angular_step,
        }) => (
            "helical".into(),
            format!("{nodes}"),
            String::new(),
            format!("{radial_step}"),
            format!("{angular_step}"),
        ),
        None => Default::default(),
    }
}

const ROW_HEADER: &str = "experiment,state,grid_kind,nodes,pitch,radial_step,angular_step,n_rep,sigma,trial,fidelity,purity,hs_distance,witness_trace,witness_trace_precise,negativity,detected,min_pt_eig,objective,iterations,converged,constraint_violation,preclip_min_eig";

fn render_rows(experiment: Experiment, rows: &[Row]) -> String {
    let mut out = String::new();
    out.push_str(ROW_HEADER);
    out.push('\n');
    for row in rows {
        let (gk, n, p, dr, dphi) = grid_columns(&row.grid);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            experiment.name(),
            row.state,
            gk,
            n,
            p,
            dr,
            dphi,
            fmt_opt(&row.n_rep),
            fmt_opt(&row.sigma),
            row.trial,
            fmt_opt(&row.fidelity),
            fmt_opt(&row.purity),
            fmt_opt(&row.hs_distance),
            fmt_opt(&row.witness_trace),
            fmt_opt(&row.witness_trace_precise),
            fmt_opt(&row.negativity),
            fmt_opt(&row.detected),
            fmt_opt(&row.min_pt_eig),
            fmt_opt(&row.objective),
            fmt_opt(&row.iterations),
            fmt_opt(&row.converged),
            fmt_opt(&row.constraint_violation),
            fmt_opt(&row.preclip_min_eig),
        );
    }
    out
}

const AGG_HEADER: &str = "experiment,state,grid_kind,nodes,pitch,radial_step,angular_step,n_rep,sigma,trials,fidelity_mean,fidelity_std,fidelity_min,fidelity_max,purity_mean,witness_trace_mean,witness_trace_max,negativity_mean,detected_all,converged_all,constraint_violation_max";

fn mean(vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() / vals.len() as f64
}

fn std_dev(vals: &[f64]) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    let m = mean(vals);
    (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
}

fn render_aggregated(experiment: Experiment, rows: &[Row]) -> String {
    // Group rows by everything except the trial index.
    let mut groups: BTreeMap<(usize, usize, usize, usize), Vec<&Row>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.state_idx, row.grid_idx, row.n_rep_idx, row.sigma_idx))
            .or_default()
            .push(row);
    }
    let mut out = String::new();
    out.push_str(AGG_HEADER);
    out.push('\n');
    for group in groups.values() {
        let head = group[0];
        let (gk, n, p, dr, dphi) = grid_columns(&head.grid);
        let fids: Vec<f64> = group.iter().filter_map(|r| r.fidelity).collect();
        let purities: Vec<f64> = group.iter().filter_map(|r| r.purity).collect();
        let wit: Vec<f64> = group.iter().filter_map(|r| r.witness_trace).collect();
        let negs: Vec<f64> = group.iter().filter_map(|r| r.negativity).collect();
        let detected_all = group
            .iter()
            .all(|r| r.detected.unwrap_or(false));
        let has_detection = group.iter().any(|r| r.detected.is_some());
        let converged_all = group.iter().all(|r| r.converged.unwrap_or(true));
        let viol_max = group
            .iter()
            .filter_map(|r| r.constraint_violation)
            .fold(f64::NAN, f64::max);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            experiment.name(),
            head.state,
            gk,
            n,
            p,
            dr,
            dphi,
            fmt_opt(&head.n_rep),
            fmt_opt(&head.sigma),
            group.len(),
            if fids.is_empty() { String::new() } else { format!("{}", mean(&fids)) },
            if fids.is_empty() { String::new() } else { format!("{}", std_dev(&fids)) },
            if fids.is_empty() { String::new() } else { format!("{}", fids.iter().copied().fold(f64::INFINITY, f64::min)) },
            if fids.is_empty() { String::new() } else { format!("{}", fids.iter().copied().fold(f64::NEG_INFINITY, f64::max)) },
            if purities.is_empty() { String::new() } else { format!("{}", mean(&purities)) },
            if wit.is_empty() { String::new() } else { format!("{}", mean(&wit)) },
            if wit.is_empty() { String::new() } else { format!("{}", wit.iter().copied().fold(f64::NEG_INFINITY, f64::max)) },
            if negs.is_empty() { String::new() } else { format!("{}", mean(&negs)) },
            if has_detection { format!("{detected_all}") } else { String::new() },
            converged_all,
            if viol_max.is_nan() { String::new() } else { format!("{viol_max}") },
        );
    }
    out
}

// Shared per-grid context --------------------------------------------------------

struct GridContext {
    grid: GridSpec,
    basis: Arc<ProbeBasis>,
}

fn build_grid_contexts(cfg: &ExperimentConfig) -> Result<Vec<GridContext>, RunError> {
    cfg.grids
        .iter()
        .map(|grid| {
            let basis = ProbeBasis::from_grid(grid, cfg.space)?;
            Ok(GridContext {
                grid: *grid,
                basis: Arc::new(basis),
            })
        })
        .collect()
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Fit one state on one basis and fill the metric columns.
fn representation_row(
    cfg: &ExperimentConfig,
    ctx: &GridContext,
    state_idx: usize,
    grid_idx: usize,
    dump: bool,
) -> Result<Row, RunError> {
    let (label, spec) = &cfg.state_specs[state_idx];
    let target = spec.build(cfg.space)?;
    let fit = fit_state(&target, &ctx.basis, &cfg.solver)?;
    let assembled = assemble(&fit.coefficients, &ctx.basis)?;
    let mut row = Row::empty(state_idx, grid_idx, label, &ctx.grid);
    row.fidelity = Some(fidelity(&target, &assembled.state)?);
    row.purity = Some(purity(&assembled.state));
    row.hs_distance = Some(hs_distance(&target, &assembled.state)?);
    row.objective = Some(fit.objective);
    row.iterations = Some(fit.iterations);
    row.converged = Some(fit.converged);
    row.constraint_violation = Some(fit.constraint_violation);
    row.preclip_min_eig = Some(assembled.preclip_min_eigenvalue);
    if cfg.space.modes() == 2 {
        // Witness built from the precise state, evaluated on the fit; the
        // report's own trace doubles as the precise-state reference value.
        let report = build_witness(&target)?;
        let on_fit = evaluate_witness(&report.witness, &assembled.state)?;
        row.witness_trace = Some(on_fit);
        row.witness_trace_precise = Some(report.trace_value);
        row.negativity = Some(negativity(&assembled.state)?);
        row.detected = Some(on_fit < -tomo_core::witness::DETECTION_TOL);
        let pt = partial_transpose(&assembled.state)?;
        let (vals, _) = tomo_core::linalg::eigh(&pt)?;
        row.min_pt_eig = Some(vals.iter().copied().fold(f64::INFINITY, f64::min));
    }
    if dump {
        let stem = format!("{}_{}", sanitize(label), grid_idx);
        row.dumped = Some((stem, tomo_core::io::write_density_csv(&assembled.state)));
    }
    Ok(row)
}

fn run_representation(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Vec<Row>, Vec<(String, String)>), RunError> {
    let contexts = build_grid_contexts(cfg)?;
    let mut cells = Vec::new();
    for grid_idx in 0..contexts.len() {
        for state_idx in 0..cfg.state_specs.len() {
            cells.push((state_idx, grid_idx));
        }
    }
    let results: Vec<Result<Row, RunError>> = cells
        .par_iter()
        .map(|&(state_idx, grid_idx)| {
            representation_row(cfg, &contexts[grid_idx], state_idx, grid_idx, opts.dump_states)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by_key(|r| r.key());
    let dumped = rows
        .iter_mut()
        .filter_map(|r| r.dumped.take())
        .collect();
    Ok((rows, dumped))
}

fn run_noise_sweep(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Vec<Row>, Vec<(String, String)>), RunError> {
    let ctx = &build_grid_contexts(cfg)?[0];
    // Base fits once per state.
    let base: Vec<(DensityMatrix, Vec<f64>)> = cfg
        .state_specs
        .par_iter()
        .map(|(_, spec)| -> Result<_, RunError> {
            let target = spec.build(cfg.space)?;
            let fit = fit_state(&target, &ctx.basis, &cfg.solver)?;
            Ok((target, fit.coefficients))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::new();
    for state_idx in 0..cfg.state_specs.len() {
        for sigma_idx in 0..cfg.noise_sigmas.len() {
            for trial in 0..cfg.trials {
                cells.push((state_idx, sigma_idx, trial));
            }
        }
    }
    let rows: Vec<Result<Row, RunError>> = cells
        .par_iter()
        .map(|&(state_idx, sigma_idx, trial)| -> Result<Row, RunError> {
            let (label, _) = &cfg.state_specs[state_idx];
            let (target, coefficients) = &base[state_idx];
            let sigma = cfg.noise_sigmas[sigma_idx];
            let seed = split_seed(
                split_seed(
                    split_seed(split_seed(cfg.master_seed, LANE_NOISE), state_idx as u64),
                    sigma_idx as u64,
                ),
                trial,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perturbed: Vec<f64> = if sigma == 0.0 {
                coefficients.clone()
            } else {
                let normal = Normal::new(0.0, sigma).expect("sigma validated");
                coefficients
                    .iter()
                    .map(|&c| c + normal.sample(&mut rng))
                    .collect()
            };
            // Re-enforce physicality: clip eigenvalues at zero, renormalize
            // the trace.
            let raw = ctx.basis.mixture(&perturbed)?;
            let (state, preclip) = DensityMatrix::from_clipped(cfg.space, &raw)?;
            let mut row = Row::empty(state_idx, 0, label, &ctx.grid);
            row.sigma_idx = sigma_idx;
            row.sigma = Some(sigma);
            row.trial = trial;
            row.fidelity = Some(fidelity(target, &state)?);
            row.purity = Some(purity(&state));
            row.preclip_min_eig = Some(preclip);
            if opts.dump_states {
                let stem = format!("{}_{}_{}", sanitize(label), sigma_idx, trial);
                row.dumped = Some((stem, tomo_core::io::write_density_csv(&state)));
            }
            Ok(row)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.push(r?);
    }
    out.sort_by_key(|r| r.key());
    let dumped = out.iter_mut().filter_map(|r| r.dumped.take()).collect();
    Ok((out, dumped))
}

fn run_reconstruct_sweep(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Vec<Row>, Vec<(String, String)>), RunError> {
    let ctx = &build_grid_contexts(cfg)?[0];
    let meas = match &cfg.measurement {
        Some(grid) => {
            let amps = grid.amplitudes()?;
            match cfg.space.modes() {
                1 => MeasurementSet::new(cfg.space, amps.iter().map(|&a| vec![a]).collect())?,
                _ => {
                    let mut settings = Vec::with_capacity(amps.len() * amps.len());
                    for &a1 in &amps {
                        for &a2 in &amps {
                            settings.push(vec![a1, a2]);
                        }
                    }
                    MeasurementSet::new(cfg.space, settings)?
                }
            }
        }
        None => MeasurementSet::from_basis(&ctx.basis)?,
    };
    let exact_probes = Arc::new(exact_probe_patterns(&ctx.basis, &meas)?);
    let targets: Vec<(DensityMatrix, DataPattern)> = cfg
        .state_specs
        .iter()
        .map(|(_, spec)| -> Result<_, RunError> {
            let target = spec.build(cfg.space)?;
            let exact_signal = probabilities(&target, &meas)?;
            Ok((target, exact_signal))
        })
        .collect::<Result<Vec<_>, _>>()?;

    // One task per (n_rep, trial): probe patterns are sampled once and shared
    // across the signal states, as they would be measured once in practice.
    let mut tasks = Vec::new();
    for n_rep_idx in 0..cfg.n_rep_list.len() {
        let trials = if cfg.n_rep_list[n_rep_idx] == 0 { 1 } else { cfg.trials };
        for trial in 0..trials {
            tasks.push((n_rep_idx, trial));
        }
    }
    let results: Vec<Result<Vec<Row>, RunError>> = tasks
        .par_iter()
        .map(|&(n_rep_idx, trial)| -> Result<Vec<Row>, RunError> {
            let n_rep = cfg.n_rep_list[n_rep_idx];
            let probe_pats: Vec<DataPattern> = if n_rep == 0 {
                exact_probes.as_ref().clone()
            } else {
                let seed = split_seed(
                    split_seed(split_seed(cfg.master_seed, LANE_PROBE), n_rep_idx as u64),
                    trial,
                );
                exact_probes
                    .iter()
                    .enumerate()
                    .map(|(xi, p)| sample_pattern(p, n_rep, split_seed(seed, xi as u64)))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let mut rows = Vec::new();
            for (state_idx, (label, _)) in cfg.state_specs.iter().enumerate() {
                let (target, exact_signal) = &targets[state_idx];
                let signal = if n_rep == 0 {
                    exact_signal.clone()
                } else {
                    let seed = split_seed(
                        split_seed(
                            split_seed(
                                split_seed(cfg.master_seed, LANE_SIGNAL),
                                state_idx as u64,
                            ),
                            n_rep_idx as u64,
                        ),
                        trial,
                    );
                    sample_pattern(exact_signal, n_rep, seed)?
                };
                let fit = fit_pattern(&signal, &probe_pats, &ctx.basis, &cfg.solver)?;
                let assembled = assemble(&fit.coefficients, &ctx.basis)?;
                let mut row = Row::empty(state_idx, 0, label, &ctx.grid);
                row.n_rep_idx = n_rep_idx;
                row.n_rep = Some(n_rep);
                row.trial = trial;
                row.fidelity = Some(fidelity(target, &assembled.state)?);
                row.purity = Some(purity(&assembled.state));
                row.hs_distance = Some(hs_distance(target, &assembled.state)?);
                row.objective = Some(fit.objective);
                row.iterations = Some(fit.iterations);
                row.converged = Some(fit.converged);
                row.constraint_violation = Some(fit.constraint_violation);
                row.preclip_min_eig = Some(assembled.preclip_min_eigenvalue);
                if cfg.space.modes() == 2 {
                    // Witness built from the reconstruction itself.
                    let report = build_witness(&assembled.state)?;
                    row.witness_trace = Some(report.trace_value);
                    row.negativity = Some(negativity(&assembled.state)?);
                    row.detected = Some(report.detected);
                    row.min_pt_eig = Some(report.min_pt_eigenvalue);
                    let precise = build_witness(target)?;
                    row.witness_trace_precise = Some(precise.trace_value);
                }
                if opts.dump_states {
                    let stem = format!("{}_{}_{}", sanitize(label), n_rep_idx, trial);
                    row.dumped =
                        Some((stem, tomo_core::io::write_density_csv(&assembled.state)));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for group in results {
        out.extend(group?);
    }
    out.sort_by_key(|r| r.key());
    let dumped = out.iter_mut().filter_map(|r| r.dumped.take()).collect();
    Ok((out, dumped))
}

fn run_grid_dump(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let mut out = String::from("xi,mode,re,im\n");
    let grid = &cfg.grids[0];
    let amps = grid.amplitudes()?;
    match cfg.space.modes() {
        1 => {
            for (xi, a) in amps.iter().enumerate() {
                let _ = writeln!(out, "{xi},0,{},{}", a.re, a.im);
            }
        }
        _ => {
            let mut xi = 0usize;
            for a1 in &amps {
                for a2 in &amps {
                    let _ = writeln!(out, "{xi},0,{},{}", a1.re, a1.im);
                    let _ = writeln!(out, "{xi},1,{},{}", a2.re, a2.im);
                    xi += 1;
                }
            }
        }
    }
    Ok(RunSummary {
        csv: out,
        ..Default::default()
    })
}

/// Plot series: two-column x,y per state, x being the sweep axis.
fn plot_series(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<(String, String)> {
    let axis = |row: &Row| -> Option<f64> {
        match cfg.experiment {
            Experiment::ReconstructSweep => row.n_rep.map(|n| n as f64),
            Experiment::NoiseSweep => row.sigma,
            _ => row.grid.map(|g| match g {
                GridSpec::Square { pitch, .. } => pitch,
                GridSpec::Helical { radial_step, .. } => radial_step,
            }),
        }
    };
    let mut series: BTreeMap<usize, Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    for row in rows {
        let (Some(x), Some(f)) = (axis(row), row.fidelity) else {
            continue;
        };
        let entry = series.entry(row.state_idx).or_default();
        match entry.iter_mut().find(|(xx, _)| *xx == x) {
            Some((_, ys)) => ys.push(f),
            None => entry.push((x, vec![f])),
        }
    }
    series
        .into_iter()
        .map(|(state_idx, points)| {
            let name = format!(
                "{}_{}",
                cfg.experiment.name(),
                sanitize(&cfg.state_specs[state_idx].0)
            );
            let mut text = String::from("x,y\n");
            for (x, ys) in points {
                let _ = writeln!(text, "{},{}", x, mean(&ys));
            }
            (name, text)
        })
        .collect()
}

/// Runs an experiment to completion and renders its outputs.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, RunError> {
    if cfg.experiment == Experiment::GridDump {
        return run_grid_dump(cfg);
    }
    let (rows, dumped_states) = match cfg.experiment {
        Experiment::Represent
        | Experiment::RepresentSweep
        | Experiment::WitnessTable
        | Experiment::PurityTable => run_representation(cfg, opts)?,
        Experiment::NoiseSweep => run_noise_sweep(cfg, opts)?,
        Experiment::ReconstructSweep => run_reconstruct_sweep(cfg, opts)?,
        Experiment::GridDump => unreachable!(),
    };
    let nonconverged = rows
        .iter()
        .filter(|r| r.converged == Some(false))
        .count();
    let plot = plot_series(cfg, &rows);
    let summary = if cfg.experiment.aggregates() {
        RunSummary {
            csv: render_aggregated(cfg.experiment, &rows),
            raw_csv: opts
                .raw_rows
                .then(|| render_rows(cfg.experiment, &rows)),
            plot_series: plot,
            dumped_states,
            nonconverged,
        }
    } else {
        RunSummary {
            csv: render_rows(cfg.experiment, &rows),
            raw_csv: None,
            plot_series: plot,
            dumped_states,
            nonconverged,
        }
    };
    Ok(summary)
}
