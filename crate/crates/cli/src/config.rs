//! Experiment configuration: JSON parsing, defaults and validation.
//!
//! Unknown fields are rejected rather than ignored, and every validation
//! error names the offending field.

use serde::Deserialize;
use thiserror::Error;
use tomo_core::{GridSpec, HilbertSpec, SolverConfig, StateSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Represent,
    RepresentSweep,
    NoiseSweep,
    ReconstructSweep,
    WitnessTable,
    PurityTable,
    GridDump,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Represent => "represent",
            Experiment::RepresentSweep => "represent_sweep",
            Experiment::NoiseSweep => "noise_sweep",
            Experiment::ReconstructSweep => "reconstruct_sweep",
            Experiment::WitnessTable => "witness_table",
            Experiment::PurityTable => "purity_table",
            Experiment::GridDump => "grid_dump",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.replace('-', "_").as_str() {
            "represent" => Some(Experiment::Represent),
            "represent_sweep" => Some(Experiment::RepresentSweep),
            "noise_sweep" => Some(Experiment::NoiseSweep),
            "reconstruct_sweep" => Some(Experiment::ReconstructSweep),
            "witness_table" => Some(Experiment::WitnessTable),
            "purity_table" => Some(Experiment::PurityTable),
            "grid_dump" => Some(Experiment::GridDump),
            _ => None,
        }
    }

    /// Aggregated output (mean/std over trials) instead of one row per cell.
    pub fn aggregates(&self) -> bool {
        matches!(self, Experiment::NoiseSweep | Experiment::ReconstructSweep)
    }
}

// Raw (serde) layer -----------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    #[serde(default)]
    state_specs: Vec<String>,
    space: Option<RawSpace>,
    grid: Option<RawGrid>,
    grid_sweep: Option<RawGridSweep>,
    measurement: Option<RawGrid>,
    solver: Option<RawSolver>,
    n_rep_list: Option<Vec<i64>>,
    noise_sigmas: Option<Vec<f64>>,
    trials: Option<u64>,
    master_seed: Option<u64>,
    output_path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    modes: Option<u8>,
    truncation: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    kind: String,
    nodes: Option<i64>,
    pitch: Option<f64>,
    radial_step: Option<f64>,
    angular_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridSweep {
    kind: String,
    nodes_list: Option<Vec<i64>>,
    pitch_list: Option<Vec<f64>>,
    radial_step_list: Option<Vec<f64>>,
    angular_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    coeff_bound: Option<f64>,
    max_iterations: Option<u64>,
    primal_tol: Option<f64>,
    dual_tol: Option<f64>,
    admm_penalty: Option<f64>,
}

// Validated layer -------------------------------------------------------------

/// A fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub state_specs: Vec<(String, StateSpec)>,
    pub space: HilbertSpec,
    /// Grid instances the sweep iterates over (one entry for non-sweeps).
    pub grids: Vec<GridSpec>,
    /// Measurement grid; `None` means "same as the probe grid" (K = M).
    pub measurement: Option<GridSpec>,
    pub solver: SolverConfig,
    pub n_rep_list: Vec<u64>,
    pub noise_sigmas: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub output_path: Option<String>,
}

/// Default noise ladder: logarithmic from 1e-4 to 1e-1.
pub fn default_noise_sigmas() -> Vec<f64> {
    vec![0.0, 1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1]
}

fn parse_grid(raw: &RawGrid, field: &'static str) -> Result<GridSpec, ConfigError> {
    let nodes = raw.nodes.unwrap_or(0);
    if nodes < 1 {
        return Err(invalid(field, format!("nodes must be at least 1, got {nodes}")));
    }
    let nodes = nodes as usize;
    match raw.kind.as_str() {
        "square" => {
            let pitch = raw
                .pitch
                .ok_or_else(|| invalid(field, "square grid requires `pitch`"))?;
            if !(pitch > 0.0) || !pitch.is_finite() {
                return Err(invalid(field, format!("pitch must be positive, got {pitch}")));
            }
            if raw.radial_step.is_some() || raw.angular_step.is_some() {
                return Err(invalid(field, "square grid takes no radial/angular steps"));
            }
            Ok(GridSpec::Square { nodes, pitch })
        }
        "helical" => {
            let radial_step = raw
                .radial_step
                .ok_or_else(|| invalid(field, "helical grid requires `radial_step`"))?;
            if !(radial_step > 0.0) || !radial_step.is_finite() {
                return Err(invalid(
                    field,
                    format!("radial_step must be positive, got {radial_step}"),
                ));
            }
            let angular_step = raw
                .angular_step
                .ok_or_else(|| invalid(field, "helical grid requires `angular_step`"))?;
            if !angular_step.is_finite() {
                return Err(invalid(field, "angular_step must be finite"));
            }
            if raw.pitch.is_some() {
                return Err(invalid(field, "helical grid takes no `pitch`"));
            }
            Ok(GridSpec::Helical {
                nodes,
                radial_step,
                angular_step,
            })
        }
        other => Err(invalid(
            field,
            format!("unknown grid kind `{other}` (expected `square` or `helical`)"),
        )),
    }
}

fn expand_grid_sweep(raw: &RawGridSweep) -> Result<Vec<GridSpec>, ConfigError> {
    const FIELD: &str = "grid_sweep";
    let nodes_list = raw
        .nodes_list
        .as_ref()
        .ok_or_else(|| invalid(FIELD, "requires `nodes_list`"))?;
    if nodes_list.is_empty() {
        return Err(invalid(FIELD, "`nodes_list` must be nonempty"));
    }
    let mut out = Vec::new();
    match raw.kind.as_str() {
        "square" => {
            let pitches = raw
                .pitch_list
                .as_ref()
                .ok_or_else(|| invalid(FIELD, "square sweep requires `pitch_list`"))?;
            if pitches.is_empty() {
                return Err(invalid(FIELD, "`pitch_list` must be nonempty"));
            }
            for &n in nodes_list {
                if n < 1 {
                    return Err(invalid(FIELD, format!("nodes must be at least 1, got {n}")));
                }
                for &p in pitches {
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(invalid(FIELD, format!("pitch must be positive, got {p}")));
                    }
                    out.push(GridSpec::Square {
                        nodes: n as usize,
                        pitch: p,
                    });
                }
            }
        }
        "helical" => {
            let steps = raw
                .radial_step_list
                .as_ref()
                .ok_or_else(|| invalid(FIELD, "helical sweep requires `radial_step_list`"))?;
            if steps.is_empty() {
                return Err(invalid(FIELD, "`radial_step_list` must be nonempty"));
            }
            let angular = raw
                .angular_step
                .ok_or_else(|| invalid(FIELD, "helical sweep requires `angular_step`"))?;
            for &n in nodes_list {
                if n < 1 {
                    return Err(invalid(FIELD, format!("nodes must be at least 1, got {n}")));
                }
                for &dr in steps {
                    if !(dr > 0.0) || !dr.is_finite() {
                        return Err(invalid(
                            FIELD,
                            format!("radial_step must be positive, got {dr}"),
                        ));
                    }
                    out.push(GridSpec::Helical {
                        nodes: n as usize,
                        radial_step: dr,
                        angular_step: angular,
                    });
                }
            }
        }
        other => {
            return Err(invalid(
                FIELD,
                format!("unknown grid kind `{other}` (expected `square` or `helical`)"),
            ))
        }
    }
    Ok(out)
}

/// Parses and validates a JSON experiment config for `experiment`.
pub fn validate_config(text: &str, experiment: Experiment) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text)?;

    if let Some(name) = &raw.experiment {
        match Experiment::parse(name) {
            Some(e) if e == experiment => {}
            Some(e) => {
                return Err(invalid(
                    "experiment",
                    format!(
                        "config is for `{}` but the `{}` subcommand was invoked",
                        e.name(),
                        experiment.name()
                    ),
                ))
            }
            None => {
                return Err(invalid(
                    "experiment",
                    format!("unknown experiment `{name}`"),
                ))
            }
        }
    }

    // States (grid_dump runs without any).
    let mut specs = Vec::new();
    for s in &raw.state_specs {
        let parsed = StateSpec::parse(s)
            .map_err(|e| invalid("state_specs", format!("`{s}`: {e}")))?;
        specs.push((s.clone(), parsed));
    }
    if specs.is_empty() && experiment != Experiment::GridDump {
        return Err(invalid("state_specs", "must list at least one state"));
    }
    let modes_from_states = specs.first().map(|(_, p)| p.modes());
    if let Some(m) = modes_from_states {
        for (name, p) in &specs {
            if p.modes() != m {
                return Err(invalid(
                    "state_specs",
                    format!("`{name}` has {} mode(s) but earlier states have {m}", p.modes()),
                ));
            }
        }
    }

    // Space: modes inferred from the states unless given; truncation defaults
    // to 12 single-mode and 10 per mode for two-mode spaces.
    let modes = match (raw.space.as_ref().and_then(|s| s.modes), modes_from_states) {
        (Some(m), Some(ms)) if m != ms => {
            return Err(invalid(
                "space",
                format!("modes = {m} but the state specs are {ms}-mode"),
            ))
        }
        (Some(m), _) => m,
        (None, Some(ms)) => ms,
        (None, None) => 1,
    };
    let truncation = raw
        .space
        .as_ref()
        .and_then(|s| s.truncation)
        .unwrap_or(if modes == 1 { 12 } else { 10 });
    let space = HilbertSpec::new(modes, truncation)
        .map_err(|e| invalid("space", e.to_string()))?;

    // Grids.
    let sweeps_grid = matches!(
        experiment,
        Experiment::RepresentSweep | Experiment::WitnessTable | Experiment::PurityTable
    );
    let grids = if let Some(sweep) = &raw.grid_sweep {
        if !sweeps_grid {
            return Err(invalid(
                "grid_sweep",
                format!(
                    "only sweep experiments accept `grid_sweep`; `{}` needs `grid`",
                    experiment.name()
                ),
            ));
        }
        if raw.grid.is_some() {
            return Err(invalid("grid", "give either `grid` or `grid_sweep`, not both"));
        }
        expand_grid_sweep(sweep)?
    } else if let Some(g) = &raw.grid {
        vec![parse_grid(g, "grid")?]
    } else {
        return Err(invalid(
            "grid",
            "a probe grid is required (`grid` or, for sweeps, `grid_sweep`)",
        ));
    };

    let measurement = match &raw.measurement {
        Some(g) => Some(parse_grid(g, "measurement")?),
        None => None,
    };

    // Solver.
    let defaults = SolverConfig::default();
    let rs = raw.solver.as_ref();
    let solver = SolverConfig {
        coeff_bound: rs.and_then(|s| s.coeff_bound).unwrap_or(defaults.coeff_bound),
        max_iterations: rs
            .and_then(|s| s.max_iterations)
            .unwrap_or(defaults.max_iterations as u64) as usize,
        primal_tol: rs.and_then(|s| s.primal_tol).unwrap_or(defaults.primal_tol),
        dual_tol: rs.and_then(|s| s.dual_tol).unwrap_or(defaults.dual_tol),
        admm_penalty: rs.and_then(|s| s.admm_penalty).unwrap_or(defaults.admm_penalty),
    };
    solver
        .validate()
        .map_err(|e| invalid("solver", e.to_string()))?;

    // Sweep lists.
    let mut n_rep_list = Vec::new();
    if let Some(list) = &raw.n_rep_list {
        for &n in list {
            if n < 0 {
                return Err(invalid(
                    "n_rep_list",
                    format!("entries must be >= 0 (0 = exact probabilities), got {n}"),
                ));
            }
            n_rep_list.push(n as u64);
        }
    }
    if experiment == Experiment::ReconstructSweep && n_rep_list.is_empty() {
        return Err(invalid("n_rep_list", "must be nonempty for reconstruct_sweep"));
    }

    let noise_sigmas = match &raw.noise_sigmas {
        Some(list) => {
            for &s in list {
                if !(s >= 0.0) || !s.is_finite() {
                    return Err(invalid(
                        "noise_sigmas",
                        format!("entries must be finite and >= 0, got {s}"),
                    ));
                }
            }
            list.clone()
        }
        None => default_noise_sigmas(),
    };
    if experiment == Experiment::NoiseSweep && noise_sigmas.is_empty() {
        return Err(invalid("noise_sigmas", "must be nonempty for noise_sweep"));
    }

    let trials = raw.trials.unwrap_or(1);
    if trials < 1 {
        return Err(invalid("trials", "must be at least 1"));
    }

    Ok(ExperimentConfig {
        experiment,
        state_specs: specs,
        space,
        grids,
        measurement,
        solver,
        n_rep_list,
        noise_sigmas,
        trials,
        master_seed: raw.master_seed.unwrap_or(1),
        output_path: raw.output_path.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{"state_specs": ["coherent:0.5"], "grid": {"kind": "square", "nodes": 3, "pitch": 0.2}}"#
            .to_string()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = validate_config(&minimal(), Experiment::Represent).unwrap();
        assert_eq!(cfg.space.modes(), 1);
        assert_eq!(cfg.space.truncation(), 12);
        assert_eq!(cfg.solver.max_iterations, 5000);
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.master_seed, 1);
        assert_eq!(cfg.grids.len(), 1);
    }

    #[test]
    fn two_mode_space_defaults_to_truncation_10() {
        let text = r#"{"state_specs": ["bell_psi"], "grid": {"kind": "square", "nodes": 2, "pitch": 0.2}}"#;
        let cfg = validate_config(text, Experiment::Represent).unwrap();
        assert_eq!(cfg.space.modes(), 2);
        assert_eq!(cfg.space.truncation(), 10);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"state_specs": ["fock:1"], "grid": {"kind": "square", "nodes": 2, "pitch": 0.2}, "wat": 1}"#;
        let err = validate_config(text, Experiment::Represent).unwrap_err();
        assert!(err.to_string().contains("wat"), "{err}");
    }

    #[test]
    fn negative_n_rep_is_rejected_naming_the_field() {
        let text = r#"{"state_specs": ["fock:1"], "grid": {"kind": "square", "nodes": 2, "pitch": 0.2}, "n_rep_list": [-3]}"#;
        let err = validate_config(text, Experiment::ReconstructSweep).unwrap_err();
        assert!(err.to_string().contains("n_rep_list"), "{err}");
    }

    #[test]
    fn reconstruct_requires_n_rep_list() {
        let err = validate_config(&minimal(), Experiment::ReconstructSweep).unwrap_err();
        assert!(err.to_string().contains("n_rep_list"), "{err}");
    }

    #[test]
    fn mixed_mode_states_are_rejected() {
        let text = r#"{"state_specs": ["fock:1", "bell_psi"], "grid": {"kind": "square", "nodes": 2, "pitch": 0.2}}"#;
        let err = validate_config(text, Experiment::Represent).unwrap_err();
        assert!(err.to_string().contains("state_specs"), "{err}");
    }

    #[test]
    fn experiment_name_mismatch_is_rejected() {
        let text = r#"{"experiment": "noise_sweep", "state_specs": ["fock:1"], "grid": {"kind": "square", "nodes": 2, "pitch": 0.2}}"#;
        let err = validate_config(text, Experiment::Represent).unwrap_err();
        assert!(err.to_string().contains("noise_sweep"), "{err}");
    }

    #[test]
    fn helical_grid_fields_are_checked() {
        let text = r#"{"state_specs": ["fock:1"], "grid": {"kind": "helical", "nodes": 17, "radial_step": 0.016}}"#;
        let err = validate_config(text, Experiment::Represent).unwrap_err();
        assert!(err.to_string().contains("angular_step"), "{err}");
        let text = r#"{"state_specs": ["fock:1"], "grid": {"kind": "spiral", "nodes": 17}}"#;
        assert!(validate_config(text, Experiment::Represent).is_err());
    }

    #[test]
    fn grid_sweep_expansion() {
        let text = r#"{
            "state_specs": ["fock:1"],
            "grid_sweep": {"kind": "square", "nodes_list": [2, 3], "pitch_list": [0.1, 0.2, 0.3]}
        }"#;
        let cfg = validate_config(text, Experiment::RepresentSweep).unwrap();
        assert_eq!(cfg.grids.len(), 6);
    }

    #[test]
    fn noise_sigma_default_ladder_present() {
        let cfg = validate_config(&minimal(), Experiment::NoiseSweep).unwrap();
        assert!(cfg.noise_sigmas.len() >= 5);
        assert_eq!(cfg.noise_sigmas[0], 0.0);
    }
}
