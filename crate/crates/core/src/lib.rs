//! Data-pattern tomography of single- and two-mode optical quantum states.
//!
//! The library represents signal states as constrained mixtures of
//! coherent-state projectors drawn from discrete phase-space grids, simulates
//! finite-copy measurement data patterns, reconstructs states from those
//! patterns by constrained convex fitting, and scores the results with
//! fidelity, purity and entanglement witnesses.
//!
//! Everything is deterministic: the solver is sequential, and all sampling
//! flows through explicit per-substream seeds.

pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod metrics;
pub mod probe;
pub mod solver;
pub mod statespec;
pub mod witness;

pub use error::{Error, Result};
pub use fock::{
    coherent_vector, partial_transpose, tensor, CoherentAmplitude, DensityMatrix, HilbertSpec,
    PureState,
};
pub use measure::{
    exact_probe_patterns, probabilities, probe_patterns, sample_pattern, split_seed, DataPattern,
    MeasurementSet, PatternKind,
};
pub use metrics::{fidelity, hs_distance, purity, MetricReport};
pub use probe::{helical_grid, square_lattice, GridSpec, ProbeBasis};
pub use solver::{assemble, fit_pattern, fit_state, AssembledState, FitResult, SolverConfig};
pub use statespec::{named_state, StateSpec};
pub use witness::{build_witness, evaluate_witness, negativity, WitnessReport};
