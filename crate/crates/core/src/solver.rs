//! Constrained convex fitting of states and data patterns.
//!
//! Both fits minimize a convex quadratic in the mixture coefficients under
//! the physicality constraints: coefficients sum to one, the assembled
//! mixture is PSD, and every coefficient is capped in absolute value.
//!
//! The solver is a two-block ADMM. Coherent-projector Gram matrices are
//! catastrophically ill conditioned, so the coefficient update runs in the
//! orthonormalized operator basis of the probe span (eigendecomposition of
//! the Gram, precomputed per basis): there the state-fit Hessian is the
//! identity and the mixture constraint has unit gain. The PSD and trace
//! constraints act on the split mixture variable through one spectral
//! projection onto the trace-one PSD spectrahedron per iteration. The
//! coefficient cap is checked on the result; in the rare case it binds, the
//! fit falls back to an ADMM in raw coefficient space whose split vector is
//! projected exactly onto the sum-one box. Every subproblem is closed form
//! and sequential, so identical inputs produce identical coefficients.

use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::linalg::{self, CMat};
use crate::measure::{pattern_matrix, DataPattern};
use crate::probe::ProbeBasis;

/// Tikhonov regularization added to the coefficient-update system.
const GRAM_REGULARIZATION: f64 = 1e-12;
/// Feasibility margin relative to `primal_tol` used when selecting iterates.
const FEASIBILITY_FACTOR: f64 = 10.0;
/// Iterations between penalty-adaptation checks.
const ADAPT_EVERY: usize = 10;
/// Iterations between objective/feasibility checkpoints.
const CHECKPOINT_EVERY: usize = 10;
/// Over-relaxation factor for the split-variable updates.
const RELAXATION: f64 = 1.7;

/// Relative slack beyond which the coefficient cap counts as binding.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Cap on the absolute value of every coefficient.
    pub coeff_bound: f64,
    pub max_iterations: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// Initial ADMM penalty; adapted by residual balancing during the run.
    pub admm_penalty: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            coeff_bound: 1000.0,
            max_iterations: 5000,
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            admm_penalty: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.coeff_bound > 0.0) {
            return Err(Error::InvalidSolverConfig("coeff_bound must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig("max_iterations must be positive"));
        }
        if !(self.primal_tol > 0.0) || !(self.dual_tol > 0.0) {
            return Err(Error::InvalidSolverConfig("tolerances must be positive"));
        }
        if !(self.admm_penalty > 0.0) {
            return Err(Error::InvalidSolverConfig("admm_penalty must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a constrained fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Mixture coefficients, one per probe.
    pub coefficients: Vec<f64>,
    /// Achieved objective (squared HS distance or pattern least squares).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max(|sum x - 1|, -lambda_min(mixture), max(0, max|x| - bound))`.
    pub constraint_violation: f64,
    /// Smallest mixture eigenvalue before any clipping.
    pub min_mixture_eigenvalue: f64,
    /// Regularization actually applied to the coefficient update.
    pub regularization: f64,
    /// Best feasible objective seen at each checkpoint; non-increasing.
    pub objective_history: Vec<f64>,
}

/// Assembled physical state together with its pre-clipping spectrum floor.
#[derive(Debug, Clone)]
pub struct AssembledState {
    pub state: DensityMatrix,
    pub preclip_min_eigenvalue: f64,
}

/// Fits `target` with a constrained mixture of the basis projectors by
/// minimizing the squared Hilbert-Schmidt distance.
pub fn fit_state(
    target: &DensityMatrix,
    basis: &ProbeBasis,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    if target.space() != basis.space() {
        return Err(Error::DimensionMismatch {
            expected: basis.space().dim(),
            got: target.dim(),
        });
    }
    let linear = basis.project_onto_probes(target.entries());
    let offset = linalg::frob_norm_sqr(target.entries());
    if offset >= 1.0 - 1e-9 {
        // Pure target: F^2 = Tr(T S), so fidelity maximization is a linear
        // objective over the feasible set.
        solve(&DataTerm::State { linear, offset, pure: true }, basis, cfg)
    } else {
        frank_wolfe_fidelity(target, basis, cfg, linear, offset)
    }
}

/// Fits a signal data pattern with probe data patterns (least squares over
/// the settings), under the same physicality constraints evaluated on the
/// basis projectors.
pub fn fit_pattern(
    signal: &DataPattern,
    probes: &[DataPattern],
    basis: &ProbeBasis,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    if probes.len() != basis.len() {
        return Err(Error::PatternMismatch {
            expected: basis.len(),
            got: probes.len(),
        });
    }
    let design = pattern_matrix(probes)?;
    if signal.len() != design.nrows() {
        return Err(Error::PatternMismatch {
            expected: design.nrows(),
            got: signal.len(),
        });
    }
    solve(
        &DataTerm::Pattern {
            design,
            signal: signal.values().to_vec(),
        },
        basis,
        cfg,
    )
}

/// `sum_xi x_xi sigma_xi`, clipped onto the physical cone: negative
/// eigenvalues to zero, then trace renormalized.
pub fn assemble(coefficients: &[f64], basis: &ProbeBasis) -> Result<AssembledState> {
    let raw = basis.mixture(coefficients)?;
    let (state, preclip) = DensityMatrix::from_clipped(basis.space(), &raw)?;
    Ok(AssembledState {
        state,
        preclip_min_eigenvalue: preclip,
    })
}

// ---------------------------------------------------------------------------
// Data terms
// ---------------------------------------------------------------------------

enum DataTerm {
    /// State fit. For mixed targets the objective is `|mixture - T|_HS^2`
    /// (Gram quadratic plus target projections). For pure targets it is
    /// `1 - Tr(T mixture) = 1 - F^2`, whose maximization is exact fidelity
    /// maximization; the HS objective provably undershoots the achievable
    /// fidelity on near-boundary targets.
    State {
        linear: Vec<f64>,
        offset: f64,
        pure: bool,
    },
    /// `shift - Tr(G mixture)` for a Hermitian `G` given by its probe
    /// projections; the linearized subproblem of the fidelity maximization.
    Overlap { linear: Vec<f64>, shift: f64 },
    /// `|F x - f|^2` over the measurement settings.
    Pattern { design: Mat<f64>, signal: Vec<f64> },
}

impl DataTerm {
    /// Objective value at raw coefficients `x`.
    fn objective(&self, x: &[f64], basis: &ProbeBasis) -> f64 {
        match self {
            DataTerm::State {
                linear,
                pure: true,
                ..
            } => {
                let overlap: f64 = x.iter().zip(linear).map(|(xi, ci)| xi * ci).sum();
                (1.0 - overlap).max(0.0)
            }
            DataTerm::Overlap { linear, shift } => {
                let overlap: f64 = x.iter().zip(linear).map(|(xi, ci)| xi * ci).sum();
                (shift - overlap).max(0.0)
            }
            DataTerm::State {
                linear,
                offset,
                pure: false,
            } => {
                let g = basis.gram();
                let m = x.len();
                let mut obj = *offset;
                for j in 0..m {
                    let xj = x[j];
                    if xj != 0.0 {
                        let mut gx = 0.0;
                        for i in 0..m {
                            gx += g[(j, i)] * x[i];
                        }
                        obj += xj * (gx - 2.0 * linear[j]);
                    }
                }
                obj.max(0.0)
            }
            DataTerm::Pattern { design, signal } => {
                let k = design.nrows();
                let m = design.ncols();
                let mut obj = 0.0;
                for row in 0..k {
                    let mut acc = -signal[row];
                    for col in 0..m {
                        acc += design[(row, col)] * x[col];
                    }
                    obj += acc * acc;
                }
                obj
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shared iterate tracking
// ---------------------------------------------------------------------------

struct Checkpoint {
    objective: f64,
    violation: f64,
    min_eig: f64,
    coefficients: Vec<f64>,
}

struct IterateTracker {
    feas_tol: f64,
    best_feasible: Option<Checkpoint>,
    last: Option<Checkpoint>,
    history: Vec<f64>,
}

impl IterateTracker {
    fn new(feas_tol: f64) -> Self {
        Self {
            feas_tol,
            best_feasible: None,
            last: None,
            history: Vec::new(),
        }
    }

    fn consider(
        &mut self,
        x: &[f64],
        data: &DataTerm,
        basis: &ProbeBasis,
        bound: f64,
    ) -> Result<()> {
        let mix = basis.mixture(x)?;
        let (vals, _) = linalg::eigh(&mix)?;
        let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = x.iter().sum();
        let over_bound = x.iter().map(|t| t.abs() - bound).fold(0.0f64, f64::max);
        let violation = (sum - 1.0).abs().max((-min_eig).max(0.0)).max(over_bound);
        let cp = Checkpoint {
            objective: data.objective(x, basis),
            violation,
            min_eig,
            coefficients: x.to_vec(),
        };
        if cp.violation <= self.feas_tol
            && self
                .best_feasible
                .as_ref()
                .map_or(true, |b| cp.objective < b.objective)
        {
            self.history.push(cp.objective);
            self.best_feasible = Some(Checkpoint {
                coefficients: cp.coefficients.clone(),
                ..cp
            });
        }
        self.last = Some(cp);
        Ok(())
    }

    /// Returns the best strictly feasible checkpoint unless the final iterate
    /// reached a lower objective (it is then at most `feas_tol`-infeasible in
    /// the PSD direction and reported as such via `constraint_violation`).
    fn finish(self, iterations: usize, converged: bool, regularization: f64) -> FitResult {
        let last = self.last.expect("at least the initial checkpoint exists");
        let chosen = match self.best_feasible {
            Some(best) if best.objective <= last.objective => best,
            Some(_) | None => last,
        };
        FitResult {
            objective: chosen.objective,
            constraint_violation: chosen.violation,
            min_mixture_eigenvalue: chosen.min_eig,
            coefficients: chosen.coefficients,
            iterations,
            converged,
            regularization,
            objective_history: self.history,
        }
    }
}

// ---------------------------------------------------------------------------
// Reduced-basis ADMM (primary path)
// ---------------------------------------------------------------------------

fn solve(data: &DataTerm, basis: &ProbeBasis, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    let m = basis.len();
    if m as f64 * cfg.coeff_bound < 1.0 {
        return Err(Error::InvalidSolverConfig(
            "coeff_bound too small to satisfy the sum constraint",
        ));
    }
    match solve_reduced(data, basis, cfg)? {
        Some(result) => Ok(result),
        // The coefficient cap binds: redo the fit in raw coefficient space
        // where the box is a hard projection target.
        None => solve_boxed(data, basis, cfg),
    }
}

/// ADMM in the orthonormalized operator basis. Returns `None` when the
/// coefficient cap binds and the raw-space fallback must run instead.
///
/// Linear objectives (pure-target overlap and its linearized subproblems)
/// run the plain splitting with a fixed penalty: over-relaxation and penalty
/// balancing measurably stall it on near-degenerate grids. Quadratic
/// objectives keep both accelerations.
fn solve_reduced(
    data: &DataTerm,
    basis: &ProbeBasis,
    cfg: &SolverConfig,
) -> Result<Option<FitResult>> {
    let m = basis.len();
    let reduced = basis.reduced();
    let r = reduced.rank;
    let lift = &reduced.lift;

    // Data term in the orthonormal operator basis. `quad_weight` is the
    // coefficient of the identity Hessian: 2 for the HS fit (|w - t|^2), 0
    // for the linear overlap objectives.
    let (hessian, lin_w, quad_weight): (Option<Mat<f64>>, Vec<f64>, f64) = match data {
        DataTerm::State { linear, pure, .. } => {
            (None, lift_t_vec(lift, linear), if *pure { 0.0 } else { 2.0 })
        }
        DataTerm::Overlap { linear, .. } => (None, lift_t_vec(lift, linear), 0.0),
        DataTerm::Pattern { design, signal } => {
            let fr = design * lift; // K x r
            let h = fr.transpose() * &fr; // r x r
            let k = design.nrows();
            let fvec = Mat::from_fn(k, 1, |i, _| signal[i]);
            let lm = fr.transpose() * &fvec;
            let lin = (0..r).map(|i| lm[(i, 0)]).collect();
            (Some(h), lin, 2.0)
        }
    };
    let linear_objective = quad_weight == 0.0;
    let alpha = if linear_objective { 1.0 } else { RELAXATION };
    let adapt = !linear_objective;

    let mut penalty = cfg.admm_penalty;
    let regularization = GRAM_REGULARIZATION;
    let factorize = |rho: f64| -> Result<Option<faer::linalg::solvers::Llt<f64>>> {
        match &hessian {
            None => Ok(None),
            Some(h) => {
                let hr = Mat::from_fn(r, r, |i, j| {
                    let mut v = 2.0 * h[(i, j)];
                    if i == j {
                        v += rho + regularization;
                    }
                    v
                });
                hr.llt(Side::Lower)
                    .map(Some)
                    .map_err(|_| Error::SingularGram { regularization })
            }
        }
    };
    let mut chol = factorize(penalty)?;

    // Track the uniform mixture as the guaranteed-feasible reference, but
    // start the iteration from the data-optimal point of the span.
    let x0 = vec![1.0 / m as f64; m];
    let mut w = match data {
        DataTerm::State { .. } | DataTerm::Overlap { .. } => lin_w.clone(),
        DataTerm::Pattern { .. } => {
            let g = basis.gram();
            let gx0: Vec<f64> = (0..m)
                .map(|i| (0..m).map(|j| g[(i, j)] * x0[j]).sum())
                .collect();
            lift_t_vec(lift, &gx0)
        }
    };
    let mut x = lift_vec(lift, &w);
    let mut mixture = basis.mixture(&x)?;
    let mut z = project_spectrahedron(&mixture)?;
    let dim = z.nrows();
    let mut dual: CMat = Mat::zeros(dim, dim);

    let mut tracker = IterateTracker::new(FEASIBILITY_FACTOR * cfg.primal_tol);
    tracker.consider(&x0, data, basis, cfg.coeff_bound)?;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;

        // w-update: scalar (state fits) or small SPD solve (pattern fits).
        let za = &z - &dual;
        let q = lift_t_vec(lift, &basis.project_onto_probes(&za));
        match &chol {
            None => {
                let inv = 1.0 / (quad_weight + penalty + regularization);
                let data_pull = if linear_objective { 1.0 } else { quad_weight };
                for i in 0..r {
                    w[i] = (data_pull * lin_w[i] + penalty * q[i]) * inv;
                }
            }
            Some(f) => {
                let rhs = Mat::from_fn(r, 1, |i, _| 2.0 * lin_w[i] + penalty * q[i]);
                let sol = f.solve(&rhs);
                for i in 0..r {
                    w[i] = sol[(i, 0)];
                }
            }
        }
        x = lift_vec(lift, &w);
        mixture = basis.mixture(&x)?;

        // Spectral projection onto the trace-one PSD spectrahedron.
        let z_prev = z;
        let relaxed = if alpha == 1.0 {
            mixture.clone()
        } else {
            Mat::from_fn(dim, dim, |i, j| {
                alpha * mixture[(i, j)] + (1.0 - alpha) * z_prev[(i, j)]
            })
        };
        let shifted = linalg::hermitize(&(&relaxed + &dual));
        z = project_spectrahedron(&shifted)?;

        let mut primal_sqr = 0.0;
        for j in 0..dim {
            for i in 0..dim {
                dual[(i, j)] += relaxed[(i, j)] - z[(i, j)];
                primal_sqr += (mixture[(i, j)] - z[(i, j)]).norm_sqr();
            }
        }
        let primal_res = primal_sqr.sqrt();

        let scale_pri = linalg::frob_norm_sqr(&mixture)
            .max(linalg::frob_norm_sqr(&z))
            .sqrt()
            .max(1.0);

        if iterations % CHECKPOINT_EVERY == 0 {
            let feas = project_sum_one_box(&x, cfg.coeff_bound);
            tracker.consider(&feas, data, basis, cfg.coeff_bound)?;
            // The split variable leads the coefficient iterate toward the
            // optimum; its span pullback is often the better candidate.
            let wz = lift_t_vec(lift, &basis.project_onto_probes(&z));
            let xz = project_sum_one_box(&lift_vec(lift, &wz), cfg.coeff_bound);
            tracker.consider(&xz, data, basis, cfg.coeff_bound)?;
        }

        // The dual residual costs two extra projections; only evaluate it
        // when the primal test passes or the penalty may adapt.
        let adapt_now = adapt && iterations % ADAPT_EVERY == 0;
        let primal_ok = primal_res <= cfg.primal_tol * scale_pri;
        if primal_ok || adapt_now {
            let dz = &z - &z_prev;
            let dual_res = penalty * norm2(&lift_t_vec(lift, &basis.project_onto_probes(&dz)));
            let scale_dual =
                (penalty * norm2(&lift_t_vec(lift, &basis.project_onto_probes(&dual)))).max(1.0);
            if primal_ok && dual_res <= cfg.dual_tol * scale_dual {
                converged = true;
                break;
            }
            // Ratio-proportional residual balancing; scaled duals follow the
            // penalty so the underlying multipliers stay fixed.
            if adapt_now {
                let rel_pri = primal_res / scale_pri;
                let rel_dual = dual_res / scale_dual;
                let ratio = (rel_pri / rel_dual.max(1e-300)).sqrt().clamp(0.2, 5.0);
                if (ratio > 2.0 || ratio < 0.5)
                    && penalty * ratio > 1e-6
                    && penalty * ratio < 1e6
                {
                    penalty *= ratio;
                    scale_dual_mat(&mut dual, 1.0 / ratio);
                    chol = factorize(penalty)?;
                }
            }
        }
    }

    let raw_max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if raw_max > cfg.coeff_bound * (1.0 + BOUND_SLACK) {
        return Ok(None);
    }
    let feas = project_sum_one_box(&x, cfg.coeff_bound);
    tracker.consider(&feas, data, basis, cfg.coeff_bound)?;
    let wz = lift_t_vec(lift, &basis.project_onto_probes(&z));
    let xz = project_sum_one_box(&lift_vec(lift, &wz), cfg.coeff_bound);
    tracker.consider(&xz, data, basis, cfg.coeff_bound)?;
    Ok(Some(tracker.finish(iterations, converged, regularization)))
}

// ---------------------------------------------------------------------------
// Fidelity maximization for mixed targets
// ---------------------------------------------------------------------------

/// Outer iteration cap for the fidelity maximization.
const FW_MAX_OUTER: usize = 60;
/// Stop when an outer step improves fidelity by less than this.
const FW_IMPROVEMENT_TOL: f64 = 1e-11;
/// Eigenvalue floor passed to fidelity evaluations along the search path,
/// where iterates may carry tolerance-level negative parts.
const FW_EVAL_FLOOR: f64 = 1e-3;

/// Maximizes the Uhlmann fidelity against a mixed target by conditional
/// gradient steps: each outer iteration linearizes the (concave) fidelity at
/// the current mixture and maximizes the linearization with the same
/// constraint machinery, then line searches along the segment. Reports
/// `1 - F^2` as the objective.
fn frank_wolfe_fidelity(
    target: &DensityMatrix,
    basis: &ProbeBasis,
    cfg: &SolverConfig,
    linear: Vec<f64>,
    offset: f64,
) -> Result<FitResult> {
    let eval = |x: &[f64]| -> Result<f64> {
        let mix = basis.mixture(x)?;
        linalg::uhlmann_fidelity(target.entries(), &mix, FW_EVAL_FLOOR)
    };

    // Warm start from the HS-optimal fit.
    let warm = solve(
        &DataTerm::State {
            linear,
            offset,
            pure: false,
        },
        basis,
        cfg,
    )?;
    let mut x = warm.coefficients;
    let mut best_f = eval(&x)?;
    let mut history = vec![(1.0 - best_f * best_f).max(0.0)];
    let mut iterations = warm.iterations;
    let mut converged = warm.converged;

    for _ in 0..FW_MAX_OUTER {
        let mix = basis.mixture(&x)?;
        let grad = linalg::fidelity_gradient(target.entries(), &mix, FW_EVAL_FLOOR)?;
        let lin = basis.project_onto_probes(&grad);
        let shift: f64 = lin.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 1.0;
        let sub = solve(&DataTerm::Overlap { linear: lin, shift }, basis, cfg)?;
        iterations += sub.iterations;

        // Golden-section search on the segment toward the subproblem vertex;
        // fidelity is concave along it.
        let blend = |gamma: f64| -> Vec<f64> {
            x.iter()
                .zip(&sub.coefficients)
                .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
                .collect()
        };
        let inv_phi = 0.618_033_988_749_894_9_f64;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut g1 = hi - inv_phi * (hi - lo);
        let mut g2 = lo + inv_phi * (hi - lo);
        let mut f1 = eval(&blend(g1))?;
        let mut f2 = eval(&blend(g2))?;
        for _ in 0..40 {
            if f1 >= f2 {
                hi = g2;
                g2 = g1;
                f2 = f1;
                g1 = hi - inv_phi * (hi - lo);
                f1 = eval(&blend(g1))?;
            } else {
                lo = g1;
                g1 = g2;
                f1 = f2;
                g2 = lo + inv_phi * (hi - lo);
                f2 = eval(&blend(g2))?;
            }
        }
        let (gamma, f_new) = if f1 >= f2 { (g1, f1) } else { (g2, f2) };
        let f_end = eval(&sub.coefficients)?;
        let (gamma, f_new) = if f_end > f_new { (1.0, f_end) } else { (gamma, f_new) };

        if f_new <= best_f + FW_IMPROVEMENT_TOL {
            converged = converged && sub.converged;
            break;
        }
        x = blend(gamma);
        best_f = f_new;
        history.push((1.0 - best_f * best_f).max(0.0));
    }

    // Final diagnostics on the returned coefficients.
    let x = project_sum_one_box(&x, cfg.coeff_bound);
    let mix = basis.mixture(&x)?;
    let (vals, _) = linalg::eigh(&mix)?;
    let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = x.iter().sum();
    let over = x
        .iter()
        .map(|t| t.abs() - cfg.coeff_bound)
        .fold(0.0f64, f64::max);
    let violation = (sum - 1.0).abs().max((-min_eig).max(0.0)).max(over);
    let f_final = eval(&x)?;
    Ok(FitResult {
        objective: (1.0 - f_final * f_final).max(0.0),
        constraint_violation: violation,
        min_mixture_eigenvalue: min_eig,
        coefficients: x,
        iterations,
        converged,
        regularization: GRAM_REGULARIZATION,
        objective_history: history,
    })
}

// ---------------------------------------------------------------------------
// Raw-coefficient ADMM with the box handled by projection (fallback path)
// ---------------------------------------------------------------------------

fn solve_boxed(data: &DataTerm, basis: &ProbeBasis, cfg: &SolverConfig) -> Result<FitResult> {
    let m = basis.len();
    let gram = basis.gram();
    // `quad` enters the update as 2*quad; the pure overlap objective has no
    // quadratic part and pulls with `linear` itself rather than 2*linear.
    let (quad, linear, quad_scale, lin_scale): (Mat<f64>, Vec<f64>, f64, f64) = match data {
        DataTerm::State {
            linear,
            pure: true,
            ..
        }
        | DataTerm::Overlap { linear, .. } => (Mat::zeros(m, m), linear.clone(), 0.0, 1.0),
        DataTerm::State { linear, .. } => (gram.clone(), linear.clone(), 2.0, 2.0),
        DataTerm::Pattern { design, signal } => {
            let q = design.transpose() * design;
            let k = design.nrows();
            let fvec = Mat::from_fn(k, 1, |i, _| signal[i]);
            let lm = design.transpose() * &fvec;
            (q, (0..m).map(|i| lm[(i, 0)]).collect(), 2.0, 2.0)
        }
    };

    let mut penalty = cfg.admm_penalty;
    let mut regularization = GRAM_REGULARIZATION;
    let factorize = |rho: f64, reg: f64| -> Option<faer::linalg::solvers::Llt<f64>> {
        let h = Mat::from_fn(m, m, |i, j| {
            let mut v = quad_scale * quad[(i, j)] + rho * gram[(i, j)];
            if i == j {
                v += rho + reg;
            }
            v
        });
        h.llt(Side::Lower).ok()
    };
    let mut chol = loop {
        match factorize(penalty, regularization) {
            Some(f) => break f,
            None => {
                regularization *= 100.0;
                if regularization > 1e-6 {
                    return Err(Error::SingularGram { regularization });
                }
            }
        }
    };

    let uniform = vec![1.0 / m as f64; m];
    let mut x = uniform.clone();
    let mut y = uniform.clone();
    let mut dual_vec = vec![0.0f64; m];
    let mut mixture = basis.mixture(&x)?;
    let mut z = mixture.clone();
    let dim = z.nrows();
    let mut dual_mat: CMat = Mat::zeros(dim, dim);

    let mut tracker = IterateTracker::new(FEASIBILITY_FACTOR * cfg.primal_tol);
    tracker.consider(&x, data, basis, cfg.coeff_bound)?;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;

        let za = &z - &dual_mat;
        let projected = basis.project_onto_probes(&za);
        let rhs = Mat::from_fn(m, 1, |i, _| {
            lin_scale * linear[i] + penalty * (projected[i] + y[i] - dual_vec[i])
        });
        let xm = chol.solve(&rhs);
        for i in 0..m {
            x[i] = xm[(i, 0)];
        }
        mixture = basis.mixture(&x)?;

        let z_prev = z;
        let y_prev = y.clone();
        let relaxed_mix = Mat::from_fn(dim, dim, |i, j| {
            RELAXATION * mixture[(i, j)] + (1.0 - RELAXATION) * z_prev[(i, j)]
        });
        let shifted = linalg::hermitize(&(&relaxed_mix + &dual_mat));
        let (z_new, _) = linalg::psd_project(&shifted)?;
        z = z_new;
        let relaxed_x: Vec<f64> = (0..m)
            .map(|i| RELAXATION * x[i] + (1.0 - RELAXATION) * y_prev[i])
            .collect();
        let shifted_vec: Vec<f64> = (0..m).map(|i| relaxed_x[i] + dual_vec[i]).collect();
        y = project_sum_one_box(&shifted_vec, cfg.coeff_bound);

        let mut primal_sqr = 0.0;
        for j in 0..dim {
            for i in 0..dim {
                dual_mat[(i, j)] += relaxed_mix[(i, j)] - z[(i, j)];
                primal_sqr += (mixture[(i, j)] - z[(i, j)]).norm_sqr();
            }
        }
        for i in 0..m {
            dual_vec[i] += relaxed_x[i] - y[i];
            let rr = x[i] - y[i];
            primal_sqr += rr * rr;
        }
        let primal_res = primal_sqr.sqrt();

        let dz = &z - &z_prev;
        let dz_proj = basis.project_onto_probes(&dz);
        let mut dual_sqr = 0.0;
        for i in 0..m {
            let t = dz_proj[i] + (y[i] - y_prev[i]);
            dual_sqr += t * t;
        }
        let dual_res = penalty * dual_sqr.sqrt();

        let scale_pri = linalg::frob_norm_sqr(&mixture)
            .max(linalg::frob_norm_sqr(&z))
            .sqrt()
            .max(norm2(&x))
            .max(norm2(&y))
            .max(1.0);
        let dual_scale_vec = basis.project_onto_probes(&dual_mat);
        let mut dual_scale_sqr = 0.0;
        for i in 0..m {
            let t = dual_scale_vec[i] + dual_vec[i];
            dual_scale_sqr += t * t;
        }
        let scale_dual = (penalty * dual_scale_sqr.sqrt()).max(1.0);

        if iterations % CHECKPOINT_EVERY == 0 {
            tracker.consider(&y, data, basis, cfg.coeff_bound)?;
        }

        if primal_res <= cfg.primal_tol * scale_pri && dual_res <= cfg.dual_tol * scale_dual {
            converged = true;
            break;
        }

        if iterations % ADAPT_EVERY == 0 {
            let rel_pri = primal_res / scale_pri;
            let rel_dual = dual_res / scale_dual;
            let ratio = (rel_pri / rel_dual.max(1e-300)).sqrt().clamp(0.2, 5.0);
            if (ratio > 2.0 || ratio < 0.5) && penalty * ratio > 1e-6 && penalty * ratio < 1e6 {
                penalty *= ratio;
                scale_dual_mat(&mut dual_mat, 1.0 / ratio);
                for v in dual_vec.iter_mut() {
                    *v /= ratio;
                }
                chol = factorize(penalty, regularization)
                    .ok_or(Error::SingularGram { regularization })?;
            }
        }
    }

    tracker.consider(&y, data, basis, cfg.coeff_bound)?;
    Ok(tracker.finish(iterations, converged, regularization))
}

// ---------------------------------------------------------------------------
// Projections and small helpers
// ---------------------------------------------------------------------------

/// Projection onto `{ S >= 0, Tr S = 1 }`: eigendecompose and project the
/// eigenvalue vector onto the probability simplex.
fn project_spectrahedron(mat: &CMat) -> Result<CMat> {
    let (vals, vecs) = linalg::eigh(mat)?;
    let projected = project_simplex(&vals);
    let n = mat.nrows();
    let mut scaled = vecs.clone();
    for (k, &lam) in projected.iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= Complex64::new(lam, 0.0);
        }
    }
    let out = &scaled * vecs.adjoint();
    Ok(linalg::hermitize(&out))
}

/// Euclidean projection onto the probability simplex `{v >= 0, sum v = 1}`.
fn project_simplex(vals: &[f64]) -> Vec<f64> {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    vals.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Exact Euclidean projection onto `{ y : sum y = 1, |y_i| <= bound }`.
///
/// The KKT form is `y_i = clamp(v_i - lambda, -bound, bound)` with the shift
/// `lambda` fixed by the sum constraint; the sum is monotone in `lambda`, so
/// bisection pins it to machine precision.
pub fn project_sum_one_box(v: &[f64], bound: f64) -> Vec<f64> {
    let sum_at = |lambda: f64| -> f64 {
        v.iter()
            .map(|&vi| (vi - lambda).clamp(-bound, bound))
            .sum()
    };
    let mut lo = v.iter().copied().fold(f64::INFINITY, f64::min) - bound - 1.0;
    let mut hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) + bound + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter()
        .map(|&vi| (vi - lambda).clamp(-bound, bound))
        .collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn scale_dual_mat(dual: &mut CMat, factor: f64) {
    let n = dual.nrows();
    for j in 0..n {
        for i in 0..n {
            dual[(i, j)] *= Complex64::new(factor, 0.0);
        }
    }
}

/// `lift^T v` (length M -> r).
fn lift_t_vec(lift: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    let (m, r) = (lift.nrows(), lift.ncols());
    let mut out = vec![0.0; r];
    for i in 0..m {
        let vi = v[i];
        if vi != 0.0 {
            for k in 0..r {
                out[k] += lift[(i, k)] * vi;
            }
        }
    }
    out
}

/// `lift w` (length r -> M).
fn lift_vec(lift: &Mat<f64>, w: &[f64]) -> Vec<f64> {
    let (m, r) = (lift.nrows(), lift.ncols());
    let mut out = vec![0.0; m];
    for k in 0..r {
        let wk = w[k];
        if wk != 0.0 {
            for i in 0..m {
                out[i] += lift[(i, k)] * wk;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::HilbertSpec;
    use crate::measure::{exact_probe_patterns, probabilities, MeasurementSet};
    use crate::metrics;
    use crate::probe::square_lattice;
    use crate::statespec::named_state;

    fn default_cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn projection_onto_sum_one_box() {
        let y = project_sum_one_box(&[0.0, 0.0, 0.0], 10.0);
        for v in &y {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        let y = project_sum_one_box(&[5.0, -5.0], 2.0);
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(y.iter().all(|v| v.abs() <= 2.0 + 1e-12));
        // Already feasible input is a fixed point.
        let y = project_sum_one_box(&[0.25, 0.75], 1.0);
        assert!((y[0] - 0.25).abs() < 1e-10 && (y[1] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn simplex_projection_matches_known_cases() {
        let p = project_simplex(&[0.5, 0.5]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = project_simplex(&[2.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let p = project_simplex(&[0.6, 0.6, -1.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v >= 0.0));
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_membership_recovers_indicator() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(3, 0.25), space).unwrap();
        let target = basis.projector(4);
        let fit = fit_state(&target, &basis, &default_cfg()).unwrap();
        assert!(fit.converged, "iterations {}", fit.iterations);
        let assembled = assemble(&fit.coefficients, &basis).unwrap();
        let f = metrics::fidelity(&assembled.state, &target).unwrap();
        assert!(f >= 1.0 - 1e-8, "fidelity {f}");
        assert!(fit.objective < 1e-10, "objective {}", fit.objective);
    }

    #[test]
    fn uniform_mixture_is_a_valid_mixed_state() {
        let space = HilbertSpec::single(10).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(3, 0.3), space).unwrap();
        let x = vec![1.0 / 9.0; 9];
        let assembled = assemble(&x, &basis).unwrap();
        assert!((assembled.state.trace() - 1.0).abs() < 1e-12);
        assert!(metrics::purity(&assembled.state) < 1.0 - 1e-6);
        assert!(assembled.preclip_min_eigenvalue > -1e-12);
    }

    #[test]
    fn single_mode_representation_reaches_target_fidelity() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap();
        let target = named_state("coherent:0.5", space).unwrap();
        let fit = fit_state(&target, &basis, &default_cfg()).unwrap();
        let assembled = assemble(&fit.coefficients, &basis).unwrap();
        let f = metrics::fidelity(&target, &assembled.state).unwrap();
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn solver_is_deterministic() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(4, 0.2), space).unwrap();
        let target = named_state("even_cat:0.5", space).unwrap();
        let a = fit_state(&target, &basis, &default_cfg()).unwrap();
        let b = fit_state(&target, &basis, &default_cfg()).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn objective_history_is_non_increasing() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(5, 0.18), space).unwrap();
        let target = named_state("fock:1", space).unwrap();
        let fit = fit_state(&target, &basis, &default_cfg()).unwrap();
        for w in fit.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(fit.objective <= fit.objective_history[0] + 1e-15);
    }

    #[test]
    fn feasibility_at_convergence() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(4, 0.2), space).unwrap();
        let target = named_state("mix01:p=0.25", space).unwrap();
        let cfg = default_cfg();
        let fit = fit_state(&target, &basis, &cfg).unwrap();
        assert!(fit.converged);
        assert!(fit.constraint_violation <= 10.0 * cfg.primal_tol);
        let sum: f64 = fit.coefficients.iter().sum();
        assert!((sum - 1.0).abs() <= cfg.primal_tol);
        assert!(fit
            .coefficients
            .iter()
            .all(|c| c.abs() <= cfg.coeff_bound + cfg.primal_tol));
    }

    #[test]
    fn noiseless_pattern_fit_recovers_probe() {
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(3, 0.25), space).unwrap();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let probes = exact_probe_patterns(&basis, &meas).unwrap();
        let signal = probabilities(&basis.projector(2), &meas).unwrap();
        let fit = fit_pattern(&signal, &probes, &basis, &default_cfg()).unwrap();
        assert!(fit.objective <= 1e-12, "objective {}", fit.objective);
        let assembled = assemble(&fit.coefficients, &basis).unwrap();
        let f = metrics::fidelity(&assembled.state, &basis.projector(2)).unwrap();
        assert!(f >= 1.0 - 1e-6);
    }

    #[test]
    fn tight_coefficient_cap_is_honored() {
        // A cap low enough to bind: the solver must stay inside the box.
        let space = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(3, 0.2), space).unwrap();
        let target = named_state("fock:1", space).unwrap();
        let cfg = SolverConfig {
            coeff_bound: 0.5,
            ..Default::default()
        };
        let fit = fit_state(&target, &basis, &cfg).unwrap();
        assert!(fit.coefficients.iter().all(|c| c.abs() <= 0.5 + 1e-6));
        let sum: f64 = fit.coefficients.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pattern_length_mismatch_is_rejected() {
        let space = HilbertSpec::single(10).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(2, 0.2), space).unwrap();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let probes = exact_probe_patterns(&basis, &meas).unwrap();
        let bad_signal = DataPattern::probabilities(vec![0.1; 3]).unwrap();
        assert!(fit_pattern(&bad_signal, &probes, &basis, &default_cfg()).is_err());
        let short = &probes[..2];
        let signal = probabilities(&basis.projector(0), &meas).unwrap();
        assert!(fit_pattern(&signal, short, &basis, &default_cfg()).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let space = HilbertSpec::single(10).unwrap();
        let other = HilbertSpec::single(12).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(2, 0.2), space).unwrap();
        let target = named_state("fock:1", other).unwrap();
        assert!(fit_state(&target, &basis, &default_cfg()).is_err());
    }
}
