use std::time::Instant;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::two_mode(10).unwrap();
    let grid = square_lattice(7, 0.15);
    let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
    let t0 = Instant::now();
    let _ = basis.reduced();
    println!("basis+gram+reduced ({} probes): {:?}", basis.len(), t0.elapsed());
    let state_spec = std::env::var("STATE").unwrap_or_else(|_| "bell_psi".into());
    let target = named_state(&state_spec, space).unwrap();
    for max_it in [250usize, 500, 1000, 2000] {
        let cfg = SolverConfig { max_iterations: max_it, ..Default::default() };
        let t0 = Instant::now();
        let fit = fit_state(&target, &basis, &cfg).unwrap();
        let dt = t0.elapsed();
        let asm = assemble(&fit.coefficients, &basis).unwrap();
        let f = fidelity(&target, &asm.state).unwrap();
        println!(
            "{} max_it {:5}: it {:5} conv {} obj {:.3e} viol {:.3e} fid {:.6} purity {:.5} time {:.1?}",
            state_spec, max_it, fit.iterations, fit.converged, fit.objective,
            fit.constraint_violation, f, purity(&asm.state), dt
        );
    }
}
