use std::time::Instant;
use tomo_core::*;

fn main() {
    let d: usize = std::env::var("DPM").ok().and_then(|v| v.parse().ok()).unwrap_or(10);
    let max_it: usize = std::env::var("MAXIT").ok().and_then(|v| v.parse().ok()).unwrap_or(1000);
    let space = HilbertSpec::two_mode(d).unwrap();
    let grid = square_lattice(7, 0.15);
    let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
    let target = named_state("entangled_cat:0.5", space).unwrap();
    // span capability
    let c = basis.project_onto_probes(target.entries());
    let red = basis.reduced();
    let t_w = {
        let mut out = vec![0.0f64; red.rank];
        for i in 0..basis.len() {
            for k in 0..red.rank {
                out[k] += red.lift[(i, k)] * c[i];
            }
        }
        out
    };
    let span_norm: f64 = t_w.iter().map(|v| v * v).sum();
    println!("D/mode={d} rank={} span obj = {:.3e}", red.rank, (1.0f64 - span_norm).max(0.0));
    let cfg = SolverConfig { max_iterations: max_it, ..Default::default() };
    let t0 = Instant::now();
    let fit = fit_state(&target, &basis, &cfg).unwrap();
    let asm = assemble(&fit.coefficients, &basis).unwrap();
    let f = fidelity(&target, &asm.state).unwrap();
    println!(
        "D/mode={d} it {} conv {} obj {:.3e} viol {:.3e} fid {:.6} purity {:.5} time {:.1?}",
        fit.iterations, fit.converged, fit.objective, fit.constraint_violation, f,
        purity(&asm.state), t0.elapsed()
    );
}
