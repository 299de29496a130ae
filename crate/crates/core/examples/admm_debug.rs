use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    let basis = ProbeBasis::single_mode(&square_lattice(3, 0.25), space).unwrap();
    let target = basis.projector(4);
    for max_it in [50, 200, 1000, 5000, 20000] {
        let cfg = SolverConfig { max_iterations: max_it, ..Default::default() };
        let fit = fit_state(&target, &basis, &cfg).unwrap();
        println!(
            "max_it {:6}: it {:6} conv {} obj {:.3e} viol {:.3e} mineig {:.3e}",
            max_it, fit.iterations, fit.converged, fit.objective, fit.constraint_violation, fit.min_mixture_eigenvalue
        );
    }
}
