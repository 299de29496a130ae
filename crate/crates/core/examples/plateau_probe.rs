use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    let helical = ProbeBasis::single_mode(
        &helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4),
        space,
    )
    .unwrap();
    let square = ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap();
    let cases: Vec<(&str, &ProbeBasis, &str)> = vec![
        ("helical", &helical, "coherent:0.5"),
        ("square6", &square, "even_cat:0.5"),
        ("helical", &helical, "mix01:p=0.25"),
    ];
    for (gname, basis, spec) in cases {
        let target = named_state(spec, space).unwrap();
        for max_it in [200_000usize, 800_000, 2_000_000] {
            let cfg = SolverConfig { max_iterations: max_it, ..Default::default() };
            let fit = fit_state(&target, basis, &cfg).unwrap();
            let asm = assemble(&fit.coefficients, basis).unwrap();
            let f = fidelity(&target, &asm.state).unwrap();
            println!(
                "{gname} {spec} it {}: fid {:.6} obj {:.4e} viol {:.2e} conv {}",
                fit.iterations, f, fit.objective, fit.constraint_violation, fit.converged
            );
        }
    }
}
