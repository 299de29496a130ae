use std::time::Instant;
use tomo_core::*;

fn main() {
    let cases: Vec<(&str, &str)> = vec![
        ("helical", "coherent:0.5"),
        ("helical", "mix01:p=0.25"),
        ("helical", "mix01:p=0.5"),
        ("square6", "even_cat:0.5"),
        ("square6", "fock:1"),
    ];
    let space = HilbertSpec::single(12).unwrap();
    let max_it: usize = std::env::var("MAXIT").ok().and_then(|v| v.parse().ok()).unwrap_or(100_000);
    let bound: f64 = std::env::var("BOUND").ok().and_then(|v| v.parse().ok()).unwrap_or(1000.0);
    for (grid_name, spec) in cases {
        let basis = match grid_name {
            "helical" => ProbeBasis::single_mode(
                &helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4),
                space,
            )
            .unwrap(),
            _ => ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap(),
        };
        let target = named_state(spec, space).unwrap();
        let cfg = SolverConfig {
            max_iterations: max_it,
            coeff_bound: bound,
            ..Default::default()
        };
        let t0 = Instant::now();
        let fit = fit_state(&target, &basis, &cfg).unwrap();
        let asm = assemble(&fit.coefficients, &basis).unwrap();
        let f = fidelity(&target, &asm.state).unwrap();
        let xmax = fit.coefficients.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        println!(
            "{grid_name:<8} {spec:<14} fid {:.6} it {} conv {} obj {:.3e} viol {:.2e} max|x| {:.2e} time {:.0?}",
            f, fit.iterations, fit.converged, fit.objective, fit.constraint_violation, xmax, t0.elapsed()
        );
    }
}
