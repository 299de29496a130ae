use std::time::Instant;
use tomo_core::*;

fn main() {
    let which = std::env::var("WHICH").unwrap_or_else(|_| "dsweep".into());
    match which.as_str() {
        "dsweep" => {
            let space = HilbertSpec::two_mode(10).unwrap();
            let max_it: usize = std::env::var("MAXIT").ok().and_then(|v| v.parse().ok()).unwrap_or(800);
            let cfg = SolverConfig { max_iterations: max_it, ..Default::default() };
            for d in [0.05f64, 0.10, 0.20] {
                let basis = ProbeBasis::tensor_basis(&square_lattice(7, d), space).unwrap();
                for spec in ["entangled_cat:0.5", "bell_psi", "bell_phi"] {
                    let target = named_state(spec, space).unwrap();
                    let t0 = Instant::now();
                    let fit = fit_state(&target, &basis, &cfg).unwrap();
                    let asm = assemble(&fit.coefficients, &basis).unwrap();
                    let f = fidelity(&target, &asm.state).unwrap();
                    let w = build_witness(&target).unwrap();
                    let tr_appr = evaluate_witness(&w.witness, &asm.state).unwrap();
                    println!(
                        "d={d:.2} {spec:<18} fid {:.6} purity {:.5} Tr(W rho)={:.6} Tr(W appr)={:.6} diff {:.2e} time {:.0?}",
                        f, purity(&asm.state), w.trace_value, tr_appr, (tr_appr - w.trace_value).abs(), t0.elapsed()
                    );
                }
            }
        }
        "helical" => {
            let space = HilbertSpec::single(12).unwrap();
            let grid = helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4);
            let basis = ProbeBasis::single_mode(&grid, space).unwrap();
            let cfg = SolverConfig::default();
            let mut specs = vec![
                "fock:1".to_string(), "coherent:0.5".into(), "even_cat:0.5".into(), "superpos01".into(),
            ];
            for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                specs.push(format!("mix01:p={p}"));
            }
            for spec in specs {
                let target = named_state(&spec, space).unwrap();
                let t0 = Instant::now();
                let fit = fit_state(&target, &basis, &cfg).unwrap();
                let asm = assemble(&fit.coefficients, &basis).unwrap();
                let f = fidelity(&target, &asm.state).unwrap();
                let xmax = fit.coefficients.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                println!(
                    "helical {spec:<14} fid {:.6} purity {:.5} it {} conv {} max|x| {:.1e} time {:.0?}",
                    f, purity(&asm.state), fit.iterations, fit.converged, xmax, t0.elapsed()
                );
            }
        }
        "square6" => {
            let space = HilbertSpec::single(12).unwrap();
            let basis = ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap();
            let cfg = SolverConfig::default();
            for spec in ["fock:1", "coherent:0.5", "even_cat:0.5", "superpos01"] {
                let target = named_state(spec, space).unwrap();
                let fit = fit_state(&target, &basis, &cfg).unwrap();
                let asm = assemble(&fit.coefficients, &basis).unwrap();
                let f = fidelity(&target, &asm.state).unwrap();
                println!(
                    "square6 {spec:<14} fid {:.6} purity {:.5} it {} conv {}",
                    f, purity(&asm.state), fit.iterations, fit.converged
                );
            }
        }
        _ => panic!("unknown WHICH"),
    }
}
