use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    for d in [0.05f64, 0.10, 0.15] {
        let basis = ProbeBasis::single_mode(&square_lattice(6, d), space).unwrap();
        let g = basis.gram();
        let m = basis.len();
        let evd = g.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let sv = evd.S().column_vector();
        let vecs = evd.U();
        let vals: Vec<f64> = (0..m).map(|k| sv[k]).collect();
        for spec in ["fock:1", "coherent:0.5", "even_cat:0.5", "superpos01"] {
            let target = named_state(spec, space).unwrap();
            let c = basis.project_onto_probes(target.entries());
            let mut span_obj = 1.0f64;
            let mut xnorm = 0.0;
            let mut rank = 0;
            for k in 0..m {
                if vals[k] > 0.0 && vals[k] > 1e-16 * vals[m - 1].max(vals[0]) {
                    let pc: f64 = (0..m).map(|i| vecs[(i, k)] * c[i]).sum();
                    let t = pc / vals[k].sqrt();
                    span_obj -= t * t;
                    xnorm += (t / vals[k].sqrt()).powi(2);
                    rank += 1;
                }
            }
            println!(
                "square6 d={d:.2} {spec:<14} rank {rank} span obj {:.3e} F_upper {:.6} |x|_2 {:.2e}",
                span_obj.max(0.0), (1.0f64 - span_obj.max(0.0)).max(0.0).sqrt(), xnorm.sqrt()
            );
        }
    }
}
