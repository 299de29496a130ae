use faer::Mat;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    let grid = helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4);
    let basis = ProbeBasis::single_mode(&grid, space).unwrap();
    let g = basis.gram();
    let m = basis.len();
    let evd = g.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let sv = evd.S().column_vector();
    let vecs = evd.U();
    let vals: Vec<f64> = (0..m).map(|k| sv[k]).collect();
    let lmax = vals.iter().copied().fold(0.0f64, f64::max);
    println!("helical-17 gram eigenvalues (desc):");
    let mut sorted: Vec<f64> = vals.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (i, v) in sorted.iter().enumerate() {
        println!("  {i:2}: {v:.3e}");
    }
    for spec in ["coherent:0.5", "fock:1", "even_cat:0.5", "superpos01"] {
        let target = named_state(spec, space).unwrap();
        let c = basis.project_onto_probes(target.entries());
        // span projection objective with per-direction |x| demands
        println!("{spec}:");
        for cutoff in [1e-13f64, 1e-15, 1e-17, 0.0] {
            let mut span_obj = 1.0; // |T|^2 = 1 for pure targets
            let mut xnorm = 0.0;
            let mut rank = 0;
            for k in 0..m {
                if vals[k] > cutoff * lmax && vals[k] > 0.0 {
                    let pc: f64 = (0..m).map(|i| vecs[(i, k)] * c[i]).sum();
                    let t = pc / vals[k].sqrt();
                    span_obj -= t * t;
                    xnorm += (t / vals[k].sqrt()).powi(2);
                    rank += 1;
                }
            }
            println!(
                "  cutoff {cutoff:.0e}: rank {rank:2} span obj {:.3e} -> F_upper ~ {:.6}  min-norm |x|_2 {:.2e}",
                span_obj.max(0.0),
                (1.0f64 - span_obj.max(0.0)).max(0.0).sqrt(),
                xnorm.sqrt()
            );
        }
    }
    let _ = Mat::<f64>::zeros(1, 1);
}
