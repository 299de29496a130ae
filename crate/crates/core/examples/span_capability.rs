use faer::Mat;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::two_mode(10).unwrap();
    let grid = square_lattice(7, 0.15);
    let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
    let g = basis.gram();
    let m = basis.len();
    let evd = g.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let s = evd.S().column_vector();
    let vecs = evd.U();
    let vals: Vec<f64> = (0..m).map(|k| s[k]).collect();
    let lmax = vals.iter().copied().fold(0.0f64, f64::max);
    println!("gram lambda_max = {lmax:.3e}");
    for spec in ["bell_psi", "bell_phi", "entangled_cat:0.5"] {
        let target = named_state(spec, space).unwrap();
        let c = basis.project_onto_probes(target.entries());
        let offset = 1.0; // pure state: |T|_F^2 = 1... but cats slightly less? use real frob
        let offset = {
            let mut acc = 0.0;
            for i in 0..target.dim() { for j in 0..target.dim() { acc += target.entries()[(i,j)].norm_sqr(); } }
            acc
        };
        // w-coordinates: t_k = (1/sqrt(l_k)) * phi_k^T c
        for cutoff in [1e-10f64, 1e-12, 1e-13, 1e-14, 1e-15] {
            let mut span_norm = 0.0;
            let mut rank = 0;
            let mut xnorm_min = 0.0; // minimal-norm x that achieves the span projection
            for k in 0..m {
                if vals[k] > cutoff * lmax {
                    let phik_c: f64 = (0..m).map(|i| vecs[(i, k)] * c[i]).sum();
                    let t = phik_c / vals[k].sqrt();
                    span_norm += t * t;
                    xnorm_min += (t / vals[k].sqrt()).powi(2);
                    rank += 1;
                }
            }
            println!(
                "{spec:<18} cutoff {cutoff:.0e}: rank {rank:4}  span obj {:.3e}  |x|_2 of projection {:.3e}",
                (offset - span_norm).max(0.0), xnorm_min.sqrt()
            );
        }
    }
    let _ = Mat::<f64>::zeros(1, 1);
}
