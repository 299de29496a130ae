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
    for spec in ["bell_psi", "bell_phi", "entangled_cat:0.5"] {
        let target = named_state(spec, space).unwrap();
        let c = basis.project_onto_probes(target.entries());
        for cutoff in [1e-12f64, 1e-13, 1e-14] {
            // x = Phi Lambda^{-1} Phi^T c  (span projection, min-norm coefficients)
            let mut x = vec![0.0f64; m];
            for k in 0..m {
                if vals[k] > cutoff * lmax {
                    let phik_c: f64 = (0..m).map(|i| vecs[(i, k)] * c[i]).sum();
                    let wk = phik_c / vals[k];
                    for i in 0..m {
                        x[i] += vecs[(i, k)] * wk;
                    }
                }
            }
            let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let sum: f64 = x.iter().sum();
            let asm = assemble(&x, &basis).unwrap();
            let f = fidelity(&target, &asm.state).unwrap();
            println!(
                "{spec:<18} cutoff {cutoff:.0e}: fid {:.6} purity {:.5} preclip_min {:.2e} sum(x) {:.6} max|x| {:.2e}",
                f, purity(&asm.state), asm.preclip_min_eigenvalue, sum, xmax
            );
        }
    }
}
