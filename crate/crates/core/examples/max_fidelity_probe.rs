//! Maximize Tr(T S) (= squared fidelity for a pure target T) over the
//! span-spectrahedron intersection, to bound what the probe family can do.
use faer::Mat;
use num_complex::Complex64;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::two_mode(10).unwrap();
    let grid = square_lattice(7, 0.15);
    let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
    let spec = std::env::var("STATE").unwrap_or_else(|_| "entangled_cat:0.5".into());
    let target = named_state(&spec, space).unwrap();
    let c = basis.project_onto_probes(target.entries());
    let red = basis.reduced();
    let (m, r) = (basis.len(), red.rank);
    let t: Vec<f64> = {
        let mut out = vec![0.0f64; r];
        for i in 0..m {
            for k in 0..r {
                out[k] += red.lift[(i, k)] * c[i];
            }
        }
        out
    };
    // ADMM: minimize -t.w s.t. S(w) in spectrahedron.
    let rho = 1.0f64;
    let mut w = t.clone();
    let mut x: Vec<f64> = (0..m)
        .map(|i| (0..r).map(|k| red.lift[(i, k)] * w[k]).sum())
        .collect();
    let dim = space.dim();
    let mixture = basis.mixture(&x).unwrap();
    let mut z = mixture.clone();
    let mut u: Mat<Complex64> = Mat::zeros(dim, dim);
    let mut best = 0.0f64;
    for it in 0..4000 {
        // w-update: w = A^T(z-u) + t/rho
        let za = &z - &u;
        let proj = basis.project_onto_probes(&za);
        for k in 0..r {
            let mut acc = 0.0;
            for i in 0..m {
                acc += red.lift[(i, k)] * proj[i];
            }
            w[k] = acc + t[k] / rho;
        }
        for i in 0..m {
            x[i] = (0..r).map(|k| red.lift[(i, k)] * w[k]).sum();
        }
        let s = basis.mixture(&x).unwrap();
        // z-update: spectrahedron projection of s+u via clip+simplex
        let shifted = {
            let mut sh = s.clone();
            for j in 0..dim { for i in 0..dim { sh[(i, j)] += u[(i, j)]; } }
            sh
        };
        let (vals, vecs) = {
            let evd = shifted.self_adjoint_eigen(faer::Side::Lower).unwrap();
            let sv = evd.S().column_vector();
            let vals: Vec<f64> = (0..dim).map(|k| sv[k].re).collect();
            (vals, evd.U().to_owned())
        };
        // simplex projection
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut cum = 0.0; let mut theta = 0.0;
        for (k, &v) in sorted.iter().enumerate() {
            cum += v;
            let tt = (cum - 1.0) / (k + 1) as f64;
            if v - tt > 0.0 { theta = tt; } else { break; }
        }
        let mut scaled = vecs.clone();
        for k in 0..dim {
            let lam = (vals[k] - theta).max(0.0);
            for i in 0..dim { scaled[(i, k)] *= Complex64::new(lam, 0.0); }
        }
        z = &scaled * vecs.adjoint();
        for j in 0..dim { for i in 0..dim { u[(i, j)] += s[(i, j)] - z[(i, j)]; } }
        if it % 200 == 199 {
            // fidelity^2 of the feasible z against pure target: Tr(T z)
            let mut f2 = 0.0;
            for j in 0..dim { for i in 0..dim { f2 += (target.entries()[(i, j)].conj() * z[(i, j)]).re; } }
            best = best.max(f2);
            eprintln!("it {:5}: feasible Tr(T z) = {:.6} -> F = {:.6}", it + 1, f2, f2.max(0.0).sqrt());
        }
    }
    println!("{spec}: max feasible fidelity approx {:.6}", best.max(0.0).sqrt());
}
