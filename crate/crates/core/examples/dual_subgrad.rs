//! Upper bound on max Tr(T S) over span ∩ spectrahedron via subgradient
//! descent on the dual: min over Y ⊥ span of lambda_max(T - Y).
use faer::Mat;
use num_complex::Complex64;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    let case = std::env::var("CASE").unwrap_or_else(|_| "helical:coherent:0.5".into());
    let (basis, spec) = match case.split_once(':').unwrap() {
        ("square6", rest) => (
            ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap(),
            rest.to_string(),
        ),
        ("helical", rest) => (
            ProbeBasis::single_mode(
                &helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4),
                space,
            )
            .unwrap(),
            rest.to_string(),
        ),
        _ => panic!(),
    };
    let target = named_state(&spec, space).unwrap();
    let dim = space.dim();
    let m = basis.len();
    let red = basis.reduced();
    let (r, lift) = (red.rank, &red.lift);

    let project_span_perp = |a: &Mat<Complex64>| -> Mat<Complex64> {
        // A - S(lift lift^T A^probes): span component via the orthonormal basis.
        let proj = basis.project_onto_probes(a);
        let mut wv = vec![0.0; r];
        for i in 0..m {
            for k in 0..r {
                wv[k] += lift[(i, k)] * proj[i];
            }
        }
        let mut xv = vec![0.0; m];
        for k in 0..r {
            for i in 0..m {
                xv[i] += lift[(i, k)] * wv[k];
            }
        }
        let span = basis.mixture(&xv).unwrap();
        let mut out = a.clone();
        for j in 0..dim {
            for i in 0..dim {
                out[(i, j)] -= span[(i, j)];
            }
        }
        out
    };

    let mut y: Mat<Complex64> = Mat::zeros(dim, dim);
    let mut best = f64::INFINITY;
    let iters: usize = std::env::var("ITERS").ok().and_then(|v| v.parse().ok()).unwrap_or(3000);
    for k in 0..iters {
        let mut tm = target.entries().clone();
        for j in 0..dim {
            for i in 0..dim {
                tm[(i, j)] -= y[(i, j)];
            }
        }
        let evd = tm.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let sv = evd.S().column_vector();
        let mut kmax = 0;
        for i in 0..dim {
            if sv[i].re > sv[kmax].re {
                kmax = i;
            }
        }
        let lmax = sv[kmax].re;
        best = best.min(lmax);
        // subgradient: -u u^H; step toward reducing lambda_max
        let u = evd.U();
        let gu = Mat::from_fn(dim, dim, |i, j| u[(i, kmax)] * u[(j, kmax)].conj());
        let step = 0.5 / (1.0 + k as f64).sqrt();
        let dir = project_span_perp(&gu);
        for j in 0..dim {
            for i in 0..dim {
                y[(i, j)] -= dir[(i, j)] * Complex64::new(step, 0.0);
            }
        }
        if k % 500 == 499 {
            eprintln!("it {:5}: best dual bound F^2 <= {:.8} (F <= {:.6})", k + 1, best, best.max(0.0).sqrt());
        }
    }
    println!("{case}: dual upper bound F <= {:.6}", best.max(0.0).sqrt());
}
