//! Weak-duality certificate for max Tr(T S) over span(probes) ∩ {S>=0, TrS=1}:
//! for any Y orthogonal to the span, lambda_max(T - Y) >= optimum.
use faer::Mat;
use num_complex::Complex64;
use tomo_core::*;

fn main() {
    let space = HilbertSpec::single(12).unwrap();
    let case = std::env::var("CASE").unwrap_or_else(|_| "square6:fock:1".into());
    let (basis, spec, space) = match case.split_once(':').unwrap() {
        ("square6", rest) => (
            ProbeBasis::single_mode(&square_lattice(6, 0.15), space).unwrap(),
            rest.to_string(),
            space,
        ),
        ("helical", rest) => (
            ProbeBasis::single_mode(
                &helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4),
                space,
            )
            .unwrap(),
            rest.to_string(),
            space,
        ),
        ("twomode", rest) => {
            let sp = HilbertSpec::two_mode(10).unwrap();
            (
                ProbeBasis::tensor_basis(&square_lattice(7, 0.15), sp).unwrap(),
                rest.to_string(),
                sp,
            )
        }
        _ => panic!(),
    };
    let target = named_state(&spec, space).unwrap();
    let dim = space.dim();
    let m = basis.len();

    // Plain ADMM on: max Tr(T S), S in span, Tr S = 1, S >= 0,
    // tracking the (unscaled) dual of the cone constraint.
    let red = basis.reduced();
    let (r, lift) = (red.rank, &red.lift);
    let c = basis.project_onto_probes(target.entries());
    let t: Vec<f64> = {
        let mut out = vec![0.0; r];
        for i in 0..m {
            for k in 0..r {
                out[k] += lift[(i, k)] * c[i];
            }
        }
        out
    };
    let rho = 1.0f64;
    let mut w = t.clone();
    let lift_vec = |w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; m];
        for k in 0..r {
            for i in 0..m {
                x[i] += lift[(i, k)] * w[k];
            }
        }
        x
    };
    let mut x = lift_vec(&w);
    let mut z = basis.mixture(&x).unwrap();
    let mut u: Mat<Complex64> = Mat::zeros(dim, dim);
    let iters: usize = std::env::var("ITERS").ok().and_then(|v| v.parse().ok()).unwrap_or(200_000);
    for _ in 0..iters {
        let za = {
            let mut za = z.clone();
            for j in 0..dim { for i in 0..dim { za[(i, j)] -= u[(i, j)]; } }
            za
        };
        let proj = basis.project_onto_probes(&za);
        for k in 0..r {
            let mut acc = t[k] / rho;
            for i in 0..m {
                acc += lift[(i, k)] * proj[i];
            }
            w[k] = acc;
        }
        x = lift_vec(&w);
        let s = basis.mixture(&x).unwrap();
        // spectrahedron projection of s+u
        let mut sh = s.clone();
        for j in 0..dim { for i in 0..dim { sh[(i, j)] += u[(i, j)]; } }
        let evd = sh.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let sv = evd.S().column_vector();
        let vals: Vec<f64> = (0..dim).map(|k| sv[k].re).collect();
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let (mut cum, mut theta) = (0.0, 0.0);
        for (k, &v) in sorted.iter().enumerate() {
            cum += v;
            let tt = (cum - 1.0) / (k + 1) as f64;
            if v - tt > 0.0 { theta = tt; } else { break; }
        }
        let vecs = evd.U();
        let mut scaled = vecs.to_owned();
        for k in 0..dim {
            let lam = (vals[k] - theta).max(0.0);
            for i in 0..dim { scaled[(i, k)] *= Complex64::new(lam, 0.0); }
        }
        z = &scaled * vecs.adjoint();
        for j in 0..dim { for i in 0..dim { u[(i, j)] += s[(i, j)] - z[(i, j)]; } }
    }
    // Primal value from feasible z.
    let mut f2 = 0.0;
    for j in 0..dim { for i in 0..dim { f2 += (target.entries()[(i, j)].conj() * z[(i, j)]).re; } }
    // Dual candidate: Y = rho * u, projected onto span-orthocomplement.
    // Span component of a Hermitian A: S(lift_t(A)) in w coords.
    let y_full = {
        let mut y = Mat::<Complex64>::zeros(dim, dim);
        for j in 0..dim { for i in 0..dim { y[(i, j)] = u[(i, j)] * Complex64::new(rho, 0.0); } }
        y
    };
    let proj_y = basis.project_onto_probes(&y_full);
    let mut wy = vec![0.0; r];
    for i in 0..m {
        for k in 0..r {
            wy[k] += lift[(i, k)] * proj_y[i];
        }
    }
    let xy = lift_vec(&wy);
    let y_span = basis.mixture(&xy).unwrap();
    let y_perp = {
        let mut yp = y_full.clone();
        for j in 0..dim { for i in 0..dim { yp[(i, j)] -= y_span[(i, j)]; } }
        yp
    };
    // Bound: lambda_max(T - Y_perp).
    let mut tm = target.entries().clone();
    for j in 0..dim { for i in 0..dim { tm[(i, j)] -= y_perp[(i, j)]; } }
    let evd = tm.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let sv = evd.S().column_vector();
    let lmax = (0..dim).map(|k| sv[k].re).fold(f64::MIN, f64::max);
    println!(
        "{case}: primal feasible F^2 = {:.8} (F = {:.6}); dual bound F^2 <= {:.8} (F <= {:.6})",
        f2, f2.max(0.0).sqrt(), lmax, lmax.max(0.0).sqrt()
    );
}
