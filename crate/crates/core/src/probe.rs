//! Coherent-projector probe sets: square lattices, helical grids and their
//! two-mode tensor products.

use std::sync::OnceLock;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherent_vector, CoherentAmplitude, DensityMatrix, HilbertSpec, PureState};
use crate::linalg::{self, CMat};

/// Layout parameters for a probe (or measurement) grid on the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// `nodes x nodes` square lattice with pitch `pitch`, centered on the origin.
    Square { nodes: usize, pitch: f64 },
    /// `nodes` points equidistant in radius (`radial_step`) and angle
    /// (`angular_step`, radians), starting from the origin.
    Helical {
        nodes: usize,
        radial_step: f64,
        angular_step: f64,
    },
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GridSpec::Square { nodes, pitch } => {
                if nodes < 1 {
                    return Err(Error::ParamOutOfRange {
                        name: "nodes",
                        value: nodes as f64,
                        constraint: "must be at least 1",
                    });
                }
                if !(pitch > 0.0) || !pitch.is_finite() {
                    return Err(Error::ParamOutOfRange {
                        name: "pitch",
                        value: pitch,
                        constraint: "must be positive and finite",
                    });
                }
            }
            GridSpec::Helical {
                nodes,
                radial_step,
                angular_step,
            } => {
                if nodes < 1 {
                    return Err(Error::ParamOutOfRange {
                        name: "nodes",
                        value: nodes as f64,
                        constraint: "must be at least 1",
                    });
                }
                if !(radial_step > 0.0) || !radial_step.is_finite() {
                    return Err(Error::ParamOutOfRange {
                        name: "radial_step",
                        value: radial_step,
                        constraint: "must be positive and finite",
                    });
                }
                if !angular_step.is_finite() {
                    return Err(Error::ParamOutOfRange {
                        name: "angular_step",
                        value: angular_step,
                        constraint: "must be finite",
                    });
                }
            }
        }
        Ok(())
    }

    /// Amplitudes of this grid in a fixed deterministic order.
    pub fn amplitudes(&self) -> Result<Vec<CoherentAmplitude>> {
        self.validate()?;
        Ok(match *self {
            GridSpec::Square { nodes, pitch } => square_lattice(nodes, pitch),
            GridSpec::Helical {
                nodes,
                radial_step,
                angular_step,
            } => helical_grid(nodes, radial_step, angular_step),
        })
    }
}

/// Square lattice centered on the origin: `alpha = d(j - (N-1)/2) + i d(k - (N-1)/2)`
/// for `j, k` in `0..N`, row-major. Even `N` leaves no node at the origin.
pub fn square_lattice(nodes: usize, pitch: f64) -> Vec<CoherentAmplitude> {
    let offset = (nodes as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(nodes * nodes);
    for j in 0..nodes {
        for k in 0..nodes {
            out.push(CoherentAmplitude {
                re: pitch * (j as f64 - offset),
                im: pitch * (k as f64 - offset),
            });
        }
    }
    out
}

/// Helical grid `alpha_k = (k * dr) e^{i k dphi}` for `k` in `0..N`;
/// node 0 sits at the origin.
pub fn helical_grid(nodes: usize, radial_step: f64, angular_step: f64) -> Vec<CoherentAmplitude> {
    (0..nodes)
        .map(|k| {
            let r = k as f64 * radial_step;
            let phi = k as f64 * angular_step;
            CoherentAmplitude {
                re: r * phi.cos(),
                im: r * phi.sin(),
            }
        })
        .collect()
}

/// Orthonormalization of the span of the probe projectors, derived from the
/// eigendecomposition of the Gram matrix. Column `k` of `lift` holds the
/// probe coefficients of the k-th orthonormal operator direction, so
/// `x = lift * w` maps direction weights back to probe coefficients.
#[derive(Debug)]
pub struct ReducedBasis {
    pub lift: Mat<f64>,
    pub rank: usize,
}

/// Relative Gram-eigenvalue cutoff below which directions are treated as
/// numerically absent from the probe span.
const GRAM_RANK_CUTOFF: f64 = 1e-14;

/// An ordered set of coherent projectors with cached state vectors.
#[derive(Debug)]
pub struct ProbeBasis {
    space: HilbertSpec,
    /// One amplitude tuple per element; inner length equals the mode count.
    amplitudes: Vec<Vec<CoherentAmplitude>>,
    /// `dim x M` matrix whose columns are the probe state vectors.
    vectors: CMat,
    gram: OnceLock<Mat<f64>>,
    reduced: OnceLock<ReducedBasis>,
}

impl ProbeBasis {
    /// Builds a basis from explicit per-mode amplitude tuples.
    pub fn new(space: HilbertSpec, amplitudes: Vec<Vec<CoherentAmplitude>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ParamOutOfRange {
                name: "probe_count",
                value: 0.0,
                constraint: "must be at least 1",
            });
        }
        let modes = space.modes() as usize;
        let d = space.truncation();
        let dim = space.dim();
        let mut vectors = Mat::zeros(dim, amplitudes.len());
        for (xi, tuple) in amplitudes.iter().enumerate() {
            if tuple.len() != modes {
                return Err(Error::ModeMismatch {
                    expected: space.modes(),
                    got: tuple.len() as u8,
                });
            }
            let column: Vec<Complex64> = match modes {
                1 => coherent_vector(tuple[0], d)?.vector().to_vec(),
                _ => {
                    let a = coherent_vector(tuple[0], d)?;
                    let b = coherent_vector(tuple[1], d)?;
                    linalg::kron_vec(a.vector(), b.vector())
                }
            };
            for (i, c) in column.into_iter().enumerate() {
                vectors[(i, xi)] = c;
            }
        }
        Ok(Self {
            space,
            amplitudes,
            vectors,
            gram: OnceLock::new(),
            reduced: OnceLock::new(),
        })
    }

    /// Single-mode basis straight from a grid.
    pub fn single_mode(grid: &[CoherentAmplitude], space: HilbertSpec) -> Result<Self> {
        if space.modes() != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: space.modes(),
            });
        }
        Self::new(space, grid.iter().map(|&a| vec![a]).collect())
    }

    /// Two-mode basis containing all ordered pairs of grid amplitudes; for a
    /// square lattice with `N` nodes per axis this yields `M = N^4` probes.
    pub fn tensor_basis(grid: &[CoherentAmplitude], space: HilbertSpec) -> Result<Self> {
        if space.modes() != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                got: space.modes(),
            });
        }
        let mut amplitudes = Vec::with_capacity(grid.len() * grid.len());
        for &a1 in grid {
            for &a2 in grid {
                amplitudes.push(vec![a1, a2]);
            }
        }
        Self::new(space, amplitudes)
    }

    /// Builds the basis a `GridSpec` describes on `space` (per-mode grid,
    /// tensored for two-mode spaces).
    pub fn from_grid(grid: &GridSpec, space: HilbertSpec) -> Result<Self> {
        let amps = grid.amplitudes()?;
        match space.modes() {
            1 => Self::single_mode(&amps, space),
            _ => Self::tensor_basis(&amps, space),
        }
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    /// Number of probe states `M`.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Vec<CoherentAmplitude>] {
        &self.amplitudes
    }

    /// Cached `dim x M` matrix of probe state vectors.
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    /// State vector of probe `xi` as a pure state.
    pub fn state(&self, xi: usize) -> PureState {
        let v: Vec<Complex64> = (0..self.space.dim()).map(|i| self.vectors[(i, xi)]).collect();
        PureState::new(self.space, v).expect("cached probe vectors are unit norm")
    }

    /// Rank-1 projector of probe `xi`.
    pub fn projector(&self, xi: usize) -> DensityMatrix {
        self.state(xi).projector()
    }

    /// `M x M` Gram matrix of the projectors, `G[x][y] = |<v_x|v_y>|^2`.
    /// Computed once and cached.
    pub fn gram(&self) -> &Mat<f64> {
        self.gram.get_or_init(|| {
            let overlaps = self.vectors.adjoint() * &self.vectors;
            let m = self.len();
            Mat::from_fn(m, m, |i, j| overlaps[(i, j)].norm_sqr())
        })
    }

    /// Orthonormalized operator basis of the probe span, cached. Eigenvalue
    /// directions of the Gram below `1e-12` of the largest are dropped; they
    /// are numerical noise and reaching them would need coefficient norms far
    /// beyond any sensible cap.
    pub fn reduced(&self) -> &ReducedBasis {
        self.reduced.get_or_init(|| {
            let g = self.gram();
            let m = self.len();
            let evd = g
                .self_adjoint_eigen(faer::Side::Lower)
                .expect("gram eigendecomposition");
            let s = evd.S().column_vector();
            let vecs = evd.U();
            let vals: Vec<f64> = (0..m).map(|k| s[k]).collect();
            let max = vals.iter().copied().fold(0.0f64, f64::max);
            let keep: Vec<usize> = (0..m)
                .filter(|&k| vals[k] > GRAM_RANK_CUTOFF * max)
                .collect();
            let rank = keep.len();
            let lift = Mat::from_fn(m, rank, |i, kk| {
                let k = keep[kk];
                vecs[(i, k)] / vals[k].sqrt()
            });
            ReducedBasis { lift, rank }
        })
    }

    /// `sum_xi x_xi sigma_xi` as a raw Hermitian matrix (no physicality
    /// post-processing).
    pub fn mixture(&self, coefficients: &[f64]) -> Result<CMat> {
        if coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        let dim = self.space.dim();
        let mut scaled = self.vectors.clone();
        for (xi, &x) in coefficients.iter().enumerate() {
            for i in 0..dim {
                scaled[(i, xi)] *= Complex64::new(x, 0.0);
            }
        }
        let raw = &scaled * self.vectors.adjoint();
        Ok(linalg::hermitize(&raw))
    }

    /// `(A^T S)_xi = Re <v_xi| S |v_xi>` for a Hermitian `S`.
    pub fn project_onto_probes(&self, s: &CMat) -> Vec<f64> {
        let sv = s * &self.vectors;
        let dim = self.space.dim();
        (0..self.len())
            .map(|xi| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    acc += self.vectors[(i, xi)].conj() * sv[(i, xi)];
                }
                acc.re
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_square_lattice_is_origin() {
        let g = square_lattice(1, 0.1);
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].re, g[0].im), (0.0, 0.0));
    }

    #[test]
    fn two_by_two_lattice_is_symmetry_forced() {
        let g = square_lattice(2, 0.2);
        let mut pts: Vec<(f64, f64)> = g.iter().map(|a| (a.re, a.im)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [(-0.1, -0.1), (-0.1, 0.1), (0.1, -0.1), (0.1, 0.1)];
        for (got, want) in pts.iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }
    }

    #[test]
    fn six_by_six_lattice_extremes_and_no_origin() {
        let g = square_lattice(6, 0.15);
        assert_eq!(g.len(), 36);
        let max_re = g.iter().map(|a| a.re).fold(f64::MIN, f64::max);
        let min_re = g.iter().map(|a| a.re).fold(f64::MAX, f64::min);
        assert!((max_re - 0.375).abs() < 1e-12 && (min_re + 0.375).abs() < 1e-12);
        assert!(g.iter().all(|a| a.norm_sqr() > 1e-12), "no node at origin");
    }

    #[test]
    fn square_lattice_is_negation_symmetric() {
        for nodes in [2, 3, 6, 7] {
            let g = square_lattice(nodes, 0.13);
            let mut pts: Vec<(i64, i64)> = g
                .iter()
                .map(|a| ((a.re * 1e12).round() as i64, (a.im * 1e12).round() as i64))
                .collect();
            let mut neg: Vec<(i64, i64)> = pts.iter().map(|&(x, y)| (-x, -y)).collect();
            pts.sort_unstable();
            neg.sort_unstable();
            assert_eq!(pts, neg);
        }
    }

    #[test]
    fn helical_grid_formula() {
        // k = 4, dr = 0.01, dphi = pi/2 -> alpha = 0.04 e^{2 pi i} = 0.04.
        let g = helical_grid(5, 0.01, std::f64::consts::FRAC_PI_2);
        assert!((g[4].re - 0.04).abs() < 1e-15 && g[4].im.abs() < 1e-15);
        assert_eq!((g[0].re, g[0].im), (0.0, 0.0));
    }

    #[test]
    fn helical_grid_paper_parameters() {
        let g = helical_grid(17, 0.016, std::f64::consts::FRAC_PI_4);
        assert_eq!(g.len(), 17);
        let max_r = g.iter().map(|a| a.norm_sqr().sqrt()).fold(f64::MIN, f64::max);
        assert!((max_r - 0.256).abs() < 1e-12);
        // Angles repeat every 8 nodes.
        for k in 0..9 {
            let (a, b) = (g[k], g[k + 8]);
            let (ra, rb) = (a.norm_sqr().sqrt(), b.norm_sqr().sqrt());
            if ra > 0.0 {
                let cross = a.re * b.im - a.im * b.re;
                assert!((cross / (ra * rb)).abs() < 1e-10, "k = {k}");
            }
        }
    }

    #[test]
    fn grid_generators_are_deterministic() {
        let a = square_lattice(5, 0.07);
        let b = square_lattice(5, 0.07);
        assert_eq!(a, b);
        let h1 = helical_grid(9, 0.02, 0.7853981633974483);
        let h2 = helical_grid(9, 0.02, 0.7853981633974483);
        assert_eq!(h1, h2);
    }

    #[test]
    fn tensor_basis_counts() {
        let space = HilbertSpec::two_mode(4).unwrap();
        let grid = square_lattice(2, 0.1);
        let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
        assert_eq!(basis.len(), 16);
        let single = ProbeBasis::tensor_basis(&square_lattice(1, 0.1), space).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn projectors_are_rank_one_trace_one() {
        let space = HilbertSpec::single(8).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(3, 0.12), space).unwrap();
        for xi in 0..basis.len() {
            let p = basis.projector(xi);
            assert!((p.trace() - 1.0).abs() < 1e-12);
            assert!((crate::metrics::purity(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_matches_gaussian_overlap_oracle() {
        let space = HilbertSpec::two_mode(10).unwrap();
        let grid = square_lattice(2, 0.3);
        let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
        let g = basis.gram();
        for xi in 0..basis.len() {
            for eta in 0..basis.len() {
                let mut expect = 1.0;
                for mode in 0..2 {
                    let a = basis.amplitudes()[xi][mode];
                    let b = basis.amplitudes()[eta][mode];
                    let d2 = (a.re - b.re).powi(2) + (a.im - b.im).powi(2);
                    expect *= (-d2).exp();
                }
                assert!((g[(xi, eta)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gram_is_psd() {
        let space = HilbertSpec::single(10).unwrap();
        let basis =
            ProbeBasis::single_mode(&helical_grid(9, 0.03, 0.785398), space).unwrap();
        let g = basis.gram();
        let m = basis.len();
        let cg = Mat::from_fn(m, m, |i, j| Complex64::new(g[(i, j)], 0.0));
        let (vals, _) = linalg::eigh(&cg).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn mixture_matches_projector_sum() {
        let space = HilbertSpec::single(6).unwrap();
        let basis = ProbeBasis::single_mode(&square_lattice(2, 0.2), space).unwrap();
        let x = [0.4, 0.3, 0.2, 0.1];
        let mix = basis.mixture(&x).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let mut want = Complex64::new(0.0, 0.0);
                for (xi, &w) in x.iter().enumerate() {
                    want += basis.projector(xi).entries()[(i, j)] * w;
                }
                assert!((mix[(i, j)] - want).norm() < 1e-13);
            }
        }
    }
}
