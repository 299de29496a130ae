//! States and operators on truncated single- and two-mode Fock spaces.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-one tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor below which a matrix stops being accepted as PSD.
pub const PSD_EIG_FLOOR: f64 = 1e-10;
/// Tail mass above which a coherent amplitude is rejected for a truncation.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;

/// Complex amplitude of a coherent state, in dimensionless quadrature units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude {
    pub re: f64,
    pub im: f64,
}

impl CoherentAmplitude {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::NonFiniteAmplitude);
        }
        Ok(Self { re, im })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

/// Truncated Hilbert space: 1 or 2 modes, `truncation` Fock levels per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    modes: u8,
    truncation: usize,
}

impl HilbertSpec {
    pub fn new(modes: u8, truncation: usize) -> Result<Self> {
        if modes != 1 && modes != 2 {
            return Err(Error::ModesOutOfRange(modes));
        }
        if truncation < 2 {
            return Err(Error::TruncationTooSmall(truncation));
        }
        Ok(Self { modes, truncation })
    }

    pub fn single(truncation: usize) -> Result<Self> {
        Self::new(1, truncation)
    }

    pub fn two_mode(truncation: usize) -> Result<Self> {
        Self::new(2, truncation)
    }

    pub fn modes(&self) -> u8 {
        self.modes
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Total dimension `D^modes`.
    pub fn dim(&self) -> usize {
        match self.modes {
            1 => self.truncation,
            _ => self.truncation * self.truncation,
        }
    }

    /// Composite row-major index of `(n1, n2)` in a two-mode space.
    pub fn composite(&self, n1: usize, n2: usize) -> usize {
        n1 * self.truncation + n2
    }
}

/// Normalized pure state vector on a truncated space.
#[derive(Debug, Clone)]
pub struct PureState {
    space: HilbertSpec,
    vector: Vec<Complex64>,
}

impl PureState {
    /// Wraps and normalizes a vector; rejects zero vectors.
    pub fn new(space: HilbertSpec, mut vector: Vec<Complex64>) -> Result<Self> {
        if vector.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: vector.len(),
            });
        }
        let norm_sqr: f64 = vector.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(Error::NonFiniteAmplitude);
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for c in &mut vector {
            *c *= inv;
        }
        Ok(Self { space, vector })
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: other.space.dim(),
            });
        }
        Ok(self
            .vector
            .iter()
            .zip(&other.vector)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Rank-1 projector onto this state.
    pub fn projector(&self) -> DensityMatrix {
        let n = self.vector.len();
        let entries = Mat::from_fn(n, n, |i, j| self.vector[i] * self.vector[j].conj());
        DensityMatrix {
            space: self.space,
            entries,
        }
    }

    /// Tensor product of two single-mode states, row-major composite index.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.space.modes() != 1 || other.space.modes() != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: self.space.modes().max(other.space.modes()),
            });
        }
        if self.space.truncation() != other.space.truncation() {
            return Err(Error::DimensionMismatch {
                expected: self.space.truncation(),
                got: other.space.truncation(),
            });
        }
        let space = HilbertSpec::two_mode(self.space.truncation())?;
        PureState::new(space, linalg::kron_vec(&self.vector, &other.vector))
    }
}

/// Hermitian, trace-one, positive semidefinite matrix on a truncated space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: HilbertSpec,
    entries: CMat,
}

impl DensityMatrix {
    /// Validates all type invariants (Hermiticity, unit trace, PSD floor).
    pub fn new(space: HilbertSpec, entries: CMat) -> Result<Self> {
        let n = space.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: entries.nrows().max(entries.ncols()),
            });
        }
        let asym = linalg::max_asymmetry(&entries);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let entries = linalg::hermitize(&entries);
        let tr = linalg::trace(&entries).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let (vals, _) = linalg::eigh(&entries)?;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_EIG_FLOOR {
            return Err(Error::UnphysicalState {
                min_eigenvalue: min,
            });
        }
        Ok(Self { space, entries })
    }

    /// Builds a physical state from an arbitrary Hermitian matrix by clipping
    /// negative eigenvalues to zero and renormalizing the trace. Returns the
    /// state together with the smallest pre-clipping eigenvalue.
    pub fn from_clipped(space: HilbertSpec, raw: &CMat) -> Result<(Self, f64)> {
        let n = space.dim();
        if raw.nrows() != n || raw.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: raw.nrows().max(raw.ncols()),
            });
        }
        let herm = linalg::hermitize(raw);
        let (vals, vecs) = linalg::eigh(&herm)?;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let clipped_trace: f64 = vals.iter().map(|l| l.max(0.0)).sum();
        if !(clipped_trace > 1e-12) {
            return Err(Error::UnphysicalState {
                min_eigenvalue: min,
            });
        }
        let entries = linalg::from_eigh(&vals, &vecs, |l| l.max(0.0) / clipped_trace);
        Ok((Self { space, entries }, min))
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    /// Smallest eigenvalue; the validated invariant keeps it above `-1e-10`.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = linalg::eigh(&self.entries)?;
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Fock expansion of a coherent state, truncated to `truncation` levels and
/// renormalized. Coefficients follow `c_n = e^{-|a|^2/2} a^n / sqrt(n!)`.
///
/// Rejects amplitudes whose truncated tail mass exceeds `1e-8`: the truncated
/// vector would stop being a faithful stand-in for the physical state.
pub fn coherent_vector(alpha: CoherentAmplitude, truncation: usize) -> Result<PureState> {
    if truncation < 2 {
        return Err(Error::TruncationTooSmall(truncation));
    }
    let a = alpha.to_complex();
    let amp_sqr = alpha.norm_sqr();
    let space = HilbertSpec::single(truncation)?;
    let mut coeffs = Vec::with_capacity(truncation);
    let mut c = Complex64::new((-amp_sqr / 2.0).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..truncation {
        if n > 0 {
            c *= a / (n as f64).sqrt();
        }
        coeffs.push(c);
        mass += c.norm_sqr();
    }
    let tail = 1.0 - mass;
    if !(tail <= TAIL_MASS_LIMIT) {
        return Err(Error::TruncationInadequate {
            amp_sqr,
            truncation,
            tail,
        });
    }
    PureState::new(space, coeffs)
}

/// Tensor product of two single-mode density matrices with row-major
/// composite index `(n1, n2) -> n1 * D + n2`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    if a.space().modes() != 1 || b.space().modes() != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            got: a.space().modes().max(b.space().modes()),
        });
    }
    if a.space().truncation() != b.space().truncation() {
        return Err(Error::DimensionMismatch {
            expected: a.space().truncation(),
            got: b.space().truncation(),
        });
    }
    let space = HilbertSpec::two_mode(a.space().truncation())?;
    let entries = linalg::kron(a.entries(), b.entries());
    Ok(DensityMatrix { space, entries })
}

/// Partial transpose over the second mode:
/// `A'[(n1,n2),(m1,m2)] = A[(n1,m2),(m1,n2)]`.
///
/// The result is Hermitian and trace-preserving but in general not PSD, so it
/// is returned as a plain matrix.
pub fn partial_transpose(rho: &DensityMatrix) -> Result<CMat> {
    partial_transpose_raw(rho.space(), rho.entries())
}

pub(crate) fn partial_transpose_raw(space: HilbertSpec, mat: &CMat) -> Result<CMat> {
    if space.modes() != 2 {
        return Err(Error::TwoModeRequired);
    }
    let d = space.truncation();
    Ok(Mat::from_fn(space.dim(), space.dim(), |i, j| {
        let (n1, n2) = (i / d, i % d);
        let (m1, m2) = (j / d, j % d);
        mat[(space.composite(n1, m2), space.composite(m1, n2))]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    fn amp(re: f64, im: f64) -> CoherentAmplitude {
        CoherentAmplitude::new(re, im).unwrap()
    }

    #[test]
    fn vacuum_coherent_vector() {
        let v = coherent_vector(amp(0.0, 0.0), 10).unwrap();
        assert!((v.vector()[0].re - 1.0).abs() < 1e-15);
        for c in &v.vector()[1..] {
            assert_eq!(c.norm_sqr(), 0.0);
        }
    }

    #[test]
    fn coherent_vector_closed_form_coefficients() {
        // c_0 = e^{-0.125}, c_1/c_0 = 0.5 for alpha = 0.5, D = 12.
        let v = coherent_vector(amp(0.5, 0.0), 12).unwrap();
        let c0 = v.vector()[0];
        assert!((c0.re - (-0.125f64).exp()).abs() < 1e-10);
        assert!(c0.im.abs() < 1e-15);
        let ratio = v.vector()[1] / c0;
        assert!((ratio.re - 0.5).abs() < 1e-12 && ratio.im.abs() < 1e-15);
    }

    #[test]
    fn coherent_overlap_matches_gaussian_oracle() {
        // |<b|a>|^2 = e^{-|a-b|^2} for truncated vectors at D = 16.
        let a = coherent_vector(amp(0.5, 0.0), 16).unwrap();
        let b = coherent_vector(amp(-0.5, 0.0), 16).unwrap();
        let got = a.overlap(&b).unwrap().norm_sqr();
        assert!((got - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn renormalization_correction_small_in_operating_regime() {
        // At the amplitudes the probe grids use (|alpha| <= 0.85 at D >= 10),
        // the pre-renormalization norm defect stays below 1e-10 only well
        // inside the truncation; check the documented D = 12, |alpha| <= 0.5
        // regime directly from the series.
        for &re in &[0.0f64, 0.25, 0.5] {
            let amp_sqr = re * re;
            let mut mass = 0.0f64;
            let mut term = (-amp_sqr).exp();
            for n in 0..12 {
                if n > 0 {
                    term *= amp_sqr / n as f64;
                }
                mass += term;
            }
            assert!((1.0 - mass.sqrt()).abs() < 1e-10, "re = {re}");
        }
    }

    #[test]
    fn rejects_inadequate_truncation() {
        assert!(matches!(
            coherent_vector(amp(2.0, 0.0), 4),
            Err(Error::TruncationInadequate { .. })
        ));
    }

    #[test]
    fn tensor_of_vacua_is_00_projector() {
        let space = HilbertSpec::single(4).unwrap();
        let vac = coherent_vector(amp(0.0, 0.0), 4).unwrap().projector();
        let prod = tensor(&vac, &vac).unwrap();
        assert_eq!(prod.space(), HilbertSpec::two_mode(4).unwrap());
        assert!((prod.entries()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((prod.trace() - 1.0).abs() < 1e-12);
        let _ = space;
    }

    #[test]
    fn tensor_preserves_trace() {
        let a = coherent_vector(amp(0.3, 0.1), 8).unwrap().projector();
        let b = coherent_vector(amp(-0.2, 0.4), 8).unwrap().projector();
        let prod = tensor(&a, &b).unwrap();
        assert!((prod.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution_and_trace_preserving() {
        let a = coherent_vector(amp(0.3, 0.0), 8).unwrap();
        let b = coherent_vector(amp(0.0, 0.2), 8).unwrap();
        let rho = a.tensor(&b).unwrap().projector();
        let pt = partial_transpose(&rho).unwrap();
        assert!((linalg::trace(&pt).re - 1.0).abs() < 1e-12);
        assert!(linalg::max_asymmetry(&pt) < 1e-14);
        let back = partial_transpose_raw(rho.space(), &pt).unwrap();
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                assert!((back[(i, j)] - rho.entries()[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_transpose_of_product_state_stays_psd() {
        let a = coherent_vector(amp(0.4, 0.1), 8).unwrap().projector();
        let b = coherent_vector(amp(-0.3, 0.2), 8).unwrap().projector();
        let rho = tensor(&a, &b).unwrap();
        let pt = partial_transpose(&rho).unwrap();
        let (vals, _) = linalg::eigh(&pt).unwrap();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10);
    }

    #[test]
    fn bell_state_partial_transpose_min_eigenvalue() {
        // For (|01> + |10>)/sqrt(2) the 4x4 block in the {00,01,10,11}
        // subspace gives eigenvalues {1/2, 1/2, 1/2, -1/2}.
        let space = HilbertSpec::two_mode(4).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); space.dim()];
        v[space.composite(0, 1)] = Complex64::new(1.0, 0.0);
        v[space.composite(1, 0)] = Complex64::new(1.0, 0.0);
        let rho = PureState::new(space, v).unwrap().projector();
        let pt = partial_transpose(&rho).unwrap();
        let (vals, _) = linalg::eigh(&pt).unwrap();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min + 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation_rejects_bad_inputs() {
        let space = HilbertSpec::single(2).unwrap();
        // Non-unit trace.
        let m = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(matches!(
            DensityMatrix::new(space, m),
            Err(Error::TraceNotOne { .. })
        ));
        // Negative eigenvalue.
        let m = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new(if i == 0 { 1.5 } else { -0.5 }, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(matches!(
            DensityMatrix::new(space, m),
            Err(Error::UnphysicalState { .. })
        ));
    }

    #[test]
    fn from_clipped_renormalizes() {
        let space = HilbertSpec::single(2).unwrap();
        let m = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new(if i == 0 { 1.2 } else { -0.1 }, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (rho, min) = DensityMatrix::from_clipped(space, &m).unwrap();
        assert!((min + 0.1).abs() < 1e-14);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() >= 0.0);
    }

    #[test]
    fn fidelity_multiplicative_under_tensor() {
        let a = coherent_vector(amp(0.3, 0.0), 8).unwrap().projector();
        let a2 = coherent_vector(amp(0.1, 0.2), 8).unwrap().projector();
        let b = coherent_vector(amp(-0.2, 0.1), 8).unwrap().projector();
        let b2 = coherent_vector(amp(0.0, -0.3), 8).unwrap().projector();
        let lhs = metrics::fidelity(&tensor(&a, &b).unwrap(), &tensor(&a2, &b2).unwrap()).unwrap();
        let rhs = metrics::fidelity(&a, &a2).unwrap() * metrics::fidelity(&b, &b2).unwrap();
        assert!((lhs - rhs).abs() < 1e-8);
    }
}
