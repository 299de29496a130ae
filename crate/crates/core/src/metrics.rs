//! Quality metrics over density matrices.

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::linalg;

/// Eigenvalues below this bound make fidelity inputs count as unphysical.
const FIDELITY_NEG_FLOOR: f64 = 1e-8;

/// Summary of how well an approximation matches a reference state.
#[derive(Debug, Clone, Copy)]
pub struct MetricReport {
    /// Uhlmann fidelity between reference and approximation, in [0, 1].
    pub fidelity: f64,
    /// Purity of the approximation, in (0, 1].
    pub purity: f64,
    /// Hilbert-Schmidt distance between the two states.
    pub hs_distance: f64,
    /// Smallest eigenvalue of the approximation.
    pub min_eigenvalue: f64,
}

impl MetricReport {
    pub fn compare(reference: &DensityMatrix, approx: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            fidelity: fidelity(reference, approx)?,
            purity: purity(approx),
            hs_distance: hs_distance(reference, approx)?,
            min_eigenvalue: approx.min_eigenvalue()?,
        })
    }
}

/// Uhlmann fidelity `Tr sqrt(sqrt(a) b sqrt(a))`, computed by Hermitian
/// eigendecomposition and clamped to [0, 1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.space() != b.space() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    linalg::uhlmann_fidelity(a.entries(), b.entries(), FIDELITY_NEG_FLOOR)
}

/// Purity `Tr(rho^2)`; equals the Frobenius norm squared for Hermitian input.
pub fn purity(rho: &DensityMatrix) -> f64 {
    linalg::frob_norm_sqr(rho.entries())
}

/// Hilbert-Schmidt distance `sqrt(Tr[(a-b)^H (a-b)])`.
pub fn hs_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.space() != b.space() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut acc = 0.0;
    let n = a.dim();
    for j in 0..n {
        for i in 0..n {
            acc += (a.entries()[(i, j)] - b.entries()[(i, j)]).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_vector, CoherentAmplitude, HilbertSpec};
    use crate::statespec::named_state;

    fn amp(re: f64, im: f64) -> CoherentAmplitude {
        CoherentAmplitude::new(re, im).unwrap()
    }

    #[test]
    fn self_fidelity_is_one() {
        let rho = named_state("mix01:p=0.37", HilbertSpec::single(8).unwrap()).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_pure_states_have_zero_fidelity() {
        let space = HilbertSpec::single(6).unwrap();
        let f0 = named_state("fock:0", space).unwrap();
        let f1 = named_state("fock:1", space).unwrap();
        assert!(fidelity(&f0, &f1).unwrap() < 1e-12);
        assert!((hs_distance(&f0, &f1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pure_vs_mixed_closed_form() {
        // F(|0><0|, p|0><0| + (1-p)|1><1|) = sqrt(p); p = 0.49 -> 0.7.
        let space = HilbertSpec::single(8).unwrap();
        let pure = named_state("fock:0", space).unwrap();
        let mixed = named_state("mix01:p=0.49", space).unwrap();
        assert!((fidelity(&pure, &mixed).unwrap() - 0.7).abs() < 1e-10);
    }

    #[test]
    fn purity_closed_forms() {
        let space = HilbertSpec::single(10).unwrap();
        let pure = named_state("even_cat:0.5", space).unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-10);
        let half = named_state("mix01:p=0.5", space).unwrap();
        assert!((purity(&half) - 0.5).abs() < 1e-12);
        let mixed = named_state("mix01:p=0.3", space).unwrap();
        assert!((purity(&mixed) - 0.58).abs() < 1e-12);
    }

    #[test]
    fn purity_matches_eigenvalue_route() {
        let rho = named_state("mix01:p=0.2", HilbertSpec::single(6).unwrap()).unwrap();
        let (vals, _) = crate::linalg::eigh(rho.entries()).unwrap();
        let via_eigs: f64 = vals.iter().map(|l| l * l).sum();
        assert!((purity(&rho) - via_eigs).abs() < 1e-12);
    }

    #[test]
    fn fidelity_symmetry_on_sample_pairs() {
        let space = HilbertSpec::single(10).unwrap();
        let a = named_state("mix01:p=0.3", space).unwrap();
        let b = coherent_vector(amp(0.4, 0.2), 10).unwrap().projector();
        let f_ab = fidelity(&a, &b).unwrap();
        let f_ba = fidelity(&b, &a).unwrap();
        assert!((f_ab - f_ba).abs() < 1e-9);
    }

    #[test]
    fn hs_distance_zero_iff_fidelity_one() {
        let space = HilbertSpec::single(8).unwrap();
        let a = named_state("even_cat:0.5", space).unwrap();
        assert!(hs_distance(&a, &a).unwrap() < 1e-14);
        let b = named_state("coherent:0.5", space).unwrap();
        let f = fidelity(&a, &b).unwrap();
        let d = hs_distance(&a, &b).unwrap();
        assert!(f < 1.0 - 1e-6 && d > 1e-6);
    }
}
