//! Entanglement detection for two-mode states: partial-transpose spectra,
//! decomposable witness operators and negativity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{partial_transpose, DensityMatrix};
use crate::linalg::{self, CMat};

/// Trace values above this (in absolute value) count as genuine negativity
/// rather than numerical noise.
pub const DETECTION_TOL: f64 = 1e-8;

/// A witness operator together with its evaluation on the state it was
/// built from.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    /// Hermitian, trace-one witness operator.
    pub witness: CMat,
    /// `Tr(W rho)` for the state the witness was built from.
    pub trace_value: f64,
    /// Smallest eigenvalue of the partial transpose of that state.
    pub min_pt_eigenvalue: f64,
    /// True when the trace certifies entanglement.
    pub detected: bool,
}

/// Builds the decomposable witness from the most negative eigenvector of the
/// partial transpose: `W = (|eta><eta|)^{T2}`, so `Tr(W rho) = lambda_min`.
pub fn build_witness(rho: &DensityMatrix) -> Result<WitnessReport> {
    let pt = partial_transpose(rho)?;
    let (vals, vecs) = linalg::eigh(&pt)?;
    let mut k_min = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v < vals[k_min] {
            k_min = k;
        }
    }
    let min_pt_eigenvalue = vals[k_min];
    let n = pt.nrows();
    let eta: Vec<Complex64> = (0..n).map(|i| vecs[(i, k_min)]).collect();
    let projector = faer::Mat::from_fn(n, n, |i, j| eta[i] * eta[j].conj());
    let witness = crate::fock::partial_transpose_raw(rho.space(), &projector)?;
    let trace_value = evaluate_witness(&witness, rho)?;
    Ok(WitnessReport {
        witness,
        trace_value,
        min_pt_eigenvalue,
        detected: trace_value < -DETECTION_TOL,
    })
}

/// `Re Tr(W rho)` for a Hermitian witness.
pub fn evaluate_witness(witness: &CMat, rho: &DensityMatrix) -> Result<f64> {
    if witness.nrows() != rho.dim() || witness.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: witness.nrows().max(witness.ncols()),
        });
    }
    // Tr(W rho) = sum_ij W[i,j] rho[j,i]; both Hermitian so the trace is real.
    let n = rho.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += witness[(i, j)] * rho.entries()[(j, i)];
        }
    }
    debug_assert!(acc.im.abs() <= 1e-10);
    Ok(acc.re)
}

/// Sum of the absolute values of the negative partial-transpose eigenvalues;
/// zero for PPT states.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose(rho)?;
    let (vals, _) = linalg::eigh(&pt)?;
    Ok(vals.iter().filter(|v| **v < 0.0).map(|v| -v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{tensor, HilbertSpec};
    use crate::statespec::named_state;

    fn two_mode(d: usize) -> HilbertSpec {
        HilbertSpec::two_mode(d).unwrap()
    }

    #[test]
    fn product_state_is_not_detected() {
        let space = HilbertSpec::single(4).unwrap();
        let vac = named_state("fock:0", space).unwrap();
        let one = named_state("fock:1", space).unwrap();
        let rho = tensor(&vac, &one).unwrap();
        let report = build_witness(&rho).unwrap();
        assert!(!report.detected);
        assert!(report.min_pt_eigenvalue >= -1e-10);
        assert!(negativity(&rho).unwrap() < 1e-9);
    }

    #[test]
    fn bell_states_give_minus_half() {
        for spec in ["bell_psi", "bell_phi"] {
            let rho = named_state(spec, two_mode(4)).unwrap();
            let report = build_witness(&rho).unwrap();
            assert!((report.trace_value + 0.5).abs() < 1e-10, "{spec}");
            assert!((report.min_pt_eigenvalue + 0.5).abs() < 1e-10);
            assert!(report.detected);
            assert!((negativity(&rho).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn witness_is_hermitian_trace_one() {
        let rho = named_state("entangled_cat:0.5", two_mode(8)).unwrap();
        let report = build_witness(&rho).unwrap();
        assert!(linalg::max_asymmetry(&report.witness) < 1e-12);
        assert!((linalg::trace(&report.witness).re - 1.0).abs() < 1e-10);
        assert!(report.detected);
    }

    #[test]
    fn construction_identity() {
        let rho = named_state("bell_mix:p=0.2", two_mode(4)).unwrap();
        let report = build_witness(&rho).unwrap();
        let direct = evaluate_witness(&report.witness, &rho).unwrap();
        assert!((direct - report.min_pt_eigenvalue).abs() < 1e-12);
    }

    #[test]
    fn witness_trace_is_linear_in_the_state() {
        let space = two_mode(4);
        let rho1 = named_state("bell_psi", space).unwrap();
        let rho2 = named_state("bell_phi", space).unwrap();
        let w = build_witness(&rho1).unwrap().witness;
        let a = 0.3;
        let blended = faer::Mat::from_fn(space.dim(), space.dim(), |i, j| {
            a * rho1.entries()[(i, j)] + (1.0 - a) * rho2.entries()[(i, j)]
        });
        let mix = DensityMatrix::new(space, blended).unwrap();
        let lhs = evaluate_witness(&w, &mix).unwrap();
        let rhs = a * evaluate_witness(&w, &rho1).unwrap()
            + (1.0 - a) * evaluate_witness(&w, &rho2).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn negativity_decreases_when_mixing_toward_separable() {
        let space = two_mode(4);
        let mut last = f64::INFINITY;
        for p in [0.0, 0.2, 0.4] {
            // bell_psi mixed with bell_phi crosses toward lower negativity as
            // the mixture becomes more balanced.
            let rho = named_state(&format!("bell_mix:p={p}"), space).unwrap();
            let neg = negativity(&rho).unwrap();
            assert!(neg <= last + 1e-12);
            last = neg;
        }
    }

    #[test]
    fn single_mode_input_is_rejected() {
        let rho = named_state("fock:1", HilbertSpec::single(4).unwrap()).unwrap();
        assert!(build_witness(&rho).is_err());
        assert!(negativity(&rho).is_err());
    }
}
