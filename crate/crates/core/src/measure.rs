//! Coherent-projection measurement settings, outcome probabilities and
//! seeded finite-copy frequency simulation.

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::fock::{CoherentAmplitude, DensityMatrix, HilbertSpec};
use crate::probe::ProbeBasis;

/// splitmix64 finalizer; the documented mix underlying all seed derivation.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Derives an independent substream seed from a parent seed and an index.
/// Composing calls gives the per-`(probe, setting)` streams:
/// `split_seed(split_seed(master, probe), setting)`.
#[inline]
pub fn split_seed(parent: u64, index: u64) -> u64 {
    mix64(parent.wrapping_add(GOLDEN).wrapping_add(mix64(index.wrapping_add(GOLDEN))))
}

/// A set of measurement settings, one rank-1 coherent projector per setting.
#[derive(Debug)]
pub struct MeasurementSet {
    // Settings reuse the probe-set machinery: same amplitude layout, same
    // cached state vectors.
    inner: ProbeBasis,
}

impl MeasurementSet {
    pub fn new(space: HilbertSpec, settings: Vec<Vec<CoherentAmplitude>>) -> Result<Self> {
        Ok(Self {
            inner: ProbeBasis::new(space, settings)?,
        })
    }

    /// Uses the probe grid itself as the measurement grid (`K = M`).
    pub fn from_basis(basis: &ProbeBasis) -> Result<Self> {
        Ok(Self {
            inner: ProbeBasis::new(basis.space(), basis.amplitudes().to_vec())?,
        })
    }

    pub fn space(&self) -> HilbertSpec {
        self.inner.space()
    }

    /// Number of settings `K`.
    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn settings(&self) -> &[Vec<CoherentAmplitude>] {
        self.inner.amplitudes()
    }

    /// Rank-1 POVM element of setting `j`.
    pub fn projector(&self, j: usize) -> DensityMatrix {
        self.inner.projector(j)
    }

    pub(crate) fn vectors(&self) -> &crate::linalg::CMat {
        self.inner.vectors()
    }
}

/// Kind of values a data pattern holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Probability,
    Frequency,
}

/// Outcome probabilities or finite-copy frequencies across the settings of
/// one measurement set.
#[derive(Debug, Clone)]
pub struct DataPattern {
    values: Vec<f64>,
    kind: PatternKind,
    /// Copies per setting; 0 for exact probabilities.
    n_rep: u64,
}

impl DataPattern {
    pub fn probabilities(values: Vec<f64>) -> Result<Self> {
        Self::validate_range(&values)?;
        Ok(Self {
            values,
            kind: PatternKind::Probability,
            n_rep: 0,
        })
    }

    pub fn frequencies(values: Vec<f64>, n_rep: u64) -> Result<Self> {
        Self::validate_range(&values)?;
        if n_rep < 1 {
            return Err(Error::ParamOutOfRange {
                name: "n_rep",
                value: 0.0,
                constraint: "must be at least 1 for frequency patterns",
            });
        }
        for (j, v) in values.iter().enumerate() {
            let scaled = v * n_rep as f64;
            if (scaled - scaled.round()).abs() > 1e-9 {
                return Err(Error::CsvParse {
                    line: j,
                    reason: format!("frequency {v} is not a multiple of 1/{n_rep}"),
                });
            }
        }
        Ok(Self {
            values,
            kind: PatternKind::Frequency,
            n_rep,
        })
    }

    fn validate_range(values: &[f64]) -> Result<()> {
        for &v in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParamOutOfRange {
                    name: "pattern_value",
                    value: v,
                    constraint: "must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn n_rep(&self) -> u64 {
        self.n_rep
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Exact outcome probabilities `p_j = Tr(Pi_j rho)`, clamped to [0, 1].
pub fn probabilities(rho: &DensityMatrix, meas: &MeasurementSet) -> Result<DataPattern> {
    if rho.space() != meas.space() {
        return Err(Error::DimensionMismatch {
            expected: meas.space().dim(),
            got: rho.dim(),
        });
    }
    let v = meas.vectors();
    let dim = rho.dim();
    let sv = rho.entries() * v;
    let values = (0..meas.len())
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                acc += v[(i, j)].conj() * sv[(i, j)];
            }
            debug_assert!(acc.im.abs() < 1e-12);
            acc.re.clamp(0.0, 1.0)
        })
        .collect();
    DataPattern::probabilities(values)
}

/// Samples a frequency pattern: `f_j = Binomial(n_rep, p_j) / n_rep`, one
/// independent seeded stream per setting (`split_seed(seed, j)`).
pub fn sample_pattern(p: &DataPattern, n_rep: u64, seed: u64) -> Result<DataPattern> {
    if p.kind() != PatternKind::Probability {
        return Err(Error::NotAProbabilityPattern);
    }
    if n_rep < 1 {
        return Err(Error::ParamOutOfRange {
            name: "n_rep",
            value: n_rep as f64,
            constraint: "must be at least 1",
        });
    }
    let values = p
        .values()
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, j as u64));
            let dist = Binomial::new(n_rep, pj).expect("probability already validated");
            dist.sample(&mut rng) as f64 / n_rep as f64
        })
        .collect();
    DataPattern::frequencies(values, n_rep)
}

/// One data pattern per probe state. `n_rep = 0` returns exact probability
/// patterns; otherwise each probe gets the substream `split_seed(seed, xi)`.
pub fn probe_patterns(
    basis: &ProbeBasis,
    meas: &MeasurementSet,
    n_rep: u64,
    seed: u64,
) -> Result<Vec<DataPattern>> {
    let exact = exact_probe_patterns(basis, meas)?;
    if n_rep == 0 {
        return Ok(exact);
    }
    exact
        .iter()
        .enumerate()
        .map(|(xi, p)| sample_pattern(p, n_rep, split_seed(seed, xi as u64)))
        .collect()
}

/// Exact probability patterns of every probe against `meas`, computed as one
/// cross-Gram matrix `|<w_j | v_xi>|^2`.
pub fn exact_probe_patterns(
    basis: &ProbeBasis,
    meas: &MeasurementSet,
) -> Result<Vec<DataPattern>> {
    if basis.space() != meas.space() {
        return Err(Error::DimensionMismatch {
            expected: meas.space().dim(),
            got: basis.space().dim(),
        });
    }
    let cross = meas.vectors().adjoint() * basis.vectors();
    (0..basis.len())
        .map(|xi| {
            let values = (0..meas.len())
                .map(|j| cross[(j, xi)].norm_sqr().clamp(0.0, 1.0))
                .collect();
            DataPattern::probabilities(values)
        })
        .collect()
}

/// Stacks patterns into the `K x M` design matrix used by the pattern fit.
pub fn pattern_matrix(patterns: &[DataPattern]) -> Result<Mat<f64>> {
    let m = patterns.len();
    if m == 0 {
        return Err(Error::PatternMismatch {
            expected: 1,
            got: 0,
        });
    }
    let k = patterns[0].len();
    for p in patterns {
        if p.len() != k {
            return Err(Error::PatternMismatch {
                expected: k,
                got: p.len(),
            });
        }
    }
    Ok(Mat::from_fn(k, m, |j, xi| patterns[xi].values()[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::square_lattice;
    use crate::statespec::named_state;

    fn amp(re: f64, im: f64) -> CoherentAmplitude {
        CoherentAmplitude::new(re, im).unwrap()
    }

    fn single_basis() -> ProbeBasis {
        let space = HilbertSpec::single(12).unwrap();
        ProbeBasis::single_mode(&square_lattice(3, 0.2), space).unwrap()
    }

    #[test]
    fn probability_of_own_setting_is_one() {
        let basis = single_basis();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let rho = basis.projector(4);
        let p = probabilities(&rho, &meas).unwrap();
        assert!((p.values()[4] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_vs_setting_matches_overlap_oracle() {
        let space = HilbertSpec::single(14).unwrap();
        let meas = MeasurementSet::new(space, vec![vec![amp(0.2, -0.1)]]).unwrap();
        let rho = crate::fock::coherent_vector(amp(-0.3, 0.25), 14)
            .unwrap()
            .projector();
        let p = probabilities(&rho, &meas).unwrap();
        let d2 = (0.2f64 - (-0.3)).powi(2) + (-0.1f64 - 0.25).powi(2);
        assert!((p.values()[0] - (-d2).exp()).abs() < 1e-10);
    }

    #[test]
    fn single_photon_never_triggers_vacuum_setting() {
        let space = HilbertSpec::single(10).unwrap();
        let meas = MeasurementSet::new(space, vec![vec![amp(0.0, 0.0)]]).unwrap();
        let rho = named_state("fock:1", space).unwrap();
        let p = probabilities(&rho, &meas).unwrap();
        assert!(p.values()[0] < 1e-14);
    }

    #[test]
    fn degenerate_probabilities_sample_exactly() {
        let p = DataPattern::probabilities(vec![0.0, 1.0]).unwrap();
        for seed in 0..20 {
            let f = sample_pattern(&p, 1000, seed).unwrap();
            assert_eq!(f.values()[0], 0.0);
            assert_eq!(f.values()[1], 1.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = DataPattern::probabilities(vec![0.3, 0.5, 0.9]).unwrap();
        let a = sample_pattern(&p, 10_000, 7).unwrap();
        let b = sample_pattern(&p, 10_000, 7).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_pattern(&p, 10_000, 8).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn binomial_mean_within_five_sigma_at_large_n() {
        let p = DataPattern::probabilities(vec![0.5]).unwrap();
        let n_rep = 1_000_000u64;
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let f = sample_pattern(&p, n_rep, seed).unwrap();
            worst = worst.max((f.values()[0] - 0.5).abs());
        }
        let sigma = (0.25 / n_rep as f64).sqrt();
        assert!(worst <= 5.0 * sigma, "worst deviation {worst:.3e}");
    }

    #[test]
    fn statistical_consistency_over_seed_ensemble() {
        // Mean over 1000 seeds within 4 standard errors for each p.
        let n_rep = 200u64;
        for &p in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            let pattern = DataPattern::probabilities(vec![p]).unwrap();
            let mut sum = 0.0;
            for seed in 0..1000u64 {
                sum += sample_pattern(&pattern, n_rep, seed).unwrap().values()[0];
            }
            let mean = sum / 1000.0;
            let se = (p * (1.0 - p) / n_rep as f64 / 1000.0).sqrt();
            assert!(
                (mean - p).abs() <= 4.0 * se + 1e-15,
                "p = {p}, mean = {mean}"
            );
        }
    }

    #[test]
    fn exact_probe_patterns_match_gram_rows() {
        let basis = single_basis();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let patterns = exact_probe_patterns(&basis, &meas).unwrap();
        assert_eq!(patterns.len(), basis.len());
        let g = basis.gram();
        for (xi, p) in patterns.iter().enumerate() {
            for j in 0..meas.len() {
                assert!((p.values()[j] - g[(j, xi)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn probe_patterns_exact_mode_convention() {
        let basis = single_basis();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let pats = probe_patterns(&basis, &meas, 0, 123).unwrap();
        assert_eq!(pats.len(), basis.len());
        assert!(pats.iter().all(|p| p.kind() == PatternKind::Probability));
    }

    #[test]
    fn two_mode_exact_pattern_is_product_of_overlaps() {
        let space = HilbertSpec::two_mode(10).unwrap();
        let grid = square_lattice(2, 0.25);
        let basis = ProbeBasis::tensor_basis(&grid, space).unwrap();
        let meas = MeasurementSet::from_basis(&basis).unwrap();
        let pats = exact_probe_patterns(&basis, &meas).unwrap();
        for xi in 0..basis.len() {
            for j in 0..meas.len() {
                let mut expect = 1.0;
                for mode in 0..2 {
                    let a = basis.amplitudes()[xi][mode];
                    let b = meas.settings()[j][mode];
                    expect *= (-((a.re - b.re).powi(2) + (a.im - b.im).powi(2))).exp();
                }
                assert!((pats[xi].values()[j] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn frequency_pattern_validates_integrality() {
        assert!(DataPattern::frequencies(vec![0.5], 10).is_ok());
        assert!(DataPattern::frequencies(vec![0.123456], 10).is_err());
        assert!(DataPattern::frequencies(vec![0.5], 0).is_err());
        assert!(DataPattern::probabilities(vec![1.2]).is_err());
    }
}
