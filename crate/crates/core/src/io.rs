//! CSV serialization for density matrices, data patterns and fit results.
//!
//! Density matrix layout:
//! ```text
//! dim,modes,truncation
//! 4,1,4
//! re00,im00,re01,im01,...
//! ...
//! ```
//! One matrix row per line, entries as interleaved `re,im` pairs in row-major
//! order. Floats use the shortest round-trip representation, so write/read
//! is lossless.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertSpec};
use crate::measure::{DataPattern, PatternKind};
use crate::solver::FitResult;

pub fn write_density_csv(rho: &DensityMatrix) -> String {
    let space = rho.space();
    let n = rho.dim();
    let mut out = String::new();
    out.push_str("dim,modes,truncation\n");
    let _ = writeln!(out, "{},{},{}", n, space.modes(), space.truncation());
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            let e = rho.entries()[(i, j)];
            let _ = write!(out, "{},{}", e.re, e.im);
        }
        out.push('\n');
    }
    out
}

/// Parses a density matrix in the layout produced by [`write_density_csv`],
/// validating every type invariant. Never panics on malformed input.
pub fn read_density_csv(text: &str) -> Result<DensityMatrix> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, reason: String| Error::CsvParse {
        line: line + 1,
        reason,
    };
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty input".into()))?;
    if header.trim() != "dim,modes,truncation" {
        return Err(parse_err(hline, "expected header `dim,modes,truncation`".into()));
    }
    let (vline, values) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header values".into()))?;
    let fields: Vec<&str> = values.trim().split(',').collect();
    if fields.len() != 3 {
        return Err(parse_err(vline, "expected `dim,modes,truncation` values".into()));
    }
    let dim: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(vline, format!("bad dim `{}`", fields[0])))?;
    let modes: u8 = fields[1]
        .parse()
        .map_err(|_| parse_err(vline, format!("bad modes `{}`", fields[1])))?;
    let truncation: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(vline, format!("bad truncation `{}`", fields[2])))?;
    let space = HilbertSpec::new(modes, truncation)?;
    if space.dim() != dim {
        return Err(parse_err(
            vline,
            format!("dim {dim} inconsistent with {modes} modes x {truncation} levels"),
        ));
    }
    if dim > 4096 {
        return Err(parse_err(vline, format!("dim {dim} unreasonably large")));
    }
    let mut entries = Mat::zeros(dim, dim);
    let mut row = 0usize;
    for (lno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if row >= dim {
            return Err(parse_err(lno, format!("more than {dim} matrix rows")));
        }
        let nums: Vec<&str> = line.split(',').collect();
        if nums.len() != 2 * dim {
            return Err(parse_err(
                lno,
                format!("expected {} values, got {}", 2 * dim, nums.len()),
            ));
        }
        for j in 0..dim {
            let re: f64 = nums[2 * j]
                .trim()
                .parse()
                .map_err(|_| parse_err(lno, format!("bad float `{}`", nums[2 * j])))?;
            let im: f64 = nums[2 * j + 1]
                .trim()
                .parse()
                .map_err(|_| parse_err(lno, format!("bad float `{}`", nums[2 * j + 1])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(parse_err(lno, "non-finite entry".into()));
            }
            entries[(row, j)] = Complex64::new(re, im);
        }
        row += 1;
    }
    if row != dim {
        return Err(Error::CsvParse {
            line: 0,
            reason: format!("expected {dim} matrix rows, got {row}"),
        });
    }
    DensityMatrix::new(space, entries)
}

pub fn write_pattern_csv(pattern: &DataPattern, seed: u64) -> String {
    let mut out = String::new();
    out.push_str("kind,n_rep,seed\n");
    let kind = match pattern.kind() {
        PatternKind::Probability => "probability",
        PatternKind::Frequency => "frequency",
    };
    let _ = writeln!(out, "{},{},{}", kind, pattern.n_rep(), seed);
    out.push_str("j,value\n");
    for (j, v) in pattern.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", j, v);
    }
    out
}

pub fn write_fit_csv(fit: &FitResult) -> String {
    let mut out = String::new();
    out.push_str("objective,iterations,converged,constraint_violation\n");
    let _ = writeln!(
        out,
        "{},{},{},{}",
        fit.objective, fit.iterations, fit.converged, fit.constraint_violation
    );
    out.push_str("xi,x\n");
    for (xi, x) in fit.coefficients.iter().enumerate() {
        let _ = writeln!(out, "{},{}", xi, x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespec::named_state;

    #[test]
    fn density_csv_round_trip_is_lossless() {
        let space = HilbertSpec::two_mode(3).unwrap();
        let rho = named_state("bell_mix:p=0.3", space).unwrap();
        let text = write_density_csv(&rho);
        let back = read_density_csv(&text).unwrap();
        assert_eq!(back.space(), space);
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                assert_eq!(back.entries()[(i, j)], rho.entries()[(i, j)]);
            }
        }
    }

    #[test]
    fn density_csv_rejects_malformed_input() {
        for text in [
            "",
            "nope\n",
            "dim,modes,truncation\n",
            "dim,modes,truncation\n4,1\n",
            "dim,modes,truncation\n5,1,4\n",
            "dim,modes,truncation\n4,3,4\n",
            "dim,modes,truncation\n2,1,2\n1,0\n",
            "dim,modes,truncation\n2,1,2\n1,0,0,x\n0,0,0,0\n",
            "dim,modes,truncation\n2,1,2\n1,0,0,0\n",
            // Valid shape, unphysical values.
            "dim,modes,truncation\n2,1,2\n2,0,0,0\n0,0,0,0\n",
        ] {
            assert!(read_density_csv(text).is_err(), "should reject: {text:?}");
        }
    }

    #[test]
    fn pattern_csv_layout() {
        let p = DataPattern::probabilities(vec![0.25, 1.0]).unwrap();
        let text = write_pattern_csv(&p, 9);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,n_rep,seed");
        assert_eq!(lines[1], "probability,0,9");
        assert_eq!(lines[2], "j,value");
        assert_eq!(lines[3], "0,0.25");
        assert_eq!(lines[4], "1,1");
    }
}
