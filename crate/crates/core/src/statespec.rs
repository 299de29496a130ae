//! Text format for the built-in signal state families.
//!
//! A spec is `name` or `name:param`, e.g. `fock:1`, `coherent:0.5`,
//! `coherent:0.3-0.2i`, `even_cat:0.5`, `superpos01`, `mix01:p=0.3`,
//! `entangled_cat:0.5`, `bell_psi`, `bell_phi`, `bell_mix:p=0.25`.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherent_vector, CoherentAmplitude, DensityMatrix, HilbertSpec, PureState};

/// Parsed state family.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// `fock:n` - photon number state |n><n|.
    Fock(usize),
    /// `coherent:a` - coherent projector with complex amplitude `a`.
    Coherent(CoherentAmplitude),
    /// `even_cat:a` - normalized |a> + |-a| superposition, real `a`.
    EvenCat(f64),
    /// `superpos01` - (|0> + |1>)/sqrt(2).
    Superpos01,
    /// `mix01:p=..` - p|0><0| + (1-p)|1><1|.
    Mix01 { p: f64 },
    /// `entangled_cat:a` - normalized |a>|-a> + |-a>|a>, real `a`.
    EntangledCat(f64),
    /// `bell_psi` - (|01> + |10>)/sqrt(2).
    BellPsi,
    /// `bell_phi` - (|00> + |11>)/sqrt(2).
    BellPhi,
    /// `bell_mix:p=..` - (1-p)|psi+><psi+| + p|phi+><phi+|.
    BellMix { p: f64 },
}

fn bad(spec: &str, reason: impl Into<String>) -> Error {
    Error::InvalidStateSpec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

/// Parses `1`, `-0.5`, `0.3+0.2i`, `0.3-0.2i`, `0.5i`.
fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        // Split into real and imaginary parts at the last +/- that is not an
        // exponent sign and not the leading sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().ok()?;
                let im_str = &body[k..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().ok()?
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() { 1.0 } else { body.parse().ok()? };
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        s.parse().ok().map(|re| Complex64::new(re, 0.0))
    }
}

fn parse_p(spec: &str, param: &str) -> Result<f64> {
    let body = param
        .strip_prefix("p=")
        .ok_or_else(|| bad(spec, "expected parameter of the form p=<value>"))?;
    let p: f64 = body
        .parse()
        .map_err(|_| bad(spec, format!("cannot parse `{body}` as a number")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParamOutOfRange {
            name: "p",
            value: p,
            constraint: "must lie in [0, 1]",
        });
    }
    Ok(p)
}

fn parse_real_amplitude(spec: &str, param: &str) -> Result<f64> {
    let a: f64 = param
        .parse()
        .map_err(|_| bad(spec, format!("cannot parse `{param}` as a number")))?;
    if !a.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    if a <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "amplitude",
            value: a,
            constraint: "must be positive",
        });
    }
    Ok(a)
}

impl StateSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec, None),
        };
        fn want_param<'a>(spec: &str, p: Option<&'a str>) -> Result<&'a str> {
            p.filter(|s| !s.is_empty())
                .ok_or_else(|| bad(spec, "missing parameter"))
        }
        match name {
            "fock" => {
                let p = want_param(spec, param)?;
                let n: usize = p
                    .parse()
                    .map_err(|_| bad(spec, format!("cannot parse `{p}` as a photon number")))?;
                Ok(StateSpec::Fock(n))
            }
            "coherent" => {
                let p = want_param(spec, param)?;
                let a = parse_complex(p)
                    .ok_or_else(|| bad(spec, format!("cannot parse `{p}` as an amplitude")))?;
                Ok(StateSpec::Coherent(CoherentAmplitude::new(a.re, a.im)?))
            }
            "even_cat" => Ok(StateSpec::EvenCat(parse_real_amplitude(
                spec,
                want_param(spec, param)?,
            )?)),
            "superpos01" => match param {
                None => Ok(StateSpec::Superpos01),
                Some(_) => Err(bad(spec, "superpos01 takes no parameter")),
            },
            "mix01" => Ok(StateSpec::Mix01 {
                p: parse_p(spec, want_param(spec, param)?)?,
            }),
            "entangled_cat" => Ok(StateSpec::EntangledCat(parse_real_amplitude(
                spec,
                want_param(spec, param)?,
            )?)),
            "bell_psi" => match param {
                None => Ok(StateSpec::BellPsi),
                Some(_) => Err(bad(spec, "bell_psi takes no parameter")),
            },
            "bell_phi" => match param {
                None => Ok(StateSpec::BellPhi),
                Some(_) => Err(bad(spec, "bell_phi takes no parameter")),
            },
            "bell_mix" => Ok(StateSpec::BellMix {
                p: parse_p(spec, want_param(spec, param)?)?,
            }),
            other => Err(bad(spec, format!("unknown state family `{other}`"))),
        }
    }

    /// Number of modes the family lives on.
    pub fn modes(&self) -> u8 {
        match self {
            StateSpec::Fock(_)
            | StateSpec::Coherent(_)
            | StateSpec::EvenCat(_)
            | StateSpec::Superpos01
            | StateSpec::Mix01 { .. } => 1,
            _ => 2,
        }
    }

    /// Builds the normalized density matrix of the family on `space`.
    pub fn build(&self, space: HilbertSpec) -> Result<DensityMatrix> {
        if space.modes() != self.modes() {
            return Err(Error::ModeMismatch {
                expected: self.modes(),
                got: space.modes(),
            });
        }
        let d = space.truncation();
        match *self {
            StateSpec::Fock(n) => {
                if n >= d {
                    return Err(Error::ParamOutOfRange {
                        name: "fock_n",
                        value: n as f64,
                        constraint: "must be below the truncation",
                    });
                }
                Ok(fock_vector(space, n).projector())
            }
            StateSpec::Coherent(a) => Ok(coherent_vector(a, d)?.projector()),
            StateSpec::EvenCat(a) => {
                let plus = coherent_vector(CoherentAmplitude::new(a, 0.0)?, d)?;
                let minus = coherent_vector(CoherentAmplitude::new(-a, 0.0)?, d)?;
                let v: Vec<Complex64> = plus
                    .vector()
                    .iter()
                    .zip(minus.vector())
                    .map(|(x, y)| x + y)
                    .collect();
                Ok(PureState::new(space, v)?.projector())
            }
            StateSpec::Superpos01 => {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[0] = Complex64::new(1.0, 0.0);
                v[1] = Complex64::new(1.0, 0.0);
                Ok(PureState::new(space, v)?.projector())
            }
            StateSpec::Mix01 { p } => {
                let entries = Mat::from_fn(d, d, |i, j| {
                    if i == j && i == 0 {
                        Complex64::new(p, 0.0)
                    } else if i == j && i == 1 {
                        Complex64::new(1.0 - p, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                DensityMatrix::new(space, entries)
            }
            StateSpec::EntangledCat(a) => {
                let plus = coherent_vector(CoherentAmplitude::new(a, 0.0)?, d)?;
                let minus = coherent_vector(CoherentAmplitude::new(-a, 0.0)?, d)?;
                let pm = crate::linalg::kron_vec(plus.vector(), minus.vector());
                let mp = crate::linalg::kron_vec(minus.vector(), plus.vector());
                let v: Vec<Complex64> = pm.iter().zip(&mp).map(|(x, y)| x + y).collect();
                Ok(PureState::new(space, v)?.projector())
            }
            StateSpec::BellPsi => Ok(bell_vector(space, (0, 1), (1, 0))?.projector()),
            StateSpec::BellPhi => Ok(bell_vector(space, (0, 0), (1, 1))?.projector()),
            StateSpec::BellMix { p } => {
                let psi = bell_vector(space, (0, 1), (1, 0))?.projector();
                let phi = bell_vector(space, (0, 0), (1, 1))?.projector();
                let n = space.dim();
                let entries = Mat::from_fn(n, n, |i, j| {
                    (1.0 - p) * psi.entries()[(i, j)] + p * phi.entries()[(i, j)]
                });
                DensityMatrix::new(space, entries)
            }
        }
    }
}

fn fock_vector(space: HilbertSpec, n: usize) -> PureState {
    let mut v = vec![Complex64::new(0.0, 0.0); space.dim()];
    v[n] = Complex64::new(1.0, 0.0);
    PureState::new(space, v).expect("unit basis vector is normalized")
}

fn bell_vector(space: HilbertSpec, a: (usize, usize), b: (usize, usize)) -> Result<PureState> {
    let mut v = vec![Complex64::new(0.0, 0.0); space.dim()];
    v[space.composite(a.0, a.1)] = Complex64::new(1.0, 0.0);
    v[space.composite(b.0, b.1)] = Complex64::new(1.0, 0.0);
    PureState::new(space, v)
}

/// Parses a state-spec string and builds it on `space`.
pub fn named_state(spec: &str, space: HilbertSpec) -> Result<DensityMatrix> {
    StateSpec::parse(spec)?.build(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn single(d: usize) -> HilbertSpec {
        HilbertSpec::single(d).unwrap()
    }

    #[test]
    fn fock_one_is_a_unit_pixel() {
        let rho = named_state("fock:1", single(6)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert!((rho.entries()[(i, j)].re - want).abs() < 1e-15);
                assert!(rho.entries()[(i, j)].im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn even_cat_norm_matches_gram_oracle() {
        // Unnormalized |0.5> + |-0.5> has norm^2 = 2(1 + e^{-0.5}).
        let d = 12;
        let plus = coherent_vector(CoherentAmplitude::new(0.5, 0.0).unwrap(), d).unwrap();
        let minus = coherent_vector(CoherentAmplitude::new(-0.5, 0.0).unwrap(), d).unwrap();
        let overlap = plus.overlap(&minus).unwrap();
        let norm_sqr = 2.0 * (1.0 + overlap.re);
        assert!((norm_sqr - 2.0 * (1.0 + (-0.5f64).exp())).abs() < 1e-10);
        // And the built state is a valid pure projector.
        let rho = named_state("even_cat:0.5", single(d)).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mix01_eigenvalues() {
        let rho = named_state("mix01:p=0.3", single(8)).unwrap();
        let (mut vals, _) = linalg::eigh(rho.entries()).unwrap();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((vals[0] - 0.7).abs() < 1e-12);
        assert!((vals[1] - 0.3).abs() < 1e-12);
        for v in &vals[2..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn bell_states_have_expected_entries() {
        let space = HilbertSpec::two_mode(4).unwrap();
        let psi = named_state("bell_psi", space).unwrap();
        let idx01 = space.composite(0, 1);
        let idx10 = space.composite(1, 0);
        assert!((psi.entries()[(idx01, idx01)].re - 0.5).abs() < 1e-14);
        assert!((psi.entries()[(idx01, idx10)].re - 0.5).abs() < 1e-14);
        let phi = named_state("bell_phi", space).unwrap();
        let idx00 = space.composite(0, 0);
        let idx11 = space.composite(1, 1);
        assert!((phi.entries()[(idx00, idx11)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bell_mix_is_a_valid_mixture() {
        let space = HilbertSpec::two_mode(4).unwrap();
        let rho = named_state("bell_mix:p=0.25", space).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let (vals, _) = linalg::eigh(rho.entries()).unwrap();
        let mut nonzero: Vec<f64> = vals.into_iter().filter(|v| v.abs() > 1e-12).collect();
        nonzero.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(nonzero.len(), 2);
        assert!((nonzero[0] - 0.75).abs() < 1e-12);
        assert!((nonzero[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_specs() {
        let space = single(8);
        for s in [
            "fock",
            "fock:",
            "fock:x",
            "fock:12",
            "mix01:0.3",
            "mix01:p=1.5",
            "even_cat:-0.5",
            "even_cat:nope",
            "superpos01:1",
            "wat:1",
            "",
        ] {
            assert!(named_state(s, space).is_err(), "spec `{s}` should fail");
        }
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        assert!(named_state("bell_psi", single(8)).is_err());
        assert!(named_state("fock:1", HilbertSpec::two_mode(4).unwrap()).is_err());
    }

    #[test]
    fn complex_amplitude_forms_parse() {
        for (s, re, im) in [
            ("coherent:0.5", 0.5, 0.0),
            ("coherent:-0.5", -0.5, 0.0),
            ("coherent:0.3+0.2i", 0.3, 0.2),
            ("coherent:0.3-0.2i", 0.3, -0.2),
            ("coherent:0.2i", 0.0, 0.2),
            ("coherent:1e-1", 0.1, 0.0),
        ] {
            match StateSpec::parse(s).unwrap() {
                StateSpec::Coherent(a) => {
                    assert!((a.re - re).abs() < 1e-15, "{s}");
                    assert!((a.im - im).abs() < 1e-15, "{s}");
                }
                other => panic!("{s} parsed to {other:?}"),
            }
        }
    }
}
