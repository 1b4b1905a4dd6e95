//! Random source vectors with i.i.d.-coordinate structure.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, LabRng};

/// Absolutely continuous component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Continuous {
    /// Uniform on `[−1, 1]`.
    #[default]
    Uniform,
    StandardNormal,
}

impl Continuous {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Continuous::Uniform => rng.random_range(-1.0..=1.0),
            Continuous::StandardNormal => rng.sample(StandardNormal),
        }
    }

    fn sample_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        loop {
            let x = self.sample(rng);
            if x != 0.0 {
                return x;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

fn zero_atom() -> Vec<Atom> {
    vec![Atom {
        value: 0.0,
        prob: 1.0,
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Each coordinate is drawn from `continuous` with probability `lambda`
    /// and from the discrete `atoms` otherwise.
    MixedDiscreteContinuous {
        lambda: f64,
        #[serde(default = "zero_atom")]
        atoms: Vec<Atom>,
        #[serde(default)]
        continuous: Continuous,
    },
    /// Exactly `s` nonzero entries on a uniformly random support.
    SparseExact {
        s: usize,
        #[serde(default)]
        magnitude: Continuous,
    },
    /// Uniform choice from a fixed list of vectors.
    FiniteSet { points: Vec<Vec<f64>> },
}

impl SourceSpec {
    /// Mixed source with the single atom `0`.
    pub fn mixed(lambda: f64, continuous: Continuous) -> Self {
        SourceSpec::MixedDiscreteContinuous {
            lambda,
            atoms: zero_atom(),
            continuous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::MixedDiscreteContinuous { lambda, atoms, .. } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::InvalidSpec(format!("lambda {lambda} outside [0, 1]")));
                }
                if atoms.is_empty() {
                    return Err(Error::InvalidSpec("no atoms".into()));
                }
                if atoms.iter().any(|a| !(a.prob >= 0.0) || !a.value.is_finite()) {
                    return Err(Error::InvalidSpec("atom with invalid value or probability".into()));
                }
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSpec(format!("atom probabilities sum to {total}")));
                }
                Ok(())
            }
            SourceSpec::SparseExact { .. } => Ok(()),
            SourceSpec::FiniteSet { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidSpec("empty finite set".into()));
                }
                Ok(())
            }
        }
    }

    pub fn validate_for_length(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidSpec("length must be at least 1".into()));
        }
        match self {
            SourceSpec::SparseExact { s, .. } if *s > n => {
                Err(Error::InvalidSpec(format!("sparsity {s} exceeds length {n}")))
            }
            SourceSpec::FiniteSet { points } if points.iter().any(|p| p.len() != n) => {
                Err(Error::InvalidSpec(format!("finite-set points must have length {n}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSample {
    pub x: Vec<f64>,
    pub nonzero_count: usize,
    pub seed: u64,
}

pub fn sample_source(spec: &SourceSpec, n: usize, seed: u64) -> Result<SourceSample> {
    spec.validate_for_length(n)?;
    let mut rng = rng_from_seed(seed);
    let x = draw(spec, n, &mut rng);
    let nonzero_count = x.iter().filter(|v| **v != 0.0).count();
    Ok(SourceSample {
        x,
        nonzero_count,
        seed,
    })
}

fn draw(spec: &SourceSpec, n: usize, rng: &mut LabRng) -> Vec<f64> {
    match spec {
        SourceSpec::MixedDiscreteContinuous {
            lambda,
            atoms,
            continuous,
        } => (0..n)
            .map(|_| {
                if rng.random::<f64>() < *lambda {
                    continuous.sample(rng)
                } else {
                    pick_atom(atoms, rng.random::<f64>())
                }
            })
            .collect(),
        SourceSpec::SparseExact { s, magnitude } => {
            let mut x = vec![0.0; n];
            for i in index::sample(rng, n, *s) {
                x[i] = magnitude.sample_nonzero(rng);
            }
            x
        }
        SourceSpec::FiniteSet { points } => points[rng.random_range(0..points.len())].clone(),
    }
}

fn pick_atom(atoms: &[Atom], u: f64) -> f64 {
    let mut acc = 0.0;
    for a in atoms {
        acc += a.prob;
        if u < acc {
            return a.value;
        }
    }
    atoms[atoms.len() - 1].value
}

#[derive(Debug, Clone, PartialEq)]
pub enum TheoreticalRate {
    Known(f64),
    Undefined(&'static str),
}

/// Minkowski-dimension compression rate where a closed form is known: the
/// mixing parameter for mixed discrete-continuous sources.
pub fn theoretical_rate(spec: &SourceSpec) -> TheoreticalRate {
    match spec {
        SourceSpec::MixedDiscreteContinuous { lambda, .. } => TheoreticalRate::Known(*lambda),
        SourceSpec::SparseExact { .. } => {
            TheoreticalRate::Undefined("no closed form; dimension per length is s/n")
        }
        SourceSpec::FiniteSet { .. } => TheoreticalRate::Undefined("dimension 0"),
    }
}

/// Smallest `k` with `P[Binomial(n, p) ≤ k] ≥ q`.
pub fn binomial_quantile(n: usize, p: f64, q: f64) -> usize {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    // pmf recurrence in log space to survive large n
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut ln_pmf = n as f64 * ln_q;
    let mut cdf = 0.0;
    for k in 0..=n {
        cdf += ln_pmf.exp();
        if cdf >= q * (1.0 - 1e-12) {
            return k;
        }
        ln_pmf += ((n - k) as f64).ln() - ((k + 1) as f64).ln() + ln_p - ln_q;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_gives_zero_vector() {
        let spec = SourceSpec::mixed(0.0, Continuous::Uniform);
        for seed in 0..20 {
            let s = sample_source(&spec, 16, seed).unwrap();
            assert!(s.x.iter().all(|v| *v == 0.0));
            assert_eq!(s.nonzero_count, 0);
        }
    }

    #[test]
    fn fully_continuous_uniform() {
        let spec = SourceSpec::mixed(1.0, Continuous::Uniform);
        let n = 10_000;
        let s = sample_source(&spec, n, 42).unwrap();
        assert_eq!(s.nonzero_count, n);
        let mean = s.x.iter().sum::<f64>() / n as f64;
        // uniform[-1, 1] has variance 1/3
        let stderr = (1.0 / 3.0 / n as f64).sqrt();
        assert!(mean.abs() <= 3.0 * stderr, "mean {mean}");
    }

    #[test]
    fn mixed_nonzero_count_concentrates() {
        let spec = SourceSpec::mixed(0.3, Continuous::StandardNormal);
        let n = 10_000usize;
        let s = sample_source(&spec, n, 7).unwrap();
        let spread = 3.0 * (n as f64 * 0.3 * 0.7).sqrt();
        assert!((s.nonzero_count as f64 - 3000.0).abs() <= spread);
    }

    #[test]
    fn sparse_exact_support_size() {
        for s in 0..=6 {
            let spec = SourceSpec::SparseExact {
                s,
                magnitude: Continuous::Uniform,
            };
            for seed in 0..30 {
                assert_eq!(sample_source(&spec, 6, seed).unwrap().nonzero_count, s);
            }
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let spec = SourceSpec::mixed(0.5, Continuous::StandardNormal);
        assert_eq!(sample_source(&spec, 32, 5).unwrap(), sample_source(&spec, 32, 5).unwrap());
        assert_ne!(sample_source(&spec, 32, 5).unwrap().x, sample_source(&spec, 32, 6).unwrap().x);
    }

    #[test]
    fn finite_set_picks_members() {
        let points = vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 0.0]];
        let spec = SourceSpec::FiniteSet {
            points: points.clone(),
        };
        let mut seen = [false; 3];
        for seed in 0..200 {
            let x = sample_source(&spec, 2, seed).unwrap().x;
            let idx = points.iter().position(|p| *p == x).unwrap();
            seen[idx] = true;
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn invalid_specs() {
        let bad_lambda = SourceSpec::mixed(1.5, Continuous::Uniform);
        assert!(matches!(sample_source(&bad_lambda, 4, 0), Err(Error::InvalidSpec(_))));
        let bad_atoms = SourceSpec::MixedDiscreteContinuous {
            lambda: 0.5,
            atoms: vec![Atom { value: 0.0, prob: 0.4 }],
            continuous: Continuous::Uniform,
        };
        assert!(sample_source(&bad_atoms, 4, 0).is_err());
        let too_sparse = SourceSpec::SparseExact {
            s: 5,
            magnitude: Continuous::Uniform,
        };
        assert!(sample_source(&too_sparse, 4, 0).is_err());
        let wrong_len = SourceSpec::FiniteSet {
            points: vec![vec![1.0]],
        };
        assert!(sample_source(&wrong_len, 2, 0).is_err());
        assert!(sample_source(&SourceSpec::FiniteSet { points: vec![] }, 2, 0).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(
            theoretical_rate(&SourceSpec::mixed(0.3, Continuous::Uniform)),
            TheoreticalRate::Known(0.3)
        );
        assert_eq!(
            theoretical_rate(&SourceSpec::mixed(1.0, Continuous::Uniform)),
            TheoreticalRate::Known(1.0)
        );
        assert_eq!(
            theoretical_rate(&SourceSpec::FiniteSet { points: vec![vec![0.0]] }),
            TheoreticalRate::Undefined("dimension 0")
        );
        assert!(matches!(
            theoretical_rate(&SourceSpec::SparseExact { s: 2, magnitude: Continuous::Uniform }),
            TheoreticalRate::Undefined(_)
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"kind":"mixed-discrete-continuous","lambda":0.3,"continuous":"standard-normal"}"#;
        let spec: SourceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, SourceSpec::mixed(0.3, Continuous::StandardNormal));
        let back: SourceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let unknown = r#"{"kind":"sparse-exact","s":2,"extra":1}"#;
        assert!(serde_json::from_str::<SourceSpec>(unknown).is_err());
    }
}
