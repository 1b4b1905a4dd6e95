//! Measurement ensembles and the phaseless operator `y = |Ax|`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::concentration::fill_uniform_ball;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A compression rate `R ∈ (0, 1]` held as an exact fraction, so that
/// `⌊R·n⌋` never depends on binary rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rate {
    pub fn fraction(num: u128, den: u128) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::InvalidRate(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌊R·n⌋`
    pub fn measurements(&self, n: usize) -> usize {
        (self.num * n as u128 / self.den) as usize
    }
}

impl FromStr for Rate {
    type Err = Error;

    /// Accepts decimals (`"0.25"`, `"1"`, `".5"`) and fractions (`"3/12"`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRate(s.to_string());
        let t = s.trim();
        if let Some((a, b)) = t.split_once('/') {
            let num = a.trim().parse::<u128>().map_err(|_| bad())?;
            let den = b.trim().parse::<u128>().map_err(|_| bad())?;
            return Rate::fraction(num, den).map_err(|_| bad());
        }
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        let digits_ok = |d: &str| d.bytes().all(|c| c.is_ascii_digit());
        if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) || frac.len() > 30 {
            return Err(bad());
        }
        let int_val: u128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_val: u128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den = 10u128.pow(frac.len() as u32);
        let num = int_val
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        Rate::fraction(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for Rate {
    /// Decimal when the denominator divides a power of ten, `a/b` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = self.den;
        let (mut twos, mut fives) = (0u32, 0u32);
        while d.is_multiple_of(2) {
            d /= 2;
            twos += 1;
        }
        while d.is_multiple_of(5) {
            d /= 5;
            fives += 1;
        }
        if d != 1 {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scaled = self.num * (10u128.pow(digits) / self.den);
        if digits == 0 {
            return write!(f, "{scaled}");
        }
        let p = 10u128.pow(digits);
        write!(f, "{}.{:0width$}", scaled / p, scaled % p, width = digits as usize)
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `m = ⌊R·n⌋` for a rate given as a decimal or fraction string.
pub fn rate_to_m(rate: &str, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    Ok(rate.parse::<Rate>()?.measurements(n))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Ensemble {
    /// Independent rows uniform on `B_n(0, r)`.
    RowsUniformOnBall { r: f64 },
    #[default]
    IidGaussian,
    /// Supplied by the caller (literal or CSV import).
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    pub a: DMatrix<f64>,
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl MeasurementMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            a: DMatrix::from_fn(m, n, |i, j| rows[i][j]),
            ensemble: Ensemble::Explicit,
            seed: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.a.row(i).iter().copied().collect()
    }

    /// Row-major CSV, one matrix row per line, shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.rows() {
            w.write_record(self.a.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        Self::from_rows(&read_numeric_rows(input)?)
    }
}

/// Parses every non-empty CSV record into a row of floats.
pub fn read_numeric_rows<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn sample_matrix(ensemble: Ensemble, m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut rng = rng_from_seed(seed);
    let mut a = DMatrix::zeros(m, n);
    match ensemble {
        Ensemble::RowsUniformOnBall { r } => {
            if !(r > 0.0) {
                return Err(Error::InvalidRadius(r));
            }
            let mut row = vec![0.0; n];
            for i in 0..m {
                fill_uniform_ball(&mut row, r, &mut rng);
                for (j, v) in row.iter().enumerate() {
                    a[(i, j)] = *v;
                }
            }
        }
        Ensemble::IidGaussian => {
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] = rng.sample(StandardNormal);
                }
            }
        }
        Ensemble::Explicit => {
            return Err(Error::InvalidParameter("explicit matrices cannot be sampled".into()));
        }
    }
    Ok(MeasurementMatrix { a, ensemble, seed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaselessObservation {
    pub y: Vec<f64>,
    pub match_tol: f64,
}

impl PhaselessObservation {
    /// Uses the default tolerance `1e-9·max(1, ‖y‖)`.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("magnitudes must be non-negative".into()));
        }
        let match_tol = default_tol(&y);
        Ok(Self { y, match_tol })
    }

    pub fn norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-9;

pub fn default_tol(y: &[f64]) -> f64 {
    DEFAULT_REL_TOL * y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
}

/// `|Ax|` without the tolerance bookkeeping.
pub fn magnitudes(mat: &MeasurementMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != mat.cols() {
        return Err(Error::DimensionMismatch {
            expected: mat.cols(),
            found: x.len(),
        });
    }
    Ok((0..mat.rows())
        .map(|i| {
            mat.a
                .row(i)
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
        })
        .collect())
}

pub fn phaseless_measure(mat: &MeasurementMatrix, x: &[f64]) -> Result<PhaselessObservation> {
    PhaselessObservation::new(magnitudes(mat, x)?)
}
