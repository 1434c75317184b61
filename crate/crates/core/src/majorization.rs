//! Spectra and the weak, weak-log and log majorization relations, each reported
//! as a three-valued verdict with a tolerance band.
//!
//! Log relations compare prefix sums of logarithms rather than prefix products.
//! A verdict `holds` when the worst slack is at least `+band`, is `violated` when
//! it is at most `-band`, and is `indeterminate` in between (equality cases land
//! there).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::{GeneralMatrix, SpdMatrix};

/// Default band on the log scale.
pub const DEFAULT_BAND: f64 = 1e-9;

/// Imaginary parts of a general matrix's spectrum must be below this times the
/// spectral scale.
pub const IMAG_TOL: f64 = 1e-9;

/// Positive values sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpectrumVector(Vec<f64>);

impl SpectrumVector {
    /// Sorts `values` in decreasing order; every entry must be positive and finite.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveSpectrum(*bad));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SpectrumVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * alpha).collect())
    }

    /// Sum of the `k` largest entries.
    pub fn ky_fan(&self, k: usize) -> f64 {
        self.0[..k].iter().sum()
    }

    /// `(Σ λ_j^p)^{1/p}`; `p = ∞` gives the largest entry.
    pub fn schatten(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.0[0]
        } else {
            let top = self.0[0];
            top * self.0.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

impl TryFrom<Vec<f64>> for SpectrumVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpectrumVector::new(v)
    }
}

impl From<SpectrumVector> for Vec<f64> {
    fn from(s: SpectrumVector) -> Vec<f64> {
        s.0
    }
}

impl SpdMatrix {
    pub fn spectrum(&self) -> SpectrumVector {
        SpectrumVector(self.eigenvalues().iter().rev().copied().collect())
    }
}

/// Descending spectrum of a positive definite matrix.
pub fn spectrum(a: &SpdMatrix) -> SpectrumVector {
    a.spectrum()
}

/// Descending real spectrum of a general matrix known to have positive
/// eigenvalues, such as a product of two positive definite matrices.
pub fn general_spectrum(a: &GeneralMatrix) -> Result<SpectrumVector> {
    let eig = a.eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst_imag > IMAG_TOL * scale {
        return Err(Error::ComplexSpectrum(worst_imag));
    }
    SpectrumVector::new(eig.iter().map(|z| z.re).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Weak,
    WeakLog,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    Indeterminate,
}

impl Status {
    pub fn from_margin(margin: f64, band: f64) -> Status {
        if margin >= band {
            Status::Holds
        } else if margin <= -band {
            Status::Violated
        } else {
            Status::Indeterminate
        }
    }

    /// Violated if any part is, holds only if every part does.
    pub fn combine(statuses: impl IntoIterator<Item = Status>) -> Status {
        let mut out = Status::Holds;
        for s in statuses {
            match s {
                Status::Violated => return Status::Violated,
                Status::Indeterminate => out = Status::Indeterminate,
                Status::Holds => {}
            }
        }
        out
    }
}

/// Outcome of comparing `x` against `y`. `k_worst` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorizationVerdict {
    pub relation: Relation,
    pub status: Status,
    pub margin: f64,
    pub k_worst: usize,
}

fn check_lengths(x: &SpectrumVector, y: &SpectrumVector) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// `(k, Σ_{j<=k} g(y_j) - Σ_{j<=k} g(x_j))` for `k = 1..n`.
fn prefix_slacks(x: &SpectrumVector, y: &SpectrumVector, g: impl Fn(f64) -> f64) -> Vec<(usize, f64)> {
    let (mut sx, mut sy) = (0.0, 0.0);
    x.values()
        .iter()
        .zip(y.values())
        .enumerate()
        .map(|(i, (&a, &b))| {
            sx += g(a);
            sy += g(b);
            (i + 1, sy - sx)
        })
        .collect()
}

fn worst(slacks: &[(usize, f64)]) -> (usize, f64) {
    slacks.iter().copied().fold((0, f64::INFINITY), |acc, s| if s.1 < acc.1 { s } else { acc })
}

/// `x ≺_wlog y`: `Π_{j<=k} x_j <= Π_{j<=k} y_j` for all `k`, compared on log sums.
pub fn check_weak_log_majorization(x: &SpectrumVector, y: &SpectrumVector, band: f64) -> Result<MajorizationVerdict> {
    check_lengths(x, y)?;
    let (k_worst, margin) = worst(&prefix_slacks(x, y, f64::ln));
    Ok(MajorizationVerdict { relation: Relation::WeakLog, status: Status::from_margin(margin, band), margin, k_worst })
}

/// `x ≺_log y`: weak log majorization with equal full products.
///
/// The margin covers the prefixes `k < n`; the `k = n` prefix is the product
/// equality and fails the relation when it is off by more than `band`, in which
/// case the margin is `-|Σ log x - Σ log y|` at `k = n`. With `n = 1` there is no
/// inequality left, and the margin is `+∞`.
pub fn check_log_majorization(x: &SpectrumVector, y: &SpectrumVector, band: f64) -> Result<MajorizationVerdict> {
    check_log_majorization_with(x, y, band, band)
}

/// Rounding noise of `Σ log λ_i` for eigenvalues computed from a Hermitian
/// matrix: each `λ_i` carries an absolute error of order `ε λ_1`.
pub fn log_sum_noise(x: &SpectrumVector) -> f64 {
    let top = x.values()[0];
    LOG_NOISE_FACTOR * f64::EPSILON * x.values().iter().map(|v| top / v).sum::<f64>()
}

/// Multiple of `ε Σ λ_1/λ_i` allowed for the full-product equality of spectra.
pub const LOG_NOISE_FACTOR: f64 = 64.0;

/// [`check_log_majorization`] with a separate tolerance for the `k = n` equality.
pub fn check_log_majorization_with(x: &SpectrumVector, y: &SpectrumVector, band: f64, equality_tol: f64) -> Result<MajorizationVerdict> {
    check_lengths(x, y)?;
    let slacks = prefix_slacks(x, y, f64::ln);
    let n = slacks.len();
    let total_gap = slacks[n - 1].1.abs();
    if total_gap > equality_tol {
        return Ok(MajorizationVerdict { relation: Relation::Log, status: Status::Violated, margin: -total_gap, k_worst: n });
    }
    let (k_worst, margin) = worst(&slacks[..n - 1]);
    let k_worst = if n == 1 { n } else { k_worst };
    Ok(MajorizationVerdict { relation: Relation::Log, status: Status::from_margin(margin, band), margin, k_worst })
}

/// `x ≺_w y`: prefix sums of `y` dominate, with slack measured relative to `Σ y`.
pub fn check_weak_majorization(x: &SpectrumVector, y: &SpectrumVector, band: f64) -> Result<MajorizationVerdict> {
    check_lengths(x, y)?;
    let total: f64 = y.values().iter().sum();
    let (k_worst, raw) = worst(&prefix_slacks(x, y, |v| v));
    let margin = raw / total;
    Ok(MajorizationVerdict { relation: Relation::Weak, status: Status::from_margin(margin, band), margin, k_worst })
}

pub fn check(relation: Relation, x: &SpectrumVector, y: &SpectrumVector, band: f64) -> Result<MajorizationVerdict> {
    match relation {
        Relation::Weak => check_weak_majorization(x, y, band),
        Relation::WeakLog => check_weak_log_majorization(x, y, band),
        Relation::Log => check_log_majorization(x, y, band),
    }
}
