//! Distances on positive definite matrices: Bures–Wasserstein, Cartan
//! (affine-invariant), log-Euclidean and Hellinger. All use the Frobenius norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::{ensure_same_dim, SpdMatrix};

/// Negative brackets above this are roundoff and clamp to zero.
pub const BRACKET_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    BuresWasserstein,
    Cartan,
    LogEuclidean,
    Hellinger,
}

impl MetricId {
    pub const ALL: [MetricId; 4] = [MetricId::BuresWasserstein, MetricId::Cartan, MetricId::LogEuclidean, MetricId::Hellinger];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::BuresWasserstein => "bures_wasserstein",
            MetricId::Cartan => "cartan",
            MetricId::LogEuclidean => "log_euclidean",
            MetricId::Hellinger => "hellinger",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        MetricId::ALL.into_iter().find(|m| m.name() == key).ok_or_else(|| Error::Unknown { kind: "metric", name: s.to_string() })
    }

    pub fn distance(self, a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceValue> {
        match self {
            MetricId::BuresWasserstein => bures_wasserstein_distance(a, b),
            MetricId::Cartan => cartan_distance(a, b),
            MetricId::LogEuclidean => log_euclidean_distance(a, b),
            MetricId::Hellinger => hellinger_distance(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceValue {
    pub value: f64,
    pub metric_id: MetricId,
}

/// Square root of a bracket `tr(A+B) - 2 t`, clamping roundoff-sized negatives.
fn bracket_sqrt(bracket: f64, scale: f64) -> Result<f64> {
    let rel = bracket / scale.max(f64::MIN_POSITIVE);
    if rel >= 0.0 {
        Ok(bracket.sqrt())
    } else if rel >= -BRACKET_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeBracket(rel))
    }
}

/// Orders a pair by its entries so that `d(A,B)` and `d(B,A)` run the same
/// floating-point computation.
fn canonical<'a>(a: &'a SpdMatrix, b: &'a SpdMatrix) -> (&'a SpdMatrix, &'a SpdMatrix) {
    let key = |m: &'a SpdMatrix| m.matrix().iter().flat_map(|z| [z.re, z.im]);
    match key(a).zip(key(b)).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne()) {
        Some(std::cmp::Ordering::Greater) => (b, a),
        _ => (a, b),
    }
}

/// `[tr(A+B) - 2 tr (A^{1/2} B A^{1/2})^{1/2}]^{1/2}`.
pub fn bures_wasserstein_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceValue> {
    ensure_same_dim(a, b)?;
    let (a, b) = canonical(a, b);
    let cross = b.sandwich(&a.sqrt())?.sqrt().trace();
    let scale = a.trace() + b.trace();
    let value = bracket_sqrt(scale - 2.0 * cross, scale)?;
    Ok(DistanceValue { value, metric_id: MetricId::BuresWasserstein })
}

/// `‖log A^{-1/2} B A^{-1/2}‖_F`.
pub fn cartan_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceValue> {
    ensure_same_dim(a, b)?;
    let (a, b) = canonical(a, b);
    let whitened = b.sandwich(&a.inv_sqrt())?;
    let value = whitened.eigenvalues().iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt();
    Ok(DistanceValue { value, metric_id: MetricId::Cartan })
}

/// `‖log A - log B‖_F`.
pub fn log_euclidean_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceValue> {
    ensure_same_dim(a, b)?;
    let value = (a.log().matrix() - b.log().matrix()).norm();
    Ok(DistanceValue { value, metric_id: MetricId::LogEuclidean })
}

/// Tolerance between the two Hellinger formulas, relative to `tr(A+B)`.
const HELLINGER_CROSS_CHECK: f64 = 1e-10;

/// `‖A^{1/2} - B^{1/2}‖_F`, cross-checked against `[tr(A+B) - 2 tr A^{1/2}B^{1/2}]^{1/2}`.
pub fn hellinger_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceValue> {
    ensure_same_dim(a, b)?;
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let direct = (ra.matrix() - rb.matrix()).norm();
    let scale = a.trace() + b.trace();
    let cross = (ra.matrix() * rb.matrix()).trace().re;
    let via_trace_sq = (scale - 2.0 * cross).max(0.0);
    if (direct * direct - via_trace_sq).abs() > HELLINGER_CROSS_CHECK * scale {
        return Err(Error::Domain(format!("Hellinger formulas disagree: {:.6e} vs {:.6e}", direct * direct, via_trace_sq)));
    }
    Ok(DistanceValue { value: direct, metric_id: MetricId::Hellinger })
}
