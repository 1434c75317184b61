//! Means of positive definite matrices.
//!
//! Closed forms: arithmetic, harmonic, log-Euclidean and power means, plus the
//! two-point Cartan and Wasserstein geodesics. Iterative: the Cartan (Karcher)
//! mean, the Wasserstein barycenter and the Lim–Palfia power mean.

mod closed;
mod geodesic;
mod problem;
mod solvers;

pub use closed::{arithmetic_mean, harmonic_mean, log_euclidean_mean, power_mean_q};
pub use geodesic::{geometric_geodesic, geometric_mean2, wasserstein_geodesic};
pub use problem::{Init, MeanProblem, SolverConfig, SolverResult, WeightVector, WEIGHT_SUM_TOL};
pub use solvers::{
    cartan_mean, lim_palfia_mean, log_scale, pt_limit_probe, wasserstein_barycenter, wasserstein_residual, ABSOLUTE_RESIDUAL_FLOOR,
    CARTAN_PRECISION_FACTOR, MIN_CARTAN_STEP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// Selector over every implemented mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "parameter")]
pub enum MeanKind {
    Arithmetic,
    Harmonic,
    LogEuclidean,
    Power(f64),
    Cartan,
    Wasserstein,
    LimPalfia(f64),
}

/// A closed-form value or the full solver output.
#[derive(Debug, Clone)]
pub enum MeanValue {
    Closed(SpdMatrix),
    Iterative(SolverResult),
}

impl MeanValue {
    pub fn value(&self) -> &SpdMatrix {
        match self {
            MeanValue::Closed(x) => x,
            MeanValue::Iterative(r) => &r.value,
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            MeanValue::Closed(_) => true,
            MeanValue::Iterative(r) => r.converged,
        }
    }
}

impl MeanKind {
    /// Parses `arithmetic`, `harmonic`, `log-euclidean`, `power`, `cartan`,
    /// `wasserstein` or `lim-palfia`; the last two-parameter kinds take `param`.
    pub fn parse(name: &str, param: Option<f64>) -> Result<Self> {
        let need = |what: &str| param.ok_or_else(|| Error::BadParameter(format!("{what} needs a parameter")));
        Ok(match name.replace('_', "-").as_str() {
            "arithmetic" => MeanKind::Arithmetic,
            "harmonic" => MeanKind::Harmonic,
            "log-euclidean" => MeanKind::LogEuclidean,
            "power" => MeanKind::Power(need("power mean")?),
            "cartan" | "geometric" | "karcher" => MeanKind::Cartan,
            "wasserstein" => MeanKind::Wasserstein,
            "lim-palfia" => MeanKind::LimPalfia(need("Lim–Palfia mean")?),
            _ => return Err(Error::Unknown { kind: "mean", name: name.to_string() }),
        })
    }

    pub fn compute(self, p: &MeanProblem, cfg: &SolverConfig) -> Result<MeanValue> {
        Ok(match self {
            MeanKind::Arithmetic => MeanValue::Closed(arithmetic_mean(p)?),
            MeanKind::Harmonic => MeanValue::Closed(harmonic_mean(p)?),
            MeanKind::LogEuclidean => MeanValue::Closed(log_euclidean_mean(p)?),
            MeanKind::Power(q) => MeanValue::Closed(power_mean_q(p, q)?),
            MeanKind::Cartan => MeanValue::Iterative(cartan_mean(p, cfg)?),
            MeanKind::Wasserstein => MeanValue::Iterative(wasserstein_barycenter(p, cfg)?),
            MeanKind::LimPalfia(t) => MeanValue::Iterative(lim_palfia_mean(p, t, cfg)?),
        })
    }
}
