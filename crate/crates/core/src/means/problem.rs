use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// Tolerance on `Σ w_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {bad} is negative or not finite")));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector(w))
    }

    pub fn uniform(m: usize) -> Self {
        WeightVector(vec![1.0 / m as f64; m])
    }

    /// `(1 - t, t)`.
    pub fn pair(t: f64) -> Result<Self> {
        Self::new(vec![1.0 - t, t])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Vec<f64> {
        w.0
    }
}

/// Weights plus a tuple of equally sized positive definite matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct MeanProblem {
    weights: WeightVector,
    matrices: Vec<SpdMatrix>,
}

#[derive(Deserialize)]
struct RawProblem {
    weights: WeightVector,
    matrices: Vec<SpdMatrix>,
}

impl TryFrom<RawProblem> for MeanProblem {
    type Error = Error;
    fn try_from(raw: RawProblem) -> Result<Self> {
        MeanProblem::new(raw.weights, raw.matrices)
    }
}

impl MeanProblem {
    pub fn new(weights: WeightVector, matrices: Vec<SpdMatrix>) -> Result<Self> {
        if weights.len() != matrices.len() {
            return Err(Error::LengthMismatch(weights.len(), matrices.len()));
        }
        let n = matrices[0].dim();
        if let Some(bad) = matrices.iter().find(|a| a.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(MeanProblem { weights, matrices })
    }

    pub fn uniform(matrices: Vec<SpdMatrix>) -> Result<Self> {
        let m = matrices.len();
        if m == 0 {
            return Err(Error::InvalidWeights("no matrices".into()));
        }
        Self::new(WeightVector::uniform(m), matrices)
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.matrices
    }

    /// `(w_j, A_j)` for strictly positive weights; zero-weight matrices are inert.
    pub fn terms(&self) -> impl Iterator<Item = (f64, &SpdMatrix)> {
        self.weights.as_slice().iter().copied().zip(&self.matrices).filter(|(w, _)| *w > 0.0)
    }

    /// Same weights, each matrix replaced by `f(A_j)`.
    pub fn map(&self, f: impl Fn(&SpdMatrix) -> Result<SpdMatrix>) -> Result<MeanProblem> {
        let matrices = self.matrices.iter().map(f).collect::<Result<Vec<_>>>()?;
        MeanProblem::new(self.weights.clone(), matrices)
    }

    pub fn scaled(&self, alpha: f64) -> Result<MeanProblem> {
        self.map(|a| a.scaled(alpha))
    }

    pub fn powf(&self, p: f64) -> Result<MeanProblem> {
        self.map(|a| Ok(a.powf(p)))
    }
}

/// Starting point of an iterative solver.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// The solver's own default.
    #[default]
    Default,
    Arithmetic,
    LogEuclidean,
    Identity,
    Explicit(SpdMatrix),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual at which iteration stops.
    pub residual_tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { residual_tol: 1e-12, max_iter: 500, init: Init::Default }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::BadParameter("solver needs residual_tol > 0 and max_iter >= 1".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    /// Same configuration with the tolerance divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        SolverConfig { residual_tol: self.residual_tol / factor, ..self.clone() }
    }
}

/// Output of an iterative mean. When `converged` is false, `value` is the
/// iterate with the smallest residual seen.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverResult {
    pub value: SpdMatrix,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `tr X_k` for every iterate, starting with the initial point.
    pub trace_history: Vec<f64>,
}

impl SolverResult {
    pub fn into_value(self) -> Result<SpdMatrix> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NoConvergence { iterations: self.iterations, residual: self.residual })
        }
    }
}
