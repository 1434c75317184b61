//! Closed-form multi-variable means.

use crate::error::{Error, Result};
use crate::spd::{CMatrix, SpdMatrix, C64};

use super::MeanProblem;

fn weighted_sum<'a>(p: &'a MeanProblem, f: impl Fn(&'a SpdMatrix) -> CMatrix) -> CMatrix {
    let n = p.dim();
    p.terms().fold(CMatrix::zeros(n, n), |acc, (w, a)| acc + f(a) * C64::from(w))
}

/// `Σ w_j A_j`.
pub fn arithmetic_mean(p: &MeanProblem) -> Result<SpdMatrix> {
    SpdMatrix::from_computed(weighted_sum(p, |a| a.matrix().clone()))
}

/// `(Σ w_j A_j^{-1})^{-1}`.
pub fn harmonic_mean(p: &MeanProblem) -> Result<SpdMatrix> {
    Ok(SpdMatrix::from_computed(weighted_sum(p, |a| a.inverse().into_matrix()))?.inverse())
}

/// `exp(Σ w_j log A_j)`.
pub fn log_euclidean_mean(p: &MeanProblem) -> Result<SpdMatrix> {
    crate::spd::HermitianMatrix::from_computed(weighted_sum(p, |a| a.log().into_matrix())).exp()
}

/// `(Σ w_j A_j^p)^{1/p}` for `p != 0`.
pub fn power_mean_q(p: &MeanProblem, exponent: f64) -> Result<SpdMatrix> {
    if exponent == 0.0 {
        return Err(Error::ZeroExponent);
    }
    if !exponent.is_finite() {
        return Err(Error::BadParameter(format!("exponent {exponent} must be finite")));
    }
    Ok(SpdMatrix::from_computed(weighted_sum(p, |a| a.powf(exponent).into_matrix()))?.powf(1.0 / exponent))
}
