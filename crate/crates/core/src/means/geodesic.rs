//! Two-point geodesics for the Cartan and Bures–Wasserstein metrics.

use crate::error::{Error, Result};
use crate::spd::{ensure_same_dim, product_sqrt, SpdMatrix, C64};

fn check_unit_interval(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("geodesic parameter {t} outside [0, 1]")))
    }
}

/// `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn geometric_geodesic(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_unit_interval(t)?;
    ensure_same_dim(a, b)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    b.sandwich(&a.inv_sqrt())?.powf(t).sandwich(&a.sqrt())
}

/// `A # B`.
pub fn geometric_mean2(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    geometric_geodesic(a, b, 0.5)
}

/// `A ◊_t B = (1-t)² A + t² B + t(1-t) [(AB)^{1/2} + (BA)^{1/2}]`.
pub fn wasserstein_geodesic(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_unit_interval(t)?;
    let ab = product_sqrt(a, b)?;
    let s = 1.0 - t;
    let cross = ab.matrix() + ab.matrix().adjoint();
    SpdMatrix::from_computed(a.matrix() * C64::from(s * s) + b.matrix() * C64::from(t * t) + cross * C64::from(t * s))
}
