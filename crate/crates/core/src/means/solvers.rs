//! Fixed-point solvers for the Cartan, Wasserstein and Lim–Palfia means.

use crate::error::{Error, Result};
use crate::metrics::cartan_distance;
use crate::spd::{CMatrix, HermitianMatrix, SpdMatrix, C64};

use super::closed::{arithmetic_mean, log_euclidean_mean};
use super::{Init, MeanProblem, SolverConfig, SolverResult};

/// Absolute residual floor used when the relative scale is near zero.
pub const ABSOLUTE_RESIDUAL_FLOOR: f64 = 1e-14;

/// Multiple of `ε κ_max` below which the Cartan residual cannot be resolved in
/// double precision, `κ_max` being the largest input condition number.
pub const CARTAN_PRECISION_FACTOR: f64 = 8.0;

/// Smallest damping factor the Cartan iteration may halve down to.
pub const MIN_CARTAN_STEP: f64 = 1.0 / 16.0;

fn threshold(cfg: &SolverConfig, scale: f64) -> f64 {
    (cfg.residual_tol * scale).max(ABSOLUTE_RESIDUAL_FLOOR)
}

fn initial_point(p: &MeanProblem, init: &Init, default: Init) -> Result<SpdMatrix> {
    let chosen = match init {
        Init::Default => &default,
        other => other,
    };
    match chosen {
        Init::Default | Init::LogEuclidean => log_euclidean_mean(p),
        Init::Arithmetic => arithmetic_mean(p),
        Init::Identity => Ok(SpdMatrix::identity(p.dim())),
        Init::Explicit(x) => {
            if x.dim() != p.dim() {
                return Err(Error::DimensionMismatch { expected: p.dim(), found: x.dim() });
            }
            Ok(x.clone())
        }
    }
}

/// Tracks the iterate with the smallest residual.
struct Best {
    value: Option<SpdMatrix>,
    residual: f64,
}

impl Best {
    fn new() -> Self {
        Best { value: None, residual: f64::INFINITY }
    }

    fn offer(&mut self, x: &SpdMatrix, residual: f64) {
        if residual < self.residual || self.value.is_none() {
            self.value = Some(x.clone());
            self.residual = residual;
        }
    }

    fn finish(self, iterations: usize, trace_history: Vec<f64>) -> SolverResult {
        SolverResult {
            value: self.value.expect("at least one iterate"),
            residual: self.residual,
            iterations,
            converged: false,
            trace_history,
        }
    }
}

fn weighted_sum(terms: impl Iterator<Item = (f64, CMatrix)>, n: usize) -> CMatrix {
    terms.fold(CMatrix::zeros(n, n), |acc, (w, m)| acc + m * C64::from(w))
}

/// `max_j ‖log A_j‖_F`, the scale of the Cartan residual.
pub fn log_scale(p: &MeanProblem) -> f64 {
    p.terms().map(|(_, a)| a.log().frobenius_norm()).fold(0.0, f64::max)
}

/// Step for the Karcher iteration from the log-spread `ℓ_j` of each whitened
/// matrix: `2 / (1 + L)` with `L = Σ w_j (ℓ_j/2) coth(ℓ_j/2)`, which is at most 1.
fn conditioned_step(spreads: &[(f64, f64)]) -> f64 {
    let curvature: f64 = spreads.iter().map(|&(w, l)| if l < 1e-8 { w } else { w * (l / 2.0) / (l / 2.0).tanh() }).sum();
    (2.0 / (1.0 + curvature)).min(1.0)
}

/// Karcher mean: `X ← X^{1/2} exp(s Σ w_j log(X^{-1/2} A_j X^{-1/2})) X^{1/2}`.
///
/// The step `s` is `θ · d`: `θ` comes from the spectral spread of the whitened
/// matrices `X^{-1/2} A_j X^{-1/2}` (equal to 1 when they commute with `X` and
/// have flat spectra), and the damping `d` starts at 1 and halves, down to 1/16,
/// whenever the residual more than doubles.
/// Converged when `‖Σ w_j log(X^{-1/2} A_j X^{-1/2})‖_F <= residual_tol · max_j ‖log A_j‖_F`,
/// or below the precision floor `8 ε κ_max · max_j ‖log A_j‖_F` for badly
/// conditioned inputs.
pub fn cartan_mean(p: &MeanProblem, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let n = p.dim();
    let scale = log_scale(p);
    let kappa = p.terms().map(|(_, a)| a.condition_number()).fold(1.0, f64::max);
    let precision = CARTAN_PRECISION_FACTOR * f64::EPSILON * kappa;
    let tol = threshold(cfg, scale).max(precision * scale);
    let mut x = initial_point(p, &cfg.init, Init::LogEuclidean)?;
    let mut history = vec![x.trace()];
    let mut best = Best::new();
    let mut damping: f64 = 1.0;
    let mut previous_residual = f64::INFINITY;
    for iteration in 0..=cfg.max_iter {
        let inv_half = x.inv_sqrt();
        let mut spreads = Vec::with_capacity(p.len());
        let mut terms = Vec::with_capacity(p.len());
        for (w, a) in p.terms() {
            let whitened = a.sandwich(&inv_half)?;
            spreads.push((w, whitened.condition_number().ln()));
            terms.push((w, whitened.log().into_matrix()));
        }
        let gradient = HermitianMatrix::from_computed(weighted_sum(terms.into_iter(), n));
        let residual = gradient.frobenius_norm();
        best.offer(&x, residual);
        if residual <= tol {
            return Ok(SolverResult { value: x, residual, iterations: iteration, converged: true, trace_history: history });
        }
        if iteration == cfg.max_iter {
            break;
        }
        if residual > 2.0 * previous_residual {
            damping = (damping / 2.0).max(MIN_CARTAN_STEP);
        }
        previous_residual = residual;
        let theta = conditioned_step(&spreads);
        x = gradient.scaled(theta * damping).exp()?.sandwich(&x.sqrt())?;
        history.push(x.trace());
    }
    Ok(best.finish(cfg.max_iter, history))
}

/// `Σ w_j (X^{1/2} A_j X^{1/2})^{1/2}`.
fn wasserstein_map_inner(p: &MeanProblem, x_half: &SpdMatrix) -> Result<CMatrix> {
    let terms = p.terms().map(|(w, a)| Ok((w, a.sandwich(x_half)?.sqrt().into_matrix()))).collect::<Result<Vec<_>>>()?;
    Ok(weighted_sum(terms.into_iter(), p.dim()))
}

/// Relative residual `‖X - Σ w_j (X^{1/2} A_j X^{1/2})^{1/2}‖_F / ‖X‖_F`.
pub fn wasserstein_residual(p: &MeanProblem, x: &SpdMatrix) -> Result<f64> {
    let inner = wasserstein_map_inner(p, &x.sqrt())?;
    Ok((x.matrix() - inner).norm() / x.frobenius_norm())
}

/// Wasserstein barycenter by the map
/// `K(S) = S^{-1/2} (Σ w_j (S^{1/2} A_j S^{1/2})^{1/2})² S^{-1/2}`, started from the
/// identity unless configured otherwise.
pub fn wasserstein_barycenter(p: &MeanProblem, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let mut x = initial_point(p, &cfg.init, Init::Identity)?;
    let mut history = vec![x.trace()];
    let mut best = Best::new();
    for iteration in 0..=cfg.max_iter {
        let inner = SpdMatrix::from_computed(wasserstein_map_inner(p, &x.sqrt())?)?;
        let scale = x.frobenius_norm();
        let residual = (x.matrix() - inner.matrix()).norm() / scale;
        best.offer(&x, residual);
        if residual <= threshold(cfg, 1.0).max(ABSOLUTE_RESIDUAL_FLOOR / scale) {
            return Ok(SolverResult { value: x, residual, iterations: iteration, converged: true, trace_history: history });
        }
        if iteration == cfg.max_iter {
            break;
        }
        let inv_half = x.inv_sqrt();
        x = SpdMatrix::from_computed(inner.matrix() * inner.matrix())?.sandwich(&inv_half)?;
        history.push(x.trace());
    }
    Ok(best.finish(cfg.max_iter, history))
}

/// `Σ w_j (X #_t A_j)`.
fn lim_palfia_map(p: &MeanProblem, x: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    let inv_half = x.inv_sqrt();
    let terms = p.terms().map(|(w, a)| Ok((w, a.sandwich(&inv_half)?.powf(t).into_matrix()))).collect::<Result<Vec<_>>>()?;
    SpdMatrix::from_computed(weighted_sum(terms.into_iter(), p.dim()))?.sandwich(&x.sqrt())
}

/// Lim–Palfia power mean `P_t`: the fixed point of `X = Σ w_j (X #_t A_j)`,
/// `0 < t < 1`, iterated from the arithmetic mean by default.
pub fn lim_palfia_mean(p: &MeanProblem, t: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::BadParameter(format!("Lim–Palfia parameter {t} outside (0, 1)")));
    }
    let mut x = initial_point(p, &cfg.init, Init::Arithmetic)?;
    let mut history = vec![x.trace()];
    let mut best = Best::new();
    for iteration in 0..=cfg.max_iter {
        let next = lim_palfia_map(p, &x, t)?;
        let scale = x.frobenius_norm();
        let residual = (x.matrix() - next.matrix()).norm() / scale;
        best.offer(&x, residual);
        if residual <= threshold(cfg, 1.0).max(ABSOLUTE_RESIDUAL_FLOOR / scale) {
            return Ok(SolverResult { value: x, residual, iterations: iteration, converged: true, trace_history: history });
        }
        if iteration == cfg.max_iter {
            break;
        }
        x = next;
        history.push(x.trace());
    }
    Ok(best.finish(cfg.max_iter, history))
}

/// `δ(P_t, G)` for each `t` of a decreasing sequence in `(0, 1)`.
pub fn pt_limit_probe(p: &MeanProblem, t_sequence: &[f64], cfg: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    if t_sequence.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::BadParameter("t values must lie in (0, 1)".into()));
    }
    if t_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParameter("t values must be strictly decreasing".into()));
    }
    let g = cartan_mean(p, cfg)?.into_value()?;
    t_sequence
        .iter()
        .map(|&t| {
            let pt = lim_palfia_mean(p, t, cfg)?.into_value()?;
            Ok((t, cartan_distance(&pt, &g)?.value))
        })
        .collect()
}
