//! Evaluation of every catalog entry on one instance.

use std::cell::{Cell, OnceCell};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorization::{
    check_log_majorization_with, check_weak_log_majorization, check_weak_majorization, log_sum_noise, MajorizationVerdict, SpectrumVector,
    Status, LOG_NOISE_FACTOR,
};
use crate::means::{
    arithmetic_mean, cartan_mean, geometric_mean2, harmonic_mean, lim_palfia_mean, log_euclidean_mean, log_scale, power_mean_q,
    wasserstein_barycenter, wasserstein_geodesic, Init, MeanProblem, SolverConfig, SolverResult, WeightVector, CARTAN_PRECISION_FACTOR,
};
use crate::metrics::log_euclidean_distance;
use crate::spd::{product_sqrt, CMatrix, HermitianMatrix, SpdMatrix, C64};

use super::CheckId;

/// Relative tolerance for the identity checks.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Relative tolerance for each step of the trace history of the Wasserstein
/// iteration from the identity.
pub const TRACE_STEP_TOL: f64 = 1e-12;

/// Multiple of `ε κ(Ω)` below which a trace step is rounding rather than a drop.
pub const TRACE_NOISE_FACTOR: f64 = 8.0;

/// Compound orders whose Cartan mean cannot be resolved better than this are
/// reported as indeterminate without solving.
pub const COMPOUND_RESOLUTION_LIMIT: f64 = 1e-4;

/// Exponents of the limit probes.
pub const LIMIT_GRID: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

/// Parameters of the Lim–Palfia comparison.
pub const PT_GRID: [f64; 3] = [0.25, 0.5, 0.75];

/// Exponents for the monotonicity of `λ_j(Q_p)`; 0 stands for the log-Euclidean mean.
pub const POWER_GRID: [f64; 7] = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0];

/// One scalar inequality or identity inside a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub label: String,
    pub margin: f64,
    pub status: Status,
    /// False for parts that are open conjectures or known to fail.
    pub asserted: bool,
}

impl SubCheck {
    pub fn inequality(label: impl Into<String>, margin: f64, band: f64, asserted: bool) -> Self {
        SubCheck { label: label.into(), margin, status: Status::from_margin(margin, band), asserted }
    }

    /// Identity within `tol`: margin `tol - discrepancy`, holds iff nonnegative.
    pub fn tolerance(label: impl Into<String>, discrepancy: f64, tol: f64, asserted: bool) -> Self {
        let margin = tol - discrepancy;
        let status = if margin >= 0.0 { Status::Holds } else { Status::Violated };
        SubCheck { label: label.into(), margin, status, asserted }
    }

    pub fn verdict(label: impl Into<String>, v: MajorizationVerdict, asserted: bool) -> Self {
        SubCheck { label: label.into(), margin: v.margin, status: v.status, asserted }
    }
}

/// Sub-check outcomes plus whether every solver involved converged.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub subchecks: Vec<SubCheck>,
    pub converged: bool,
}

/// Lazily computed means of one instance, shared by the checks run on it.
pub(crate) struct Instance<'a> {
    pub p: &'a MeanProblem,
    pub cfg: SolverConfig,
    converged: Cell<bool>,
    cartan: OnceCell<SolverResult>,
    wasserstein: OnceCell<SolverResult>,
    log_euclidean: OnceCell<SpdMatrix>,
    q_half: OnceCell<SpdMatrix>,
}

impl<'a> Instance<'a> {
    pub fn new(p: &'a MeanProblem, cfg: SolverConfig) -> Self {
        Instance {
            p,
            cfg,
            converged: Cell::new(true),
            cartan: OnceCell::new(),
            wasserstein: OnceCell::new(),
            log_euclidean: OnceCell::new(),
            q_half: OnceCell::new(),
        }
    }

    fn note(&self, r: &SolverResult) {
        if !r.converged {
            self.converged.set(false);
        }
    }

    /// Runs a solver, recording its convergence.
    fn solve(&self, r: Result<SolverResult>) -> Result<SpdMatrix> {
        let r = r?;
        self.note(&r);
        Ok(r.value)
    }

    fn cached<'c>(&self, cell: &'c OnceCell<SolverResult>, f: impl FnOnce() -> Result<SolverResult>) -> Result<&'c SolverResult> {
        if cell.get().is_none() {
            let _ = cell.set(f()?);
        }
        let r = cell.get().expect("set above");
        self.note(r);
        Ok(r)
    }

    pub fn cartan(&self) -> Result<&SpdMatrix> {
        Ok(&self.cached(&self.cartan, || cartan_mean(self.p, &self.cfg))?.value)
    }

    pub fn wasserstein_result(&self) -> Result<&SolverResult> {
        self.cached(&self.wasserstein, || wasserstein_barycenter(self.p, &self.cfg))
    }

    pub fn wasserstein(&self) -> Result<&SpdMatrix> {
        Ok(&self.wasserstein_result()?.value)
    }

    pub fn log_euclidean(&self) -> Result<&SpdMatrix> {
        if self.log_euclidean.get().is_none() {
            let _ = self.log_euclidean.set(log_euclidean_mean(self.p)?);
        }
        Ok(self.log_euclidean.get().expect("set above"))
    }

    pub fn q_half(&self) -> Result<&SpdMatrix> {
        if self.q_half.get().is_none() {
            let _ = self.q_half.set(power_mean_q(self.p, 0.5)?);
        }
        Ok(self.q_half.get().expect("set above"))
    }

    pub fn converged(&self) -> bool {
        self.converged.get()
    }
}

/// `(λ_min(upper - lower)) / λ_max(upper + lower)`: nonnegative iff `lower <= upper`.
pub fn loewner_margin(lower: &CMatrix, upper: &CMatrix) -> f64 {
    let diff = HermitianMatrix::from_computed(upper - lower);
    let scale = HermitianMatrix::from_computed(upper + lower).max_eigenvalue().abs().max(f64::MIN_POSITIVE);
    diff.min_eigenvalue() / scale
}

/// `(rhs - lhs) / max(|lhs|, |rhs|)`: nonnegative iff `lhs <= rhs`.
pub fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

fn spectrum(a: &SpdMatrix) -> SpectrumVector {
    a.spectrum()
}

/// Log majorization of computed spectra; the full-product equality is allowed
/// the rounding noise of both log-determinants plus `formation`, and at least `band`.
fn log_majorization(x: &SpectrumVector, y: &SpectrumVector, formation: f64, band: f64) -> Result<MajorizationVerdict> {
    check_log_majorization_with(x, y, band, band.max(log_sum_noise(x) + log_sum_noise(y) + formation))
}

/// Log-determinant noise of a matrix built from `A` and `B`: whitening one by
/// the other loses up to `ε κ(A) κ(B)` of relative accuracy.
fn formation_noise(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    LOG_NOISE_FACTOR * f64::EPSILON * a.condition_number() * b.condition_number()
}

fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b
}

/// The first two matrices with their weights renormalized, and with equal weights.
pub(crate) fn leading_pair(id: CheckId, p: &MeanProblem) -> Result<(SpdMatrix, SpdMatrix, f64)> {
    if p.len() < 2 {
        return Err(Error::IncompatibleInstance { check: id.name().into(), reason: format!("needs two matrices, got {}", p.len()) });
    }
    let w = p.weights().as_slice();
    let total = w[0] + w[1];
    let t = if total > 0.0 { w[1] / total } else { 0.5 };
    Ok((p.matrices()[0].clone(), p.matrices()[1].clone(), t))
}

fn pair_problem(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<MeanProblem> {
    MeanProblem::new(WeightVector::pair(t)?, vec![a.clone(), b.clone()])
}

/// Ky Fan norm comparisons `‖x‖_(k) <= ‖y‖_(k)` for every `k`, plus the Frobenius
/// norm; asserted only for `k = 1`, `k = n` and Frobenius.
fn norm_comparisons(prefix: &str, x: &SpectrumVector, y: &SpectrumVector, band: f64, general_asserted: bool) -> Vec<SubCheck> {
    let n = x.len();
    let mut out: Vec<SubCheck> = (1..=n)
        .map(|k| {
            let asserted = k == 1 || k == n || general_asserted;
            SubCheck::inequality(format!("{prefix}kyfan_{k}"), relative_margin(x.ky_fan(k), y.ky_fan(k)), band, asserted)
        })
        .collect();
    out.push(SubCheck::inequality(format!("{prefix}schatten_2"), relative_margin(x.schatten(2.0), y.schatten(2.0)), band, true));
    out
}

fn fraction(p: f64) -> String {
    let sign = if p < 0.0 { "-" } else { "" };
    let inv = 1.0 / p.abs();
    if (inv - inv.round()).abs() < 1e-12 && inv.round() != 1.0 {
        format!("{sign}1/{}", inv.round())
    } else {
        format!("{p}")
    }
}

/// Decrease of a distance sequence, one sub-check per consecutive pair, scaled by `scale`.
fn decreasing(prefix: &str, grid: &[f64], dists: &[f64], scale: f64, band: f64) -> Vec<SubCheck> {
    grid.windows(2)
        .zip(dists.windows(2))
        .map(|(g, d)| SubCheck::inequality(format!("{prefix}{}>{}", fraction(g[0]), fraction(g[1])), (d[0] - d[1]) / scale, band, true))
        .collect()
}

pub(crate) fn evaluate(id: CheckId, inst: &Instance, band: f64) -> Result<Vec<SubCheck>> {
    use CheckId::*;
    let p = inst.p;
    let n = p.dim();
    Ok(match id {
        AghSandwich => {
            let h = harmonic_mean(p)?;
            let g = inst.cartan()?;
            let a = arithmetic_mean(p)?;
            vec![
                SubCheck::inequality("harmonic<=cartan", loewner_margin(h.matrix(), g.matrix()), band, true),
                SubCheck::inequality("cartan<=arithmetic", loewner_margin(g.matrix(), a.matrix()), band, true),
            ]
        }
        Thm1GLogmajL => {
            let (g, l) = (inst.cartan()?, inst.log_euclidean()?);
            let (sg, sl) = (spectrum(g), spectrum(l));
            let v = log_majorization(&sg, &sl, 0.0, band)?;
            let noise = band.max(log_sum_noise(&sg) + log_sum_noise(&sl));
            vec![
                SubCheck::verdict("log_majorization", v, true),
                SubCheck::tolerance("full_product", (g.log_det() - l.log_det()).abs(), noise, true),
            ]
        }
        Thm1LWlogmajOmega => {
            let v = check_weak_log_majorization(&spectrum(inst.log_euclidean()?), &spectrum(inst.wasserstein()?), band)?;
            vec![SubCheck::verdict("weak_log_majorization", v, true)]
        }
        Thm2P1 => {
            let q = inst.q_half()?;
            let r = inst.wasserstein_result()?;
            let mut out = vec![SubCheck::inequality("trace", relative_margin(q.trace(), r.value.trace()), band, true)];
            let from_identity = matches!(inst.cfg.init, Init::Default | Init::Identity);
            if from_identity && r.trace_history.len() >= 2 {
                let h = &r.trace_history;
                out.push(SubCheck::tolerance("first_iterate_is_q_half", (h[1] - q.trace()).abs() / q.trace(), IDENTITY_TOL, true));
                let worst_drop = h[1..].windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(0.0, f64::max);
                let floor = TRACE_NOISE_FACTOR * f64::EPSILON * r.value.condition_number();
                out.push(SubCheck::tolerance("trace_history_nondecreasing", worst_drop, TRACE_STEP_TOL.max(floor), true));
            }
            out
        }
        Thm2Pinf => {
            let (q, w) = (inst.q_half()?, inst.wasserstein()?);
            vec![SubCheck::inequality("largest_eigenvalue", relative_margin(q.max_eigenvalue(), w.max_eigenvalue()), band, true)]
        }
        Thm2P2M2 => {
            let (a, b, t) = leading_pair(id, p)?;
            let q = power_mean_q(&pair_problem(&a, &b, t)?, 0.5)?;
            let w = wasserstein_geodesic(&a, &b, t)?;
            vec![SubCheck::inequality("frobenius", relative_margin(q.frobenius_norm(), w.frobenius_norm()), band, true)]
        }
        Conj1WeakMaj => {
            let v = check_weak_majorization(&spectrum(inst.q_half()?), &spectrum(inst.wasserstein()?), band)?;
            vec![SubCheck::verdict("weak_majorization", v, false)]
        }
        Eq26Kyfan => {
            let (a, b, _) = leading_pair(id, p)?;
            let q = power_mean_q(&pair_problem(&a, &b, 0.5)?, 0.5)?;
            let w = wasserstein_geodesic(&a, &b, 0.5)?;
            norm_comparisons("", &spectrum(&q), &spectrum(&w), band, false)
        }
        Prop3Limit => {
            let l = inst.log_euclidean()?;
            let dists = LIMIT_GRID
                .iter()
                .map(|&e| {
                    let g = inst.solve(cartan_mean(&p.powf(e)?, &inst.cfg))?;
                    Ok(log_euclidean_distance(&g.powf(1.0 / e), l)?.value)
                })
                .collect::<Result<Vec<_>>>()?;
            decreasing("p=", &LIMIT_GRID, &dists, log_scale(p).max(f64::MIN_POSITIVE), band)
        }
        Prop4Monotone => {
            let g = inst.cartan()?;
            let s = g.max_eigenvalue();
            let normalized = p.scaled(1.0 / s)?;
            let g1 = g.scaled(1.0 / s)?;
            let g2 = inst.solve(cartan_mean(&normalized.powf(2.0)?, &inst.cfg))?;
            let gh = inst.solve(cartan_mean(&normalized.powf(0.5)?, &inst.cfg))?;
            vec![
                SubCheck::inequality("p=2", loewner_margin(g2.matrix(), g1.matrix()), band, true),
                SubCheck::inequality("p=1/2", loewner_margin(g1.matrix(), gh.matrix()), band, true),
            ]
        }
        Eq21Limit => {
            let l = inst.log_euclidean()?;
            let scale = log_scale(p).max(f64::MIN_POSITIVE);
            let mut out = Vec::new();
            for sign in [1.0, -1.0] {
                let grid: Vec<f64> = LIMIT_GRID.iter().map(|e| sign * e).collect();
                let dists = grid.iter().map(|&e| Ok(log_euclidean_distance(&power_mean_q(p, e)?, l)?.value)).collect::<Result<Vec<_>>>()?;
                out.extend(decreasing("p=", &grid, &dists, scale, band));
            }
            out
        }
        Eq29Compound => {
            let g = inst.cartan()?.clone();
            (1..=n)
                .map(|k| {
                    let compounds = p.map(|a| a.compound(k))?;
                    // The Cartan mean of the compounds is only resolvable to its precision floor.
                    let cond = compounds.matrices().iter().map(|c| c.condition_number()).fold(1.0, f64::max);
                    let resolution = CARTAN_PRECISION_FACTOR * f64::EPSILON * cond * log_scale(&compounds);
                    if resolution > COMPOUND_RESOLUTION_LIMIT {
                        return Ok(SubCheck { label: format!("k={k}"), margin: f64::NAN, status: Status::Indeterminate, asserted: true });
                    }
                    let rhs = inst.solve(cartan_mean(&compounds, &inst.cfg))?;
                    let lhs = g.compound(k)?;
                    let disc = (lhs.matrix() - rhs.matrix()).norm() / rhs.frobenius_norm();
                    Ok(SubCheck::tolerance(format!("k={k}"), disc, IDENTITY_TOL.max(resolution), true))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Eq34Char => {
            let omega_inv = inst.wasserstein()?.inverse();
            let mut sum = CMatrix::identity(n, n) * C64::from(-1.0);
            for (w, a) in p.terms() {
                sum += geometric_mean2(a, &omega_inv)?.matrix() * C64::from(w);
            }
            vec![SubCheck::tolerance("residual", sum.norm() / (n as f64).sqrt(), IDENTITY_TOL, true)]
        }
        Eq38Trace => {
            let (a, b, _) = leading_pair(id, p)?;
            let lhs = real_trace(&mul(a.sqrt().matrix(), b.sqrt().matrix()));
            let rhs = product_sqrt(&a, &b)?.trace().re;
            vec![SubCheck::inequality("trace", relative_margin(lhs, rhs), band, true)]
        }
        Prop5I => {
            let (a, b, _) = leading_pair(id, p)?;
            let m = mul(a.sqrt().matrix(), b.sqrt().matrix());
            let lhs = real_trace(&(&m * &m));
            let rhs = product_sqrt(&a, &b)?.frobenius_norm().powi(2);
            vec![SubCheck::inequality("trace", relative_margin(lhs, rhs), band, true)]
        }
        Prop5Ii => {
            let (a, b, _) = leading_pair(id, p)?;
            let lhs = real_trace(&mul(a.powf(1.5).matrix(), b.sqrt().matrix()));
            let rhs = real_trace(&mul(a.matrix(), product_sqrt(&a, &b)?.matrix()));
            vec![SubCheck::inequality("trace", relative_margin(lhs, rhs), band, true)]
        }
        Eq42Chain => {
            let (a, b, _) = leading_pair(id, p)?;
            let m = mul(a.sqrt().matrix(), b.sqrt().matrix());
            let lt = real_trace(&(&m * &m));
            let ab = real_trace(&mul(a.matrix(), b.matrix()));
            let top = product_sqrt(&a, &b)?.frobenius_norm().powi(2);
            vec![
                SubCheck::inequality("lieb_thirring", relative_margin(lt, ab), band, true),
                SubCheck::inequality("tr_ab<=tr_sqrt_ab_sqrt_ba", relative_margin(ab, top), band, true),
            ]
        }
        Eq43Logmaj => {
            let (a, b, _) = leading_pair(id, p)?;
            let (x, y) = (three_halves_half(&a, &b)?, a_times_sqrt_ab(&a, &b)?);
            vec![SubCheck::verdict(
                "log_majorization",
                log_majorization(&spectrum(&x), &spectrum(&y), formation_noise(&a, &b), band)?,
                true,
            )]
        }
        Eq46Det => {
            let (a, b, _) = leading_pair(id, p)?;
            let q = power_mean_q(&pair_problem(&a, &b, 0.5)?, 0.5)?;
            let w = wasserstein_geodesic(&a, &b, 0.5)?;
            vec![SubCheck::inequality("log_det", q.log_det() - w.log_det(), band, true)]
        }
        Eq49PtQt => {
            let mut out = Vec::new();
            for t in PT_GRID {
                let pt = inst.solve(lim_palfia_mean(p, t, &inst.cfg))?;
                let qt = power_mean_q(p, t)?;
                let (x, y) = (spectrum(&pt), spectrum(&qt));
                let tag = format!("t={} ", fraction(t));
                for (name, s) in [("schatten_1", 1.0), ("schatten_2", 2.0), ("schatten_inf", f64::INFINITY)] {
                    out.push(SubCheck::inequality(format!("{tag}{name}"), relative_margin(x.schatten(s), y.schatten(s)), band, true));
                }
                for k in 2..n {
                    out.push(SubCheck::inequality(format!("{tag}kyfan_{k}"), relative_margin(x.ky_fan(k), y.ky_fan(k)), band, false));
                }
            }
            out
        }
        Eq51Special => {
            let (a, b, _) = leading_pair(id, p)?;
            let pt = lim_palfia_half(&a, &b)?;
            let q = power_mean_q(&pair_problem(&a, &b, 0.5)?, 0.5)?;
            norm_comparisons("", &spectrum(&pt), &spectrum(&q), band, false)
        }
        Eq52Chain => {
            let (a, b, _) = leading_pair(id, p)?;
            let low = a_times_geometric(&a, &b)?;
            let (mid, high) = (three_halves_half(&a, &b)?, a_times_sqrt_ab(&a, &b)?);
            let noise = formation_noise(&a, &b);
            vec![
                SubCheck::verdict("first", log_majorization(&spectrum(&low), &spectrum(&mid), noise, band)?, true),
                SubCheck::verdict("second", log_majorization(&spectrum(&mid), &spectrum(&high), noise, band)?, true),
            ]
        }
        Eq53Traces => {
            let (a, b, _) = leading_pair(id, p)?;
            let low = real_trace(&mul(a.matrix(), geometric_mean2(&a, &b)?.matrix()));
            let mid = real_trace(&mul(a.powf(1.5).matrix(), b.sqrt().matrix()));
            let high = real_trace(&mul(a.matrix(), product_sqrt(&a, &b)?.matrix()));
            vec![
                SubCheck::inequality("first", relative_margin(low, mid), band, true),
                SubCheck::inequality("second", relative_margin(mid, high), band, true),
            ]
        }
        Eq54Lambda => {
            let log_spec = |m: &SpdMatrix| -> Vec<f64> { spectrum(m).values().iter().map(|v| v.ln()).collect() };
            let entrywise = |lo: &[f64], hi: &[f64]| lo.iter().zip(hi).map(|(x, y)| y - x).fold(f64::INFINITY, f64::min);
            let l = log_spec(inst.log_euclidean()?);
            let mut out = vec![SubCheck::inequality("l<=q_half", entrywise(&l, &log_spec(inst.q_half()?)), band, true)];
            let spectra = POWER_GRID
                .iter()
                .map(|&e| Ok(if e == 0.0 { l.clone() } else { log_spec(&power_mean_q(p, e)?) }))
                .collect::<Result<Vec<_>>>()?;
            for (g, s) in POWER_GRID.windows(2).zip(spectra.windows(2)) {
                let label = format!("q_{}<=q_{}", fraction(g[0]), fraction(g[1]));
                out.push(SubCheck::inequality(label, entrywise(&s[0], &s[1]), band, true));
            }
            out
        }
        OmegaLeArith => {
            let a = arithmetic_mean(p)?;
            vec![SubCheck::inequality("omega<=arithmetic", loewner_margin(inst.wasserstein()?.matrix(), a.matrix()), band, true)]
        }
    })
}

/// `A^{3/4} B^{1/2} A^{3/4}`, similar to `A^{3/2} B^{1/2}`.
fn three_halves_half(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    b.sqrt().sandwich(&a.powf(0.75))
}

/// `A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{1/2}`, similar to `A (AB)^{1/2}`.
fn a_times_sqrt_ab(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    let ah = a.sqrt();
    b.sandwich(&ah)?.sqrt().sandwich(&ah)
}

/// `A^{1/2} (A # B) A^{1/2}`, similar to `A² (A^{-1} B)^{1/2} = A (A # B)`.
fn a_times_geometric(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    geometric_mean2(a, b)?.sandwich(&a.sqrt())
}

/// `(A + B + 2 A # B) / 4`.
pub(crate) fn lim_palfia_half(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    let g = geometric_mean2(a, b)?;
    SpdMatrix::from_computed((a.matrix() + b.matrix() + g.matrix() * C64::from(2.0)) * C64::from(0.25))
}

pub(crate) fn run(id: CheckId, p: &MeanProblem, cfg: &SolverConfig, band: f64) -> Result<Evaluation> {
    let inst = Instance::new(p, cfg.clone());
    evaluate_on(id, &inst, band)
}

pub(crate) fn evaluate_on(id: CheckId, inst: &Instance, band: f64) -> Result<Evaluation> {
    let before = inst.converged();
    // Convergence is tracked per check: reset, evaluate, then restore the running flag.
    inst.converged.set(true);
    let subchecks = evaluate(id, inst, band);
    let converged = inst.converged();
    inst.converged.set(before && converged);
    Ok(Evaluation { subchecks: subchecks?, converged })
}
