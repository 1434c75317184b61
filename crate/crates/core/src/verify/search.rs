//! Random search for instances where relations that are known to fail, or are
//! only conjectured, break down.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorization::Status;
use crate::means::{cartan_mean, harmonic_mean, wasserstein_barycenter, MeanProblem, SolverConfig};
use crate::spd::{standard_normal, CMatrix, RandomEnsembleConfig, Substream, C64};

use super::checks::{self, loewner_margin, Evaluation, SubCheck};
use super::{digest, finalize, trial_instance, CheckId, CheckResult};

/// Relative sizes of the rank-one bumps in the monotonicity search.
pub const BUMP_SIZES: [f64; 3] = [0.01, 0.1, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    /// `A_j <= A_j'` but not `Ω <= Ω'`.
    OmegaMonotonicity,
    /// `G <= Ω` fails.
    GLeqOmega,
    /// `H <= Ω` fails.
    OmegaGeHarmonic,
    Conj1WeakMaj,
    Eq26Kyfan,
    /// Ky Fan norms of `P_t` against `Q_t`.
    Eq49GeneralNorms,
    OmegaLeArith,
}

impl SearchTarget {
    pub const ALL: [SearchTarget; 7] = [
        SearchTarget::OmegaMonotonicity,
        SearchTarget::GLeqOmega,
        SearchTarget::OmegaGeHarmonic,
        SearchTarget::Conj1WeakMaj,
        SearchTarget::Eq26Kyfan,
        SearchTarget::Eq49GeneralNorms,
        SearchTarget::OmegaLeArith,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearchTarget::OmegaMonotonicity => "omega_monotonicity",
            SearchTarget::GLeqOmega => "g_leq_omega",
            SearchTarget::OmegaGeHarmonic => "omega_ge_harmonic",
            SearchTarget::Conj1WeakMaj => "conj1_weak_maj",
            SearchTarget::Eq26Kyfan => "eq26_kyfan",
            SearchTarget::Eq49GeneralNorms => "eq49_general_norms",
            SearchTarget::OmegaLeArith => "omega_le_arith",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        SearchTarget::ALL.into_iter().find(|t| t.name() == key).ok_or_else(|| Error::Unknown { kind: "search target", name: s.to_string() })
    }

    /// Targets that probe open conjectures; hits there call for closer scrutiny.
    pub fn conjecture(self) -> bool {
        matches!(self, SearchTarget::Conj1WeakMaj | SearchTarget::Eq26Kyfan | SearchTarget::Eq49GeneralNorms)
    }
}

/// `A_j + ε λ_max(A_j) v v*` for a random coordinate `j` with positive weight,
/// `ε` from [`BUMP_SIZES`] and a random unit vector `v`.
fn bumped(p: &MeanProblem, stream: &Substream, field: crate::spd::ScalarField) -> Result<(MeanProblem, usize, f64)> {
    let mut rng = stream.rng();
    let candidates: Vec<usize> = (0..p.len()).filter(|&j| p.weights().as_slice()[j] > 0.0).collect();
    let j = candidates[rng.random_range(0..candidates.len())];
    let eps = BUMP_SIZES[rng.random_range(0..BUMP_SIZES.len())];
    let n = p.dim();
    let v = CMatrix::from_fn(n, 1, |_, _| standard_normal(&mut rng, field));
    let v = &v / C64::from(v.norm());
    let a = &p.matrices()[j];
    let bump = (&v * v.adjoint()) * C64::from(eps * a.max_eigenvalue());
    let mut matrices = p.matrices().to_vec();
    matrices[j] = crate::spd::SpdMatrix::from_computed(a.matrix() + bump)?;
    Ok((MeanProblem::new(p.weights().clone(), matrices)?, j, eps))
}

fn omega_monotonicity(p: &MeanProblem, q: &MeanProblem, cfg: &SolverConfig, band: f64) -> Result<Evaluation> {
    let w = wasserstein_barycenter(p, cfg)?;
    let w2 = wasserstein_barycenter(q, cfg)?;
    Ok(Evaluation {
        subchecks: vec![SubCheck::inequality("omega<=omega_bumped", loewner_margin(w.value.matrix(), w2.value.matrix()), band, false)],
        converged: w.converged && w2.converged,
    })
}

fn ordered_pair(target: SearchTarget, p: &MeanProblem, cfg: &SolverConfig, band: f64) -> Result<Evaluation> {
    let w = wasserstein_barycenter(p, cfg)?;
    let (label, lower, converged) = match target {
        SearchTarget::GLeqOmega => {
            let g = cartan_mean(p, cfg)?;
            ("cartan<=omega", g.value, g.converged)
        }
        _ => ("harmonic<=omega", harmonic_mean(p)?, true),
    };
    Ok(Evaluation {
        subchecks: vec![SubCheck::inequality(label, loewner_margin(lower.matrix(), w.value.matrix()), band, false)],
        converged: converged && w.converged,
    })
}

fn search_trial(target: SearchTarget, ensemble: &RandomEnsembleConfig, t: usize, cfg: &SolverConfig, band: f64) -> Option<CheckResult> {
    let p = trial_instance(ensemble, t).ok()?;
    let conjecture = target.conjecture();
    let mut r = match target {
        SearchTarget::OmegaMonotonicity => {
            let stream = Substream::root(ensemble.seed).child(t as u64).child(2);
            let (q, j, eps) = bumped(&p, &stream, ensemble.field).ok()?;
            let mut r = finalize(target.name(), digest(&(&p, &q)), |c| omega_monotonicity(&p, &q, c, band), cfg, band, conjecture);
            r.details.push(SubCheck { label: format!("bump j={} eps={eps}", j + 1), margin: eps, status: Status::Holds, asserted: false });
            r
        }
        SearchTarget::GLeqOmega | SearchTarget::OmegaGeHarmonic => {
            finalize(target.name(), digest(&p), |c| ordered_pair(target, &p, c, band), cfg, band, conjecture)
        }
        SearchTarget::Conj1WeakMaj | SearchTarget::Eq26Kyfan | SearchTarget::Eq49GeneralNorms | SearchTarget::OmegaLeArith => {
            let id = match target {
                SearchTarget::Conj1WeakMaj => CheckId::Conj1WeakMaj,
                SearchTarget::Eq26Kyfan => CheckId::Eq26Kyfan,
                SearchTarget::Eq49GeneralNorms => CheckId::Eq49PtQt,
                _ => CheckId::OmegaLeArith,
            };
            if id.pairwise() && p.len() < 2 {
                return None;
            }
            finalize(target.name(), digest(&p), |c| checks::run(id, &p, c, band), cfg, band, conjecture)
        }
    };
    r.trial = Some(t);
    (r.status == Status::Violated).then_some(r)
}

/// Searches `trials` seeded instances for violations of `target`.
///
/// Only violations that persist under re-verification at a hundredfold tighter
/// solver tolerance are returned, in trial order. Hits on conjecture targets
/// carry `escalate = true`.
pub fn search_counterexamples(
    target: SearchTarget,
    ensemble: &RandomEnsembleConfig,
    trials: usize,
    cfg: &SolverConfig,
    band: f64,
) -> Result<Vec<CheckResult>> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    ensemble.validate()?;
    cfg.validate()?;
    let hits: Vec<Option<CheckResult>> = (0..trials).into_par_iter().map(|t| search_trial(target, ensemble, t, cfg, band)).collect();
    Ok(hits.into_iter().flatten().collect())
}
