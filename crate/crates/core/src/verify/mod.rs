//! Executable catalog of the inequalities, limits and identities relating the
//! means, run over supplied or randomly generated instances.
//!
//! Every check reduces to scalar sub-checks with a margin that is nonnegative
//! when the relation holds. Operator inequalities `X <= Y` use
//! `λ_min(Y - X) / λ_max(Y + X)`; scalar ones use `(rhs - lhs) / max(|lhs|, |rhs|)`;
//! majorizations use the log- or sum-scale margins of [`crate::majorization`].
//! A violated result is re-run at a hundredfold tighter solver tolerance and only
//! kept as violated if the violation persists.

mod catalog;
mod checks;
mod search;

pub use catalog::{CheckId, Suite, SUITE_NAMES};
pub use checks::{
    loewner_margin, relative_margin, Evaluation, SubCheck, COMPOUND_RESOLUTION_LIMIT, IDENTITY_TOL, LIMIT_GRID, POWER_GRID, PT_GRID,
    TRACE_NOISE_FACTOR, TRACE_STEP_TOL,
};
pub use search::{search_counterexamples, SearchTarget};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::majorization::Status;
use crate::means::{MeanProblem, SolverConfig, WeightVector};
use crate::spd::{random_spd_from, random_weights, RandomEnsembleConfig, Substream};

/// Factor by which the solver tolerance is divided when re-verifying a violation.
pub const REVERIFY_FACTOR: f64 = 100.0;

/// The tightened re-run attached to a violated result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reverification {
    pub residual_tol: f64,
    pub status: Status,
    pub margin: f64,
    pub converged: bool,
    /// True when the re-run margin is still at most `-band`.
    pub persists: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub instance_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub status: Status,
    pub margin: f64,
    pub converged: bool,
    /// A violated sub-check that the catalog asserts as a theorem.
    pub asserted_violation: bool,
    /// A violated conjecture: reported for inspection, flagged for closer scrutiny.
    pub escalate: bool,
    pub details: Vec<SubCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverification: Option<Reverification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn aggregate(subchecks: &[SubCheck]) -> (Status, f64) {
    let status = Status::combine(subchecks.iter().map(|s| s.status));
    let margin = subchecks.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    (status, margin)
}

/// Short hex digest of any serializable instance description.
pub fn digest(value: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(value).expect("instance serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

/// Turns an evaluation into a result, re-running it at tighter tolerance when
/// it reports a violation. `conjecture` marks every violation for escalation.
pub(crate) fn finalize(
    name: &str,
    instance_digest: String,
    eval: impl Fn(&SolverConfig) -> Result<Evaluation>,
    cfg: &SolverConfig,
    band: f64,
    conjecture: bool,
) -> CheckResult {
    let base = CheckResult {
        check_id: name.to_string(),
        instance_digest,
        trial: None,
        status: Status::Indeterminate,
        margin: f64::NAN,
        converged: false,
        asserted_violation: false,
        escalate: false,
        details: Vec::new(),
        reverification: None,
        error: None,
    };
    let first = match eval(cfg) {
        Ok(e) => e,
        Err(e) => return CheckResult { error: Some(e.to_string()), ..base },
    };
    let (mut status, margin) = aggregate(&first.subchecks);
    if !first.converged {
        status = Status::Indeterminate;
    }
    let mut result = CheckResult { status, margin, converged: first.converged, details: first.subchecks, ..base };
    if status != Status::Violated {
        return result;
    }
    let tight = cfg.tightened(REVERIFY_FACTOR);
    let record = match eval(&tight) {
        Ok(again) => {
            let (s, m) = aggregate(&again.subchecks);
            Reverification { residual_tol: tight.residual_tol, status: s, margin: m, converged: again.converged, persists: m <= -band }
        }
        Err(_) => Reverification {
            residual_tol: tight.residual_tol,
            status: Status::Indeterminate,
            margin: f64::NAN,
            converged: false,
            persists: false,
        },
    };
    if record.persists {
        let violated = result.details.iter().filter(|s| s.status == Status::Violated);
        result.asserted_violation = violated.clone().any(|s| s.asserted);
        result.escalate = conjecture || violated.clone().any(|s| !s.asserted);
    } else {
        result.status = Status::Indeterminate;
    }
    result.reverification = Some(record);
    result
}

/// Runs one check on one instance.
///
/// Instances that do not fit the check are an error; a solver that fails to
/// converge makes the result indeterminate.
pub fn run_check(id: CheckId, p: &MeanProblem, cfg: &SolverConfig, band: f64) -> Result<CheckResult> {
    cfg.validate()?;
    if id.pairwise() {
        checks::leading_pair(id, p)?;
    }
    Ok(finalize(id.name(), digest(p), |c| checks::run(id, p, c, band), cfg, band, id.exploratory()))
}

/// The instance of trial `index` of an ensemble: matrices from substream 0 and
/// simplex weights from substream 1 of the trial stream.
pub fn trial_instance(ensemble: &RandomEnsembleConfig, index: usize) -> Result<MeanProblem> {
    let stream = Substream::root(ensemble.seed).child(index as u64);
    let matrices = random_spd_from(&stream.child(0), ensemble)?;
    let weights = random_weights(&mut stream.child(1).rng(), ensemble.m);
    MeanProblem::new(WeightVector::new(weights)?, matrices)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub holds: usize,
    pub violated: usize,
    pub indeterminate: usize,
}

impl StatusCounts {
    fn add(&mut self, s: Status) {
        match s {
            Status::Holds => self.holds += 1,
            Status::Violated => self.violated += 1,
            Status::Indeterminate => self.indeterminate += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.holds + self.violated + self.indeterminate
    }
}

/// Per-check aggregate over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check_id: CheckId,
    pub exploratory: bool,
    pub status_counts: StatusCounts,
    pub worst_margin: Option<f64>,
    pub worst_instance_digest: Option<String>,
    pub worst_trial: Option<usize>,
    pub escalations: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub residual_tol: f64,
    pub max_iter: usize,
    pub band: f64,
    pub reverify_factor: f64,
}

/// One row of the per-trial margin export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMargin {
    pub trial: usize,
    pub check_id: CheckId,
    pub status: Status,
    pub margin: f64,
    pub instance_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub ensemble: RandomEnsembleConfig,
    pub trials: usize,
    pub seed: u64,
    pub provenance: Provenance,
    pub wall_clock_seconds: f64,
    pub asserted_violations: usize,
    pub results: Vec<CheckSummary>,
    pub violations: Vec<CheckResult>,
    #[serde(skip)]
    pub trial_margins: Vec<TrialMargin>,
}

impl Report {
    /// Copy with the wall-clock field zeroed, for reproducibility comparisons.
    pub fn without_wall_clock(&self) -> Report {
        Report { wall_clock_seconds: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `trial,check_id,status,margin,instance_digest`, one line per trial and check.
    pub fn margins_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(["trial", "check_id", "status", "margin", "instance_digest"]).map_err(|e| Error::Format(e.to_string()))?;
        for r in &self.trial_margins {
            w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Runs every check of `suite` on `trials` seeded instances.
///
/// Trials run in parallel on the current rayon pool; each derives its instance
/// from `(ensemble.seed, trial index)` and results are ordered by trial, so the
/// report does not depend on scheduling. Failures on a trial are counted as
/// indeterminate.
pub fn run_suite(
    suite: &Suite,
    ensemble: &RandomEnsembleConfig,
    trials: usize,
    cfg: &SolverConfig,
    band: f64,
    version: &str,
) -> Result<Report> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    ensemble.validate()?;
    cfg.validate()?;
    let started = Instant::now();
    let per_trial: Vec<Vec<CheckResult>> = (0..trials).into_par_iter().map(|t| run_trial(suite, ensemble, t, cfg, band)).collect();

    let mut results: Vec<CheckSummary> = suite
        .checks
        .iter()
        .map(|&id| CheckSummary {
            check_id: id,
            exploratory: id.exploratory(),
            status_counts: StatusCounts::default(),
            worst_margin: None,
            worst_instance_digest: None,
            worst_trial: None,
            escalations: 0,
            errors: 0,
        })
        .collect();
    let mut violations = Vec::new();
    let mut trial_margins = Vec::new();
    for (t, row) in per_trial.into_iter().enumerate() {
        for (summary, r) in results.iter_mut().zip(row) {
            summary.status_counts.add(r.status);
            summary.escalations += r.escalate as usize;
            summary.errors += r.error.is_some() as usize;
            if !r.margin.is_nan() && summary.worst_margin.is_none_or(|w| r.margin < w) {
                summary.worst_margin = Some(r.margin);
                summary.worst_instance_digest = Some(r.instance_digest.clone());
                summary.worst_trial = Some(t);
            }
            trial_margins.push(TrialMargin {
                trial: t,
                check_id: summary.check_id,
                status: r.status,
                margin: r.margin,
                instance_digest: r.instance_digest.clone(),
            });
            if r.status == Status::Violated {
                violations.push(r);
            }
        }
    }
    Ok(Report {
        suite: suite.name.clone(),
        ensemble: ensemble.clone(),
        trials,
        seed: ensemble.seed,
        provenance: Provenance {
            version: version.to_string(),
            residual_tol: cfg.residual_tol,
            max_iter: cfg.max_iter,
            band,
            reverify_factor: REVERIFY_FACTOR,
        },
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        asserted_violations: violations.iter().filter(|v| v.asserted_violation).count(),
        results,
        violations,
        trial_margins,
    })
}

fn run_trial(suite: &Suite, ensemble: &RandomEnsembleConfig, t: usize, cfg: &SolverConfig, band: f64) -> Vec<CheckResult> {
    let p = match trial_instance(ensemble, t) {
        Ok(p) => p,
        Err(e) => {
            return suite.checks.iter().map(|id| failed(id.name(), String::new(), t, &e)).collect();
        }
    };
    let instance_digest = digest(&p);
    let inst = checks::Instance::new(&p, cfg.clone());
    suite
        .checks
        .iter()
        .map(|&id| {
            if id.pairwise() {
                if let Err(e) = checks::leading_pair(id, &p) {
                    return failed(id.name(), instance_digest.clone(), t, &e);
                }
            }
            // The shared instance serves the default tolerance; the tightened re-run gets its own.
            let eval = |c: &SolverConfig| {
                if c.residual_tol == cfg.residual_tol {
                    checks::evaluate_on(id, &inst, band)
                } else {
                    checks::run(id, &p, c, band)
                }
            };
            let mut r = finalize(id.name(), instance_digest.clone(), eval, cfg, band, id.exploratory());
            r.trial = Some(t);
            r
        })
        .collect()
}

fn failed(name: &str, instance_digest: String, trial: usize, e: &Error) -> CheckResult {
    CheckResult {
        check_id: name.to_string(),
        instance_digest,
        trial: Some(trial),
        status: Status::Indeterminate,
        margin: f64::NAN,
        converged: false,
        asserted_violation: false,
        escalate: false,
        details: Vec::new(),
        reverification: None,
        error: Some(e.to_string()),
    }
}
