//! See-saw lower bounds on the quantum value at fixed local dimensions.
//!
//! Each iteration updates the state (top eigenvector of the Bell operator),
//! then every Alice setting, then every Bob setting, in index order. Every
//! step solves its subproblem exactly and is only accepted when it does not
//! lower the objective, so values are non-decreasing within a restart.
//!
//! Restart `r` draws its initial model from stream `r` of a ChaCha8
//! generator keyed by the master seed. Restarts run in parallel; the best
//! value wins, with ties going to the lowest restart index, so the result
//! does not depend on scheduling.

mod init;
mod updates;

pub use init::{deterministic_model, is_projective, random_model, restart_rng, seeded_models};
pub use updates::{
    reduced_operators, update_measurement_binary, update_measurement_multi, update_state,
};

pub(crate) use init::gaussian;

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{vec_norm, Complex64, LinalgError, Party};
use crate::scenario::{model_value, BellFunctional, QuantumModel, ScenarioError};

const STATE_NORM_TOL: f64 = 1e-10;
const PROJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeesawError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("party {party}, setting {setting}: expected {expected} outcomes, found {found}")]
    WrongOutcomeCount {
        party: Party,
        setting: usize,
        expected: &'static str,
        found: usize,
    },
    #[error("every restart failed; first failure: {0}")]
    AllRestartsFailed(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once a full iteration improves the objective by less than this.
    pub convergence_tol: f64,
    pub seed: u64,
    /// Keep this state fixed and optimize measurements only.
    pub fixed_state: Option<Vec<Complex64>>,
    /// Require projective starting models; the updates keep them projective.
    pub projective_only: bool,
    pub pair_pass_count: usize,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iterations: 500,
            convergence_tol: 1e-10,
            seed: 0,
            fixed_state: None,
            projective_only: false,
            pair_pass_count: 3,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self, dim_a: usize, dim_b: usize) -> Result<(), SeesawError> {
        let fail = |msg: String| Err(SeesawError::ConfigInvalid(msg));
        if dim_a < 2 || dim_b < 2 {
            return fail(format!(
                "local dimensions must be at least 2, got {dim_a}x{dim_b}"
            ));
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1".into());
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        if self.pair_pass_count == 0 {
            return fail("pair_pass_count must be at least 1".into());
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return fail(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            ));
        }
        if let Some(state) = &self.fixed_state {
            if state.len() != dim_a * dim_b {
                return fail(format!(
                    "fixed state has {} amplitudes, expected {}",
                    state.len(),
                    dim_a * dim_b
                ));
            }
            let norm = vec_norm(state);
            if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > STATE_NORM_TOL {
                return fail(format!("fixed state has norm {norm}"));
            }
        }
        Ok(())
    }
}

/// Outcome of one restart. `value` is `None` when the restart failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub index: usize,
    /// Started from a caller-supplied model rather than a random one.
    pub seeded: bool,
    pub value: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawResult {
    pub best_value: f64,
    pub best_model: QuantumModel,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

impl SeesawResult {
    /// Final values of the restarts that completed.
    pub fn per_restart_values(&self) -> Vec<f64> {
        self.restarts.iter().filter_map(|r| r.value).collect()
    }

    pub fn iterations_used(&self) -> Vec<usize> {
        self.restarts.iter().map(|r| r.iterations).collect()
    }

    pub fn converged_flags(&self) -> Vec<bool> {
        self.restarts.iter().map(|r| r.converged).collect()
    }

    pub fn failed_count(&self) -> usize {
        self.restarts.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Which update produced an [`UpdateEvent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStep {
    State,
    Measurement { party: Party, setting: usize },
}

/// Reported to an observer after every single update.
#[derive(Debug)]
pub struct UpdateEvent<'a> {
    pub restart: usize,
    pub iteration: usize,
    pub step: UpdateStep,
    pub value_before: f64,
    pub value_after: f64,
    pub model: &'a QuantumModel,
}

pub type Observer<'o> = &'o (dyn Fn(&UpdateEvent<'_>) + Sync);

pub fn seesaw(
    f: &BellFunctional,
    dim_a: usize,
    dim_b: usize,
    cfg: &SeesawConfig,
) -> Result<SeesawResult, SeesawError> {
    run(f, dim_a, dim_b, cfg, &[], None)
}

/// Like [`seesaw`], with extra restarts started from the given models.
/// They are indexed after the random restarts.
pub fn seesaw_with_seeds(
    f: &BellFunctional,
    dim_a: usize,
    dim_b: usize,
    cfg: &SeesawConfig,
    seeds: &[QuantumModel],
) -> Result<SeesawResult, SeesawError> {
    run(f, dim_a, dim_b, cfg, seeds, None)
}

/// Like [`seesaw_with_seeds`], calling `observer` after every update.
pub fn seesaw_observed(
    f: &BellFunctional,
    dim_a: usize,
    dim_b: usize,
    cfg: &SeesawConfig,
    seeds: &[QuantumModel],
    observer: Observer<'_>,
) -> Result<SeesawResult, SeesawError> {
    run(f, dim_a, dim_b, cfg, seeds, Some(observer))
}

fn run(
    f: &BellFunctional,
    dim_a: usize,
    dim_b: usize,
    cfg: &SeesawConfig,
    seeds: &[QuantumModel],
    observer: Option<Observer<'_>>,
) -> Result<SeesawResult, SeesawError> {
    cfg.validate(dim_a, dim_b)?;
    for (k, m) in seeds.iter().enumerate() {
        m.check_scenario(f.scenario())?;
        if m.dim_a() != dim_a || m.dim_b() != dim_b {
            return Err(SeesawError::ConfigInvalid(format!(
                "seed model {k} is {}x{}, expected {dim_a}x{dim_b}",
                m.dim_a(),
                m.dim_b()
            )));
        }
        if cfg.projective_only && !is_projective(m, PROJECTIVE_TOL) {
            return Err(SeesawError::ConfigInvalid(format!(
                "seed model {k} is not projective but projective_only is set"
            )));
        }
    }
    let total = cfg.restarts + seeds.len();
    let outcomes: Vec<(RestartSummary, Option<QuantumModel>)> = (0..total)
        .into_par_iter()
        .map(|index| {
            let seeded = index >= cfg.restarts;
            let start = if seeded {
                seeds[index - cfg.restarts].clone()
            } else {
                random_model(f.scenario(), dim_a, dim_b, cfg.seed, index)
            };
            match run_restart(f, cfg, index, start, observer) {
                Ok(done) => (
                    RestartSummary {
                        index,
                        seeded,
                        value: Some(done.value),
                        iterations: done.iterations,
                        converged: done.converged,
                        error: None,
                    },
                    Some(done.model),
                ),
                Err(e) => (
                    RestartSummary {
                        index,
                        seeded,
                        value: None,
                        iterations: 0,
                        converged: false,
                        error: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();

    let mut best: Option<(f64, usize)> = None;
    for (summary, _) in &outcomes {
        if let Some(v) = summary.value {
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, summary.index));
            }
        }
    }
    let Some((best_value, best_restart)) = best else {
        let first = outcomes
            .iter()
            .find_map(|(s, _)| s.error.clone())
            .unwrap_or_default();
        return Err(SeesawError::AllRestartsFailed(first));
    };
    let mut restarts = Vec::with_capacity(total);
    let mut best_model = None;
    for (summary, model) in outcomes {
        if summary.index == best_restart {
            best_model = model;
        }
        restarts.push(summary);
    }
    Ok(SeesawResult {
        best_value,
        best_model: best_model.expect("best restart has a model"),
        best_restart,
        restarts,
    })
}

struct RestartRun {
    model: QuantumModel,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(
    f: &BellFunctional,
    cfg: &SeesawConfig,
    restart: usize,
    start: QuantumModel,
    observer: Option<Observer<'_>>,
) -> Result<RestartRun, SeesawError> {
    let mut model = match &cfg.fixed_state {
        Some(state) => start.with_state(state.clone())?,
        None => start,
    };
    let mut value = model_value(f, &model)?;
    let sc = f.scenario();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let before_iteration = value;
        let apply = |model: &mut QuantumModel,
                     step: UpdateStep,
                     next: QuantumModel|
         -> Result<(), SeesawError> {
            if let Some(obs) = observer {
                let before = model_value(f, model)?;
                let after = model_value(f, &next)?;
                obs(&UpdateEvent {
                    restart,
                    iteration: iterations,
                    step,
                    value_before: before,
                    value_after: after,
                    model: &next,
                });
            }
            *model = next;
            Ok(())
        };
        if cfg.fixed_state.is_none() {
            let next = update_state(f, &model)?;
            apply(&mut model, UpdateStep::State, next)?;
        }
        for party in [Party::A, Party::B] {
            for (setting, &v) in sc.outcomes(party).iter().enumerate() {
                let next = if v == 2 {
                    update_measurement_binary(f, &model, party, setting)?
                } else {
                    update_measurement_multi(f, &model, party, setting, cfg.pair_pass_count)?
                };
                apply(&mut model, UpdateStep::Measurement { party, setting }, next)?;
            }
        }
        value = model_value(f, &model)?;
        if value - before_iteration < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    // Re-validate the final model so reported optima are always feasible.
    let model = QuantumModel::new(
        model.dim_a(),
        model.dim_b(),
        model.state().to_vec(),
        model.povms(Party::A).to_vec(),
        model.povms(Party::B).to_vec(),
    )?;
    Ok(RestartRun {
        model,
        value,
        iterations,
        converged,
    })
}
