//! Riemannian SVRG, its restart wrapper, the full- and stochastic-gradient
//! baselines, and calculators for the step-size and epoch-length settings that
//! come with the convergence theorems.
//!
//! Every solver bills component-gradient accesses to its own [`IfoCounter`]
//! and reports a [`Trace`] of `(ifo_calls, objective_gap, grad_norm_sq)`
//! records. Runs are single threaded and deterministic given the seed;
//! independent runs may share a problem across threads.

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Tangent};
use crate::problems::FiniteSumProblem;

mod baselines;
mod params;
mod rsvrg;

pub use baselines::{estimate_sigma_sq, rgd, rsgd, RgdConfig, RsgdConfig, StepSchedule};
pub use params::{
    corollary1_params, theorem1_alpha, theorem1_q, theorem2_params, theorem4_params,
    Theorem4Params, TheoremParams, DEFAULT_MU0, DEFAULT_NU,
};
pub use rsvrg::{gd_svrg, rsvrg, OutputOption, RestartedTrace, RsvrgConfig};

/// How a tangent step is turned into the next iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// `x ← Exp_x(−η·v)`.
    #[default]
    Exp,
    /// `x ← R_x(−η·v)` with the manifold's retraction.
    Retraction,
}

/// Which iterates are recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Granularity {
    /// One record per outer epoch (full-gradient solvers: one per step).
    #[default]
    Epoch,
    /// One record per inner iterate.
    Step,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    /// Outer epoch (RSVRG) or step index (RGD, RSGD).
    pub epoch: usize,
    pub ifo_calls: u64,
    pub objective: f64,
    /// `objective − f*` when the optimum is known, else the raw objective.
    pub objective_gap: f64,
    /// `‖∇f(x)‖²`; `NaN` when gradient tracking is switched off.
    pub grad_norm_sq: f64,
}

#[derive(Clone, Debug)]
pub struct Trace<P> {
    pub records: Vec<TraceRecord>,
    /// Last iterate (`x̃^S` for RSVRG).
    pub final_point: P,
    /// Uniformly drawn inner iterate (RSVRG with option II only).
    pub sampled_output: Option<P>,
    /// Point returned according to the configured output option.
    pub output: P,
    pub ifo_calls: u64,
    /// Largest `‖v₀ − g‖` over epochs; zero when the correction cancels
    /// exactly at every anchor.
    pub anchor_residual: f64,
    /// Running minimum of `‖∇f(x_t)‖²` (RSGD with tracking on).
    pub min_grad_norm_sq: Option<Vec<f64>>,
}

impl<P> Trace<P> {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace has at least the initial record")
    }

    /// First IFO stamp at which the gap is at most `target`.
    pub fn ifo_to_reach(&self, target: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.objective_gap <= target)
            .map(|r| r.ifo_calls)
    }
}

/// Measurement and divergence guard shared by the solvers.
pub(crate) struct Recorder<'a, P: FiniteSumProblem> {
    problem: &'a P,
    f_star: Option<f64>,
    track_grad: bool,
    initial_gap: Option<f64>,
    pub records: Vec<TraceRecord>,
}

/// Runs abort once the gap exceeds this multiple of the starting gap.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

impl<'a, P: FiniteSumProblem> Recorder<'a, P> {
    pub fn new(problem: &'a P, f_star: Option<f64>, track_grad: bool) -> Self {
        Recorder {
            problem,
            f_star,
            track_grad,
            initial_gap: None,
            records: Vec::new(),
        }
    }

    pub fn measure(
        &mut self,
        x: &<P::M as Manifold>::Point,
        epoch: usize,
        step: usize,
        ifo_calls: u64,
    ) -> Result<TraceRecord> {
        let objective = self
            .problem
            .measure_value(x)
            .map_err(|e| abort(epoch, step, e))?;
        if !objective.is_finite() {
            return Err(Error::NumericalAbort {
                epoch,
                step,
                reason: format!("non-finite objective {objective}"),
            });
        }
        let gap = objective - self.f_star.unwrap_or(0.0);
        match self.initial_gap {
            None => self.initial_gap = Some(gap),
            Some(g0) if self.f_star.is_some() && g0 > 0.0 && gap > DIVERGENCE_FACTOR * g0 => {
                return Err(Error::NumericalAbort {
                    epoch,
                    step,
                    reason: format!("objective gap {gap:e} exceeds {DIVERGENCE_FACTOR:e} times the initial gap {g0:e}"),
                });
            }
            _ => {}
        }
        let grad_norm_sq = if self.track_grad {
            self.problem
                .measure_grad_norm_sq(x)
                .map_err(|e| abort(epoch, step, e))?
        } else {
            f64::NAN
        };
        Ok(TraceRecord {
            epoch,
            ifo_calls,
            objective,
            objective_gap: gap,
            grad_norm_sq,
        })
    }

    pub fn record(
        &mut self,
        x: &<P::M as Manifold>::Point,
        epoch: usize,
        step: usize,
        ifo_calls: u64,
    ) -> Result<()> {
        let r = self.measure(x, epoch, step, ifo_calls)?;
        self.records.push(r);
        Ok(())
    }
}

/// Wraps a geometry or evaluation failure with the solver position.
pub(crate) fn abort(epoch: usize, step: usize, e: Error) -> Error {
    match e {
        Error::NumericalAbort { .. } => e,
        other => Error::NumericalAbort {
            epoch,
            step,
            reason: other.to_string(),
        },
    }
}

/// One step `x ← Exp_x(−η·v)` (or the retraction), with a finiteness check.
pub(crate) fn take_step<M: Manifold>(
    manifold: &M,
    v: &Tangent<M>,
    eta: f64,
    rule: UpdateRule,
    epoch: usize,
    step: usize,
) -> Result<M::Point> {
    use crate::geometry::Ambient;
    if !v.components.coord_norm().is_finite() {
        return Err(Error::NumericalAbort {
            epoch,
            step,
            reason: "non-finite search direction".into(),
        });
    }
    let scaled = v.scale(-eta);
    match rule {
        UpdateRule::Exp => manifold.exp(&scaled),
        UpdateRule::Retraction => manifold.retract(&scaled),
    }
    .map_err(|e| abort(epoch, step, e))
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "step size must be positive, got {eta}"
        )));
    }
    Ok(())
}
