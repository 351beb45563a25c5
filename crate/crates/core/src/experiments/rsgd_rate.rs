//! Horizon sweep for RSGD with the `c/√T` step size on a nonconvex problem.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::Manifold;
use crate::problems::FiniteSumProblem;
use crate::rng::derive_seed;
use crate::solvers::{estimate_sigma_sq, rsgd, RsgdConfig, StepSchedule};

use super::stats::linear_fit;

#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub horizon: usize,
    /// `min_t` of the seed-averaged `‖∇f(x_t)‖²`.
    pub min_mean_grad_sq: f64,
}

/// Runs RSGD for each horizon `T` and seed, averages `‖∇f(x_t)‖²` over seeds
/// at every `t`, and keeps the minimum over `t ≤ T`.
///
/// The step constant is fitted once at `x0` from the initial gap, the
/// smoothness bound and the second moment of the component gradients.
pub fn rsgd_rate_study<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    f_star: f64,
    horizons: &[usize],
    seeds: usize,
    base_seed: u64,
) -> Result<Vec<RatePoint>> {
    let gap0 = problem.full_value(x0)? - f_star;
    let schedule = StepSchedule::horizon_constant(
        gap0,
        problem.smoothness(),
        estimate_sigma_sq(problem, x0)?,
    )?;
    horizons
        .iter()
        .map(|&horizon| {
            let curves = (0..seeds)
                .into_par_iter()
                .map(|k| {
                    let cfg = RsgdConfig::new(schedule, horizon, derive_seed(base_seed, k as u64));
                    track_grad_curve(problem, x0, &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            let min_mean = (0..=horizon)
                .map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / seeds as f64)
                .fold(f64::INFINITY, f64::min);
            Ok(RatePoint {
                horizon,
                min_mean_grad_sq: min_mean,
            })
        })
        .collect()
}

/// `‖∇f(x_t)‖²` along one RSGD run, `t = 0..=T`.
fn track_grad_curve<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    cfg: &RsgdConfig,
) -> Result<Vec<f64>> {
    let mut c = cfg.clone();
    c.record_every = 1;
    c.track_grad = true;
    let trace = rsgd(problem, x0, &c)?;
    Ok(trace.records.iter().map(|r| r.grad_norm_sq).collect())
}

/// Slope of `log(min_mean_grad_sq)` against `log T`.
pub fn rate_slope(points: &[RatePoint]) -> Option<f64> {
    let x: Vec<f64> = points.iter().map(|p| (p.horizon as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.min_mean_grad_sq.ln()).collect();
    linear_fit(&x, &y).map(|f| f.1)
}
