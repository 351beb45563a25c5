use crate::error::{Error, Result};
use crate::geometry::Manifold;
use crate::problems::{FiniteSumProblem, Ifo, IfoCounter};
use crate::rng::IndexStream;

use super::{abort, check_eta, take_step, Recorder, Trace, UpdateRule};

/// Riemannian full gradient descent settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RgdConfig {
    pub eta: f64,
    pub steps: usize,
    pub update: UpdateRule,
    pub f_star: Option<f64>,
    pub track_grad: bool,
}

impl RgdConfig {
    pub fn new(eta: f64, steps: usize) -> Self {
        RgdConfig {
            eta,
            steps,
            update: UpdateRule::Exp,
            f_star: None,
            track_grad: true,
        }
    }
}

/// `x ← Exp_x(−η·∇f(x))` for `steps` iterations, `n` IFO calls each.
pub fn rgd<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    cfg: &RgdConfig,
) -> Result<Trace<<P::M as Manifold>::Point>> {
    check_eta(cfg.eta)?;
    let counter = IfoCounter::new();
    let ifo = Ifo::new(problem, &counter);
    let mut rec = Recorder::new(problem, cfg.f_star, cfg.track_grad);
    rec.record(x0, 0, 0, 0)?;
    let mut x = x0.clone();
    for t in 1..=cfg.steps {
        let g = ifo.full_grad(&x).map_err(|e| abort(t, 0, e))?;
        x = take_step(problem.manifold(), &g, cfg.eta, cfg.update, t, 0)?;
        rec.record(&x, t, 0, counter.calls())?;
    }
    Ok(Trace {
        records: rec.records,
        output: x.clone(),
        final_point: x,
        sampled_output: None,
        ifo_calls: counter.calls(),
        anchor_residual: 0.0,
        min_grad_norm_sq: None,
    })
}

/// Step-size rule for [`rsgd`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `η = c/√T` for a horizon of `T` steps.
    InverseSqrtHorizon {
        c: f64,
    },
    /// `η_t = η₀/(1 + decay·t)`.
    Decaying {
        eta0: f64,
        decay: f64,
    },
}

impl StepSchedule {
    /// `c = √(2(f(x⁰) − f*)/(L·σ²))`, the constant that balances the two
    /// terms of the nonconvex SGD bound.
    pub fn horizon_constant(initial_gap: f64, smoothness: f64, sigma_sq: f64) -> Result<Self> {
        if !(initial_gap > 0.0 && smoothness > 0.0 && sigma_sq > 0.0) {
            return Err(Error::invalid(format!(
                "need positive gap, L and sigma^2, got {initial_gap}, {smoothness}, {sigma_sq}"
            )));
        }
        Ok(StepSchedule::InverseSqrtHorizon {
            c: (2.0 * initial_gap / (smoothness * sigma_sq)).sqrt(),
        })
    }

    pub fn eta(&self, t: usize, horizon: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InverseSqrtHorizon { c } => c / (horizon as f64).sqrt(),
            StepSchedule::Decaying { eta0, decay } => eta0 / (1.0 + decay * t as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsgdConfig {
    pub schedule: StepSchedule,
    pub steps: usize,
    pub seed: u64,
    /// Record every this many steps (the final step is always recorded).
    pub record_every: usize,
    pub update: UpdateRule,
    pub f_star: Option<f64>,
    pub track_grad: bool,
    /// Keep the running minimum of `‖∇f(x_t)‖²` over every iterate.
    pub track_min_grad: bool,
}

impl RsgdConfig {
    pub fn new(schedule: StepSchedule, steps: usize, seed: u64) -> Self {
        RsgdConfig {
            schedule,
            steps,
            seed,
            record_every: 1,
            update: UpdateRule::Exp,
            f_star: None,
            track_grad: true,
            track_min_grad: false,
        }
    }
}

/// Mean of `‖∇f_i(x)‖²` over all components: an estimate of the second-moment
/// bound `σ²` of the stochastic gradient. Evaluated outside any IFO ledger.
pub fn estimate_sigma_sq<P: FiniteSumProblem>(
    problem: &P,
    x: &<P::M as Manifold>::Point,
) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..problem.n() {
        acc += problem.manifold().norm_sq(&problem.component_grad(i, x)?);
    }
    Ok(acc / problem.n() as f64)
}

/// Riemannian SGD: `x ← Exp_x(−η_t·∇f_i(x))` with `i` uniform, one IFO call per step.
///
/// Index draws use stream 0 of the seed addressed by the step counter.
/// With `track_min_grad`, `min_grad_norm_sq[t]` is `min_{s ≤ t} ‖∇f(x_s)‖²`
/// over `x_0, …, x_t`; this measurement is not billed.
pub fn rsgd<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    cfg: &RsgdConfig,
) -> Result<Trace<<P::M as Manifold>::Point>> {
    if cfg.steps == 0 || cfg.record_every == 0 {
        return Err(Error::invalid(
            "RSGD needs steps >= 1 and record_every >= 1",
        ));
    }
    let counter = IfoCounter::new();
    let ifo = Ifo::new(problem, &counter);
    let mut indices = IndexStream::new(cfg.seed, 0);
    let mut rec = Recorder::new(problem, cfg.f_star, cfg.track_grad);
    rec.record(x0, 0, 0, 0)?;
    let mut min_track = cfg
        .track_min_grad
        .then(|| Vec::with_capacity(cfg.steps + 1));
    let mut running = f64::INFINITY;
    let mut track = |x: &<P::M as Manifold>::Point, t: usize, running: &mut f64| -> Result<()> {
        if let Some(v) = min_track.as_mut() {
            let g = problem
                .measure_grad_norm_sq(x)
                .map_err(|e| abort(t, 0, e))?;
            *running = running.min(g);
            v.push(*running);
        }
        Ok(())
    };
    track(x0, 0, &mut running)?;

    let n = problem.n();
    let mut x = x0.clone();
    for t in 1..=cfg.steps {
        let eta = cfg.schedule.eta(t - 1, cfg.steps);
        check_eta(eta)?;
        let i = indices.index((t - 1) as u64, n);
        let g = ifo.grad(i, &x).map_err(|e| abort(t, 0, e))?;
        x = take_step(problem.manifold(), &g, eta, cfg.update, t, 0)?;
        track(&x, t, &mut running)?;
        if t % cfg.record_every == 0 || t == cfg.steps {
            rec.record(&x, t, 0, counter.calls())?;
        }
    }
    Ok(Trace {
        records: rec.records,
        output: x.clone(),
        final_point: x,
        sampled_output: None,
        ifo_calls: counter.calls(),
        anchor_residual: 0.0,
        min_grad_norm_sq: min_track,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_centroid_instance, CentroidInstance, PcaInstance};
    use crate::spd::SpdPoint;
    use crate::sphere::SpherePoint;

    #[test]
    fn rgd_single_matrix_converges_in_one_step() {
        let a = SpdPoint::from_diagonal(&[3.0, 0.2]).unwrap();
        let inst = CentroidInstance::new(vec![a.clone()], 15.0, None).unwrap();
        let tr = rgd(
            &inst,
            &SpdPoint::identity(2).unwrap(),
            &RgdConfig::new(0.5, 1),
        )
        .unwrap();
        assert!((tr.final_point.mat() - a.mat()).norm() < 1e-12);
        assert_eq!(tr.ifo_calls, 1);
    }

    #[test]
    fn rgd_monotone_on_centroid_and_counts() {
        let inst = gen_centroid_instance(4, 20, 30.0, 6).unwrap();
        let mut cfg = RgdConfig::new(1.0 / inst.smoothness(), 25);
        cfg.f_star = Some(inst.ground_truth().unwrap().optimum_value);
        let tr = rgd(&inst, &inst.arithmetic_mean().unwrap(), &cfg).unwrap();
        assert_eq!(tr.ifo_calls, 20 * 25);
        assert!(tr
            .records
            .windows(2)
            .all(|w| w[1].objective_gap <= w[0].objective_gap));
    }

    #[test]
    fn rsgd_zero_variance_matches_rgd() {
        // identical components: every stochastic gradient is the full gradient
        let col = [0.8, -0.3, 0.5];
        let z = nalgebra::DMatrix::from_fn(3, 4, |i, _| col[i]);
        let p = PcaInstance::from_data(z, 1.0, None).unwrap();
        let x0 = SpherePoint::from_slice(&[0.1, 1.0, 0.4]).unwrap();
        let a = rsgd(
            &p,
            &x0,
            &RsgdConfig::new(StepSchedule::Constant(0.02), 30, 3),
        )
        .unwrap();
        let b = rgd(&p, &x0, &RgdConfig::new(0.02, 30)).unwrap();
        assert!((a.final_point.coords() - b.final_point.coords()).norm() < 1e-12);
        assert_eq!(a.ifo_calls, 30);
    }

    #[test]
    fn rsgd_replays_and_tracks_running_min() {
        let inst = gen_centroid_instance(3, 10, 10.0, 2).unwrap();
        let x0 = inst.arithmetic_mean().unwrap();
        let mut cfg = RsgdConfig::new(
            StepSchedule::Decaying {
                eta0: 0.05,
                decay: 0.5,
            },
            40,
            11,
        );
        cfg.track_min_grad = true;
        cfg.record_every = 10;
        let a = rsgd(&inst, &x0, &cfg).unwrap();
        let b = rsgd(&inst, &x0, &cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records.len(), 5);
        let m = a.min_grad_norm_sq.unwrap();
        assert_eq!(m.len(), 41);
        assert!(m.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn schedules() {
        assert_eq!(StepSchedule::Constant(0.3).eta(10, 100), 0.3);
        assert_eq!(StepSchedule::InverseSqrtHorizon { c: 2.0 }.eta(5, 100), 0.2);
        assert_eq!(
            StepSchedule::Decaying {
                eta0: 1.0,
                decay: 0.5
            }
            .eta(2, 9),
            0.5
        );
        match StepSchedule::horizon_constant(2.0, 4.0, 0.25).unwrap() {
            StepSchedule::InverseSqrtHorizon { c } => assert!((c - 2.0).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(StepSchedule::horizon_constant(0.0, 1.0, 1.0).is_err());
    }
}
