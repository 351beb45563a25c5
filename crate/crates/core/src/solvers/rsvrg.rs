use crate::error::{Error, Result};
use crate::geometry::{Ambient, Manifold};
use crate::problems::{FiniteSumProblem, Ifo, IfoCounter};
use crate::rng::{derive_seed, IndexStream};

use super::{abort, check_eta, take_step, Granularity, Recorder, Trace, TraceRecord, UpdateRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputOption {
    /// Last anchor `x̃^S`.
    #[default]
    I,
    /// An inner iterate drawn uniformly from all `m·S` of them.
    II,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsvrgConfig {
    /// Inner-loop length.
    pub m: usize,
    pub eta: f64,
    /// Number of outer epochs.
    pub epochs: usize,
    pub option: OutputOption,
    pub seed: u64,
    pub update: UpdateRule,
    pub granularity: Granularity,
    /// Optimal value used to report gaps; raw objective values otherwise.
    pub f_star: Option<f64>,
    pub track_grad: bool,
}

impl RsvrgConfig {
    pub fn new(m: usize, eta: f64, epochs: usize) -> Self {
        RsvrgConfig {
            m,
            eta,
            epochs,
            option: OutputOption::I,
            seed: 0,
            update: UpdateRule::Exp,
            granularity: Granularity::Epoch,
            f_star: None,
            track_grad: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.epochs == 0 {
            return Err(Error::invalid(format!(
                "m and S must be at least 1, got m = {}, S = {}",
                self.m, self.epochs
            )));
        }
        check_eta(self.eta)
    }

    /// IFO calls consumed by one epoch on a problem with `n` components.
    pub fn ifo_per_epoch(&self, n: usize) -> u64 {
        (n + 2 * self.m) as u64
    }
}

/// Riemannian SVRG.
///
/// Each epoch takes a full gradient `g` at the anchor `x̃`, then runs `m`
/// steps along
///
/// `v_t = ∇f_i(x_t) − Γ_{x̃}^{x_t}(∇f_i(x̃) − g)`
///
/// with `i` drawn uniformly. The transported terms are combined as
/// `Γg + (∇f_i(x_t) − Γ∇f_i(x̃))`, which is the same vector and makes
/// `v_0 = g` bit for bit at the anchor.
///
/// Index draws come from stream 0 of `cfg.seed` and the option II reservoir
/// from stream 1, each addressed by the global inner-step counter.
pub fn rsvrg<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    cfg: &RsvrgConfig,
) -> Result<Trace<<P::M as Manifold>::Point>> {
    cfg.validate()?;
    let manifold = problem.manifold();
    let n = problem.n();
    let counter = IfoCounter::new();
    let ifo = Ifo::new(problem, &counter);
    let mut indices = IndexStream::new(cfg.seed, 0);
    let mut reservoir = IndexStream::new(cfg.seed, 1);
    let mut rec = Recorder::new(problem, cfg.f_star, cfg.track_grad);
    rec.record(x0, 0, 0, 0)?;

    let mut anchor = x0.clone();
    let mut sampled = None;
    let mut inner_count: u64 = 0;
    let mut anchor_residual: f64 = 0.0;

    for s in 1..=cfg.epochs {
        let g = ifo.full_grad(&anchor).map_err(|e| abort(s, 0, e))?;
        let mut x = anchor.clone();
        for t in 0..cfg.m {
            let i = indices.index(inner_count, n);
            let gi_x = ifo.grad(i, &x).map_err(|e| abort(s, t, e))?;
            let gi_anchor = ifo.grad(i, &anchor).map_err(|e| abort(s, t, e))?;
            let (tg, tgi) = manifold
                .transport_pair(&g, &gi_anchor, &x)
                .map_err(|e| abort(s, t, e))?;
            let mut v = tg;
            v.components
                .axpy(1.0, &gi_x.components.sub(&tgi.components));
            if t == 0 {
                anchor_residual = anchor_residual.max(v.components.sub(&g.components).coord_norm());
            }
            x = take_step(manifold, &v, cfg.eta, cfg.update, s, t)?;
            inner_count += 1;
            if cfg.option == OutputOption::II
                && reservoir.unit(inner_count) * (inner_count as f64) < 1.0
            {
                sampled = Some(x.clone());
            }
            if cfg.granularity == Granularity::Step {
                rec.record(&x, s, t + 1, counter.calls())?;
            }
        }
        anchor = x;
        if cfg.granularity == Granularity::Epoch {
            rec.record(&anchor, s, cfg.m, counter.calls())?;
        }
    }

    let output = match cfg.option {
        OutputOption::I => anchor.clone(),
        OutputOption::II => sampled.clone().expect("at least one inner iterate"),
    };
    Ok(Trace {
        records: rec.records,
        final_point: anchor,
        sampled_output: sampled,
        output,
        ifo_calls: counter.calls(),
        anchor_residual,
        min_grad_norm_sq: None,
    })
}

/// Concatenated trace of a restarted run, and the measurement at each restart point.
pub type RestartedTrace<P> = (Trace<P>, Vec<TraceRecord>);

/// Restarted RSVRG for gradient-dominated objectives.
///
/// Runs `k_runs` option II RSVRG instances back to back, each started from
/// the previous run's sampled output. Run 0 uses `cfg.seed` itself and run
/// `k` uses `derive_seed(cfg.seed, k)`, so a single run replays [`rsvrg`].
/// Records carry cumulative IFO counts and epoch numbers; the restart
/// points are returned alongside, starting with `x0`.
pub fn gd_svrg<P: FiniteSumProblem>(
    problem: &P,
    x0: &<P::M as Manifold>::Point,
    cfg: &RsvrgConfig,
    k_runs: usize,
) -> Result<RestartedTrace<<P::M as Manifold>::Point>> {
    if k_runs == 0 {
        return Err(Error::invalid("GD-SVRG needs K >= 1"));
    }
    let mut inner_cfg = cfg.clone();
    inner_cfg.option = OutputOption::II;

    let mut rec = Recorder::new(problem, cfg.f_star, true);
    let mut restarts = vec![rec.measure(x0, 0, 0, 0)?];
    let mut records = Vec::new();
    let mut x = x0.clone();
    let mut ifo_offset = 0;
    let mut epoch_offset = 0;
    let mut anchor_residual: f64 = 0.0;
    let mut last = None;

    for k in 0..k_runs {
        inner_cfg.seed = if k == 0 {
            cfg.seed
        } else {
            derive_seed(cfg.seed, k as u64)
        };
        let run = rsvrg(problem, &x, &inner_cfg)?;
        let skip = usize::from(k > 0);
        for r in run.records.iter().skip(skip) {
            records.push(TraceRecord {
                epoch: r.epoch + epoch_offset,
                ifo_calls: r.ifo_calls + ifo_offset,
                ..*r
            });
        }
        ifo_offset += run.ifo_calls;
        epoch_offset += cfg.epochs;
        anchor_residual = anchor_residual.max(run.anchor_residual);
        x = run.output.clone();
        restarts.push(rec.measure(&x, epoch_offset, 0, ifo_offset)?);
        last = Some(run);
    }
    let last = last.expect("k_runs >= 1");
    Ok((
        Trace {
            records,
            final_point: last.final_point,
            sampled_output: last.sampled_output,
            output: x,
            ifo_calls: ifo_offset,
            anchor_residual,
            min_grad_norm_sq: None,
        },
        restarts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_centroid_instance, gen_pca_instance};
    use crate::solvers::{rgd, RgdConfig};
    use crate::sphere::SpherePoint;

    fn x0(d: usize) -> SpherePoint {
        SpherePoint::new(nalgebra::DVector::from_fn(d, |i, _| 1.0 + i as f64)).unwrap()
    }

    #[test]
    fn ifo_ledger() {
        let p = gen_pca_instance(5, 100, 0.2, 1).unwrap();
        let cfg = RsvrgConfig::new(100, 1e-3, 7);
        let tr = rsvrg(&p, &x0(5), &cfg).unwrap();
        assert_eq!(tr.ifo_calls, 2100);
        assert_eq!(tr.last().ifo_calls, 2100);
        assert_eq!(tr.records.len(), 8);
        assert!(tr
            .records
            .windows(2)
            .all(|w| w[0].ifo_calls < w[1].ifo_calls));
    }

    #[test]
    fn anchor_cancellation_is_exact() {
        let p = gen_pca_instance(6, 40, 0.2, 3).unwrap();
        let mut cfg = RsvrgConfig::new(20, 1e-2, 5);
        cfg.seed = 9;
        assert_eq!(rsvrg(&p, &x0(6), &cfg).unwrap().anchor_residual, 0.0);

        let c = gen_centroid_instance(3, 10, 10.0, 2).unwrap();
        let start = c.arithmetic_mean().unwrap();
        let cfg = RsvrgConfig::new(10, 1.0 / 1000.0, 3);
        assert_eq!(rsvrg(&c, &start, &cfg).unwrap().anchor_residual, 0.0);
    }

    #[test]
    fn single_component_matches_gradient_descent() {
        let z = nalgebra::DMatrix::from_column_slice(3, 1, &[1.0, 0.5, -0.2]);
        let p = crate::problems::PcaInstance::from_data(z, 1.0, None).unwrap();
        let mut cfg = RsvrgConfig::new(1, 0.1, 10);
        cfg.granularity = Granularity::Step;
        let a = rsvrg(&p, &x0(3), &cfg).unwrap();
        let b = rgd(&p, &x0(3), &RgdConfig::new(0.1, 10)).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert!((ra.objective - rb.objective).abs() < 1e-14);
        }
        assert!((a.final_point.coords() - b.final_point.coords()).norm() < 1e-14);
    }

    #[test]
    fn deterministic_replay() {
        let p = gen_pca_instance(8, 30, 0.1, 4).unwrap();
        let mut cfg = RsvrgConfig::new(30, 5e-3, 4);
        cfg.option = OutputOption::II;
        cfg.seed = 77;
        cfg.granularity = Granularity::Step;
        let a = rsvrg(&p, &x0(8), &cfg).unwrap();
        let b = rsvrg(&p, &x0(8), &cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.output, b.output);
        cfg.seed = 78;
        let c = rsvrg(&p, &x0(8), &cfg).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn iterates_stay_on_the_manifold() {
        let c = gen_centroid_instance(4, 8, 50.0, 5).unwrap();
        let start = c.arithmetic_mean().unwrap();
        let mut cfg = RsvrgConfig::new(8, 1.0 / 800.0, 5);
        cfg.option = OutputOption::II;
        let tr = rsvrg(&c, &start, &cfg).unwrap();
        assert!(tr.output.eigenvalues()[0] > 0.0);
        let p = gen_pca_instance(8, 30, 0.1, 4).unwrap();
        let tr = rsvrg(&p, &x0(8), &RsvrgConfig::new(30, 1e-2, 3)).unwrap();
        assert!((tr.final_point.coords().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_domain_failure_reports_position() {
        let p = gen_pca_instance(5, 10, 0.2, 1).unwrap();
        let cfg = RsvrgConfig::new(5, 1e6, 2);
        match rsvrg(&p, &x0(5), &cfg) {
            Err(Error::NumericalAbort { epoch, step, .. }) => {
                assert_eq!((epoch, step), (1, 0));
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn divergence_guard_trips() {
        let c = gen_centroid_instance(3, 5, 10.0, 1).unwrap();
        let gt = c.ground_truth().unwrap();
        let mut cfg = RsvrgConfig::new(5, 50.0, 10);
        cfg.f_star = Some(gt.optimum_value);
        let start = c.arithmetic_mean().unwrap();
        assert!(matches!(
            rsvrg(&c, &start, &cfg),
            Err(Error::NumericalAbort { .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let p = gen_pca_instance(5, 10, 0.2, 1).unwrap();
        assert!(rsvrg(&p, &x0(5), &RsvrgConfig::new(0, 0.1, 1)).is_err());
        assert!(rsvrg(&p, &x0(5), &RsvrgConfig::new(1, 0.0, 1)).is_err());
        assert!(rsvrg(&p, &x0(5), &RsvrgConfig::new(1, 0.1, 0)).is_err());
    }

    #[test]
    fn gd_svrg_single_run_replays_rsvrg() {
        let p = gen_pca_instance(8, 30, 0.1, 4).unwrap();
        let mut cfg = RsvrgConfig::new(30, 5e-3, 3);
        cfg.seed = 5;
        cfg.option = OutputOption::II;
        let single = rsvrg(&p, &x0(8), &cfg).unwrap();
        let (chained, restarts) = gd_svrg(&p, &x0(8), &cfg, 1).unwrap();
        assert_eq!(single.records, chained.records);
        assert_eq!(single.output, chained.output);
        assert_eq!(restarts.len(), 2);
    }

    #[test]
    fn gd_svrg_counts_cumulatively() {
        let p = gen_pca_instance(8, 30, 0.1, 4).unwrap();
        let cfg = RsvrgConfig::new(30, 5e-3, 2);
        let (tr, restarts) = gd_svrg(&p, &x0(8), &cfg, 3).unwrap();
        assert_eq!(tr.ifo_calls, 3 * 2 * 90);
        assert_eq!(tr.records.len(), 1 + 3 * 2);
        assert!(tr
            .records
            .windows(2)
            .all(|w| w[0].ifo_calls < w[1].ifo_calls));
        assert_eq!(restarts.last().unwrap().ifo_calls, 540);
    }
}
