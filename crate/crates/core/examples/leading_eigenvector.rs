//! Leading eigenvector of a sample covariance with RSVRG on the sphere.

use rsvrg::geometry::Manifold;
use rsvrg::problems::gen_pca_instance;
use rsvrg::rng::seeded;
use rsvrg::solvers::{rsvrg, RsvrgConfig, UpdateRule};

fn main() -> rsvrg::Result<()> {
    let inst = gen_pca_instance(50, 500, 0.05, 11)?;
    let truth = inst.ground_truth()?;
    let x0 = inst.sphere().random_point(&mut seeded(5));

    for update in [UpdateRule::Exp, UpdateRule::Retraction] {
        let mut cfg = RsvrgConfig::new(10 * inst.n(), 1e-3, 15);
        cfg.seed = 1;
        cfg.update = update;
        cfg.f_star = Some(truth.optimum_value);
        let trace = rsvrg(&inst, &x0, &cfg)?;
        let overlap = trace
            .output
            .coords()
            .dot(truth.optimum_point.coords())
            .abs();
        println!(
            "{update:?}: gap {:.3e} after {} IFO calls, |<x, v1>| = {:.12}",
            trace.last().objective_gap,
            trace.ifo_calls,
            overlap
        );
    }
    Ok(())
}
