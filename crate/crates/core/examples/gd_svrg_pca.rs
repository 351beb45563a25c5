//! Restarted RSVRG with the gradient-dominated step-size rule, on a PCA
//! instance started inside the cap where the objective is gradient dominated.

use rsvrg::problems::pca::sample_in_cap;
use rsvrg::problems::{gen_pca_instance, pca_gd_constant, FiniteSumProblem};
use rsvrg::rng::seeded;
use rsvrg::solvers::{
    gd_svrg, theorem4_params, RsvrgConfig, TheoremParams, DEFAULT_MU0, DEFAULT_NU,
};

fn main() -> rsvrg::Result<()> {
    let delta = 0.2;
    let inst = gen_pca_instance(10, 100, delta, 8)?;
    let truth = inst.ground_truth()?;
    let tau = pca_gd_constant(delta, 0.2)?;
    let p = TheoremParams::new(1e-3 * inst.smoothness(), inst.smoothness(), 1.0)?.with_tau(tau)?;
    let t4 = theorem4_params(&p, inst.n(), DEFAULT_MU0, DEFAULT_NU)?;
    println!(
        "tau = {tau:.3}, eta = {:.3e}, m = {}, S = {}",
        t4.eta, t4.m, t4.s
    );

    let x0 = sample_in_cap(inst.sphere(), &truth.optimum_point, 0.2, &mut seeded(2));
    let mut cfg = RsvrgConfig::new(t4.m, t4.eta, t4.s);
    cfg.seed = 9;
    cfg.f_star = Some(truth.optimum_value);
    let (_, restarts) = gd_svrg(&inst, &x0, &cfg, 3)?;
    for (k, r) in restarts.iter().enumerate() {
        println!(
            "restart {k}: IFO {:>7}, gap {:.4e}",
            r.ifo_calls, r.objective_gap
        );
    }
    Ok(())
}
