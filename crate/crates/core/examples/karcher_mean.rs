//! Riemannian centroid of random SPD matrices: RSVRG against full-gradient descent.

use rsvrg::problems::{gen_centroid_instance, FiniteSumProblem};
use rsvrg::solvers::{rgd, rsvrg, RgdConfig, RsvrgConfig};
use rsvrg::SpdPoint;

fn main() -> rsvrg::Result<()> {
    let (d, n) = (5, 200);
    let inst = gen_centroid_instance(d, n, 20.0, 4)?;
    let truth = inst.ground_truth()?;
    println!(
        "reference optimum {:.10} (residual {:.1e})",
        truth.optimum_value, truth.residual
    );

    let x0 = SpdPoint::identity(d)?;
    let mut cfg = RsvrgConfig::new(n, 1.0 / (100.0 * n as f64), 10);
    cfg.f_star = Some(truth.optimum_value);
    let svrg = rsvrg(&inst, &x0, &cfg)?;

    let mut gcfg = RgdConfig::new(1.0 / inst.smoothness(), 30);
    gcfg.f_star = Some(truth.optimum_value);
    let gd = rgd(&inst, &x0, &gcfg)?;

    println!("{:>10} {:>14} {:>14}", "IFO", "rsvrg gap", "rgd gap");
    for r in &svrg.records {
        let g = gd
            .records
            .iter()
            .rev()
            .find(|q| q.ifo_calls <= r.ifo_calls)
            .map_or(f64::NAN, |q| q.objective_gap);
        println!(
            "{:>10} {:>14.4e} {:>14.4e}",
            r.ifo_calls, r.objective_gap, g
        );
    }
    Ok(())
}
