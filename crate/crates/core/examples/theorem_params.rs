//! Step sizes, inner-loop lengths and contraction factors from the convergence theorems.

use rsvrg::solvers::{
    corollary1_params, theorem1_alpha, theorem2_params, theorem4_params, TheoremParams,
    DEFAULT_MU0, DEFAULT_NU,
};

fn main() -> rsvrg::Result<()> {
    println!("strongly convex:");
    for (mu, l, zeta) in [(0.1, 1.0, 1.0), (1.0, 10.0, 2.0), (0.5, 1.0, 4.0)] {
        let p = TheoremParams::new(mu, l, zeta)?;
        let (eta, m) = corollary1_params(&p);
        println!(
            "  mu={mu} L={l} zeta={zeta}: eta={eta:.4e} m={m} alpha={:.4}",
            theorem1_alpha(&p, eta, m)?
        );
    }

    println!("nonconvex, n = 1000:");
    for zeta in [1.0, 2.0, 4.0] {
        let p = TheoremParams::new(0.1, 1.0, zeta)?;
        for alpha2 in [0.5, 1.0] {
            let (eta, m) = theorem2_params(&p, 1000, 2.0 / 3.0, alpha2, DEFAULT_MU0)?;
            println!("  zeta={zeta} alpha2={alpha2}: eta={eta:.4e} m={m}");
        }
    }

    println!("gradient dominated, tau = 10:");
    for n in [100, 1000, 10000] {
        let p = TheoremParams::new(0.1, 1.0, 1.0)?.with_tau(10.0)?;
        let t = theorem4_params(&p, n, DEFAULT_MU0, DEFAULT_NU)?;
        println!("  n={n}: eta={:.4e} m={} S={}", t.eta, t.m, t.s);
    }

    match TheoremParams::new(2.0, 1.0, 1.0) {
        Ok(_) => unreachable!(),
        Err(e) => println!("mu > L is rejected: {e}"),
    }
    Ok(())
}
