//! The SPD cone with the affine-invariant metric: distances, geodesics and
//! the curvature constant of a bounded region.

use rsvrg::geometry::Manifold;
use rsvrg::spd::spd_spec;
use rsvrg::{Spd, SpdPoint};

fn main() -> rsvrg::Result<()> {
    let spd = Spd::new(2)?;
    let a = SpdPoint::from_diagonal(&[4.0, 1.0])?;
    let b = SpdPoint::from_diagonal(&[1.0, 9.0])?;

    // for commuting matrices the distance is the norm of the log-eigenvalue difference
    let closed = ((4f64).ln().powi(2) + (9f64).ln().powi(2)).sqrt();
    println!(
        "d(A, B) = {:.12} (closed form {:.12})",
        spd.dist(&a, &b)?,
        closed
    );

    let mid = spd.exp(&spd.log(&a, &b)?.scale(0.5))?;
    println!("geodesic midpoint:\n{}", mid.mat());
    println!(
        "d(A, mid) = {:.12}, d(mid, B) = {:.12}",
        spd.dist(&a, &mid)?,
        spd.dist(&mid, &b)?
    );

    // invariance under congruence: d(PAPᵀ, PBPᵀ) = d(A, B)
    let p = nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
    println!(
        "after congruence: {:.12}",
        spd.dist(&a.congruence(&p)?, &b.congruence(&p)?)?
    );

    for diameter in [0.5, 1.0, 2.0, 5.0] {
        println!(
            "zeta for diameter {diameter}: {:.6}",
            spd_spec(diameter)?.zeta()
        );
    }
    Ok(())
}
