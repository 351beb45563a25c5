//! Exponential map, logarithm and parallel transport on the unit sphere S².

use rsvrg::geometry::{Manifold, TangentVector};
use rsvrg::rng::seeded;
use rsvrg::{Sphere, SpherePoint};

fn main() -> rsvrg::Result<()> {
    let s2 = Sphere::new(3)?;
    let north = SpherePoint::basis(3, 2)?;
    let east = SpherePoint::basis(3, 0)?;

    // walking a quarter of a great circle from the pole lands on the equator
    let v = TangentVector::new(
        north.clone(),
        nalgebra::DVector::from_vec(vec![std::f64::consts::FRAC_PI_2, 0.0, 0.0]),
    );
    let y = s2.exp(&v)?;
    println!("exp_north(pi/2 e1) = {:?}", y.coords().as_slice());
    println!("d(north, east)     = {:.15}", s2.dist(&north, &east)?);

    let back = s2.log(&north, &y)?;
    println!("log roundtrip err  = {:.3e}", s2.norm(&back.sub(&v)));

    let mut rng = seeded(3);
    let x = s2.random_point(&mut rng);
    let u = s2.random_unit_tangent(&x, &mut rng);
    let w = s2.random_unit_tangent(&x, &mut rng);
    let z = s2.random_point(&mut rng);
    let (tu, tw) = s2.transport_pair(&u, &w, &z)?;
    println!(
        "<u,w> = {:.15}, <Tu,Tw> = {:.15}",
        s2.inner(&u, &w)?,
        s2.inner(&tu, &tw)?
    );

    let r = s2.retract(&u.scale(0.3))?;
    let e = s2.exp(&u.scale(0.3))?;
    println!(
        "retraction vs exp after a 0.3 step: {:.3e}",
        s2.dist(&r, &e)?
    );
    Ok(())
}
