//! Geodesic finite-difference checks of the problem gradients, and the
//! variance-reduced gradient averaged over every index.

use rsvrg::geometry::Manifold;
use rsvrg::oracle::{fd_refinement, vr_gradient_enumeration};
use rsvrg::problems::{gen_centroid_instance, gen_pca_instance};
use rsvrg::rng::seeded;

fn main() -> rsvrg::Result<()> {
    let pca = gen_pca_instance(8, 40, 0.3, 1)?;
    let mut rng = seeded(17);
    let x = pca.sphere().random_point(&mut rng);
    let r = fd_refinement(&pca, &x, 10, 1e-3, 5)?;
    println!(
        "pca:      err(h)={:.3e} err(h/10)={:.3e} ratio={:.1}",
        r.error_h, r.error_h10, r.ratio
    );

    let cen = gen_centroid_instance(4, 10, 10.0, 2)?;
    let spd = rsvrg::Spd::new(4)?;
    let y = spd.random_point(&mut rng);
    let r = fd_refinement(&cen, &y, 10, 1e-3, 5)?;
    println!(
        "centroid: err(h)={:.3e} err(h/10)={:.3e} ratio={:.1}",
        r.error_h, r.error_h10, r.ratio
    );

    let anchor = spd.random_point(&mut rng);
    let e = vr_gradient_enumeration(&cen, &y, &anchor)?;
    println!("|mean_i v_i - grad f| = {:.3e}", e.gap());
    Ok(())
}
