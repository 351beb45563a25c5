use proptest::prelude::*;
use rsvrg::geometry::{check_triangle_bound, GeodesicTriangle, Manifold};
use rsvrg::rng::seeded;
use rsvrg::spd::spd_spec;
use rsvrg::{Spd, Sphere};

fn sphere_case(
    d: usize,
    seed: u64,
    r: f64,
) -> (Sphere, rsvrg::SpherePoint, rsvrg::sphere::SphereTangent) {
    let s = Sphere::new(d).unwrap();
    let mut rng = seeded(seed);
    let x = s.random_point(&mut rng);
    let v = s.random_unit_tangent(&x, &mut rng).scale(r);
    (s, x, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sphere_log_inverts_exp(d in 2usize..40, seed in any::<u64>(), r in 0.0f64..3.0) {
        let (s, x, v) = sphere_case(d, seed, r);
        let back = s.log(&x, &s.exp(&v).unwrap()).unwrap();
        prop_assert!(s.norm(&back.sub(&v)) <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn sphere_exp_stays_on_sphere(d in 2usize..40, seed in any::<u64>(), r in 0.0f64..3.0) {
        let (s, _, v) = sphere_case(d, seed, r);
        prop_assert!((s.exp(&v).unwrap().coords().norm() - 1.0).abs() <= 1e-14);
        prop_assert!((s.retract(&v).unwrap().coords().norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn sphere_distance_is_symmetric(d in 2usize..20, seed in any::<u64>()) {
        let s = Sphere::new(d).unwrap();
        let mut rng = seeded(seed);
        let (x, y) = (s.random_point(&mut rng), s.random_point(&mut rng));
        let (a, b) = (s.dist(&x, &y).unwrap(), s.dist(&y, &x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&a));
    }

    #[test]
    fn sphere_transport_is_isometric(d in 2usize..30, seed in any::<u64>(), r in 0.0f64..3.0) {
        let (s, x, step) = sphere_case(d, seed, r);
        let y = s.exp(&step).unwrap();
        let mut rng = seeded(seed ^ 1);
        let u = s.random_unit_tangent(&x, &mut rng);
        let w = s.random_unit_tangent(&x, &mut rng).scale(2.0);
        let (tu, tw) = s.transport_pair(&u, &w, &y).unwrap();
        prop_assert!((s.inner(&tu, &tw).unwrap() - s.inner(&u, &w).unwrap()).abs() <= 1e-12);
        prop_assert!(s.tangent_residual(&y, &tu.components) <= 1e-12);
    }

    #[test]
    fn spd_log_inverts_exp(d in 1usize..8, seed in any::<u64>(), r in 0.0f64..3.0) {
        let m = Spd::new(d).unwrap();
        let mut rng = seeded(seed);
        let x = m.random_point(&mut rng);
        let v = m.random_unit_tangent(&x, &mut rng).scale(r);
        let back = m.log(&x, &m.exp(&v).unwrap()).unwrap();
        prop_assert!(m.norm(&back.sub(&v)) <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn spd_transport_is_isometric(d in 1usize..8, seed in any::<u64>()) {
        let m = Spd::new(d).unwrap();
        let mut rng = seeded(seed);
        let (x, y) = (m.random_point(&mut rng), m.random_point(&mut rng));
        let u = m.random_unit_tangent(&x, &mut rng);
        let w = m.random_unit_tangent(&x, &mut rng);
        let (tu, tw) = m.transport_pair(&u, &w, &y).unwrap();
        prop_assert!((m.inner(&tu, &tw).unwrap() - m.inner(&u, &w).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn spd_triangle_bound_holds(d in 2usize..6, seed in any::<u64>()) {
        let m = Spd::new(d).unwrap();
        let mut rng = seeded(seed);
        let (x, y, z) = (m.random_point(&mut rng), m.random_point(&mut rng), m.random_point(&mut rng));
        let tri = GeodesicTriangle::from_points(&m, &x, &y, &z).unwrap();
        let b = check_triangle_bound(&spd_spec(1.0).unwrap(), &tri);
        prop_assert!(b.holds, "lhs {} rhs {}", b.lhs, b.rhs);
    }

    #[test]
    fn sphere_triangle_bound_holds(d in 2usize..10, seed in any::<u64>()) {
        let s = Sphere::new(d).unwrap();
        let mut rng = seeded(seed);
        let x = s.random_point(&mut rng);
        let y = s.exp(&s.random_unit_tangent(&x, &mut rng).scale(1.2)).unwrap();
        let z = s.exp(&s.random_unit_tangent(&x, &mut rng).scale(0.7)).unwrap();
        let tri = GeodesicTriangle::from_points(&s, &x, &y, &z).unwrap();
        prop_assert!(check_triangle_bound(&s.spec(), &tri).holds);
    }
}
