//! Unit hypersphere `S^{d-1}` embedded in `R^d`, with the round metric.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldSpec, TangentVector};
use crate::rng::gaussian_vector;

/// Unit vector in `R^d`, `d ≥ 2`. Normalized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("sphere points need dimension d >= 2"));
        }
        let n = coords.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::invalid(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(SpherePoint(coords / n))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// `e_k` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::invalid(format!(
                "basis index {k} out of range for d = {d}"
            )));
        }
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        Self::new(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    // renormalizes without the validation of `new`; inputs are already near unit norm
    fn renormalized(v: DVector<f64>) -> Self {
        let n = v.norm();
        SpherePoint(v / n)
    }
}

pub type SphereTangent = TangentVector<SpherePoint, DVector<f64>>;

/// The sphere `S^{d-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sphere {
    dim: usize,
}

impl Sphere {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("sphere needs ambient dimension d >= 2"));
        }
        Ok(Sphere { dim })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Curvature is +1 everywhere; 0 is used as the lower bound so ζ = 1.
    pub fn spec(&self) -> ManifoldSpec {
        ManifoldSpec {
            kappa_min: 0.0,
            kappa_max: 1.0,
            diameter: PI,
        }
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: expected {}, got {}",
                self.dim,
                v.len()
            )));
        }
        Ok(())
    }

    /// `(x + v) / ‖x + v‖`: the projective retraction.
    pub fn retraction(&self, v: &SphereTangent) -> Result<SpherePoint> {
        self.check_dim(&v.components)?;
        Ok(SpherePoint::renormalized(v.base.coords() + &v.components))
    }

    /// Decomposes `y` relative to `x`: returns `(cos θ, u)` with `u = y − (x·y)x`.
    fn split(x: &SpherePoint, y: &SpherePoint) -> Result<(f64, DVector<f64>)> {
        let dot = x.coords().dot(y.coords());
        if dot <= -1.0 + 1e-10 {
            return Err(Error::domain("antipodal points have no unique geodesic"));
        }
        let u = y.coords() - x.coords() * dot;
        Ok((dot, u))
    }
}

impl Manifold for Sphere {
    type Point = SpherePoint;
    type Vector = DVector<f64>;

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn injectivity_radius(&self) -> f64 {
        PI
    }

    fn same_point(&self, x: &SpherePoint, y: &SpherePoint) -> bool {
        x == y || (x.coords() - y.coords()).norm() <= 1e-12
    }

    fn tangent_residual(&self, x: &SpherePoint, v: &DVector<f64>) -> f64 {
        x.coords().dot(v).abs()
    }

    fn metric(&self, _x: &SpherePoint, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(v)
    }

    /// `cos(‖v‖)·x + sin(‖v‖)·v/‖v‖`.
    fn exp(&self, v: &SphereTangent) -> Result<SpherePoint> {
        self.check_dim(&v.components)?;
        let n = v.components.norm();
        if !n.is_finite() {
            return Err(Error::domain("non-finite tangent vector"));
        }
        if n >= PI {
            return Err(Error::domain(format!(
                "tangent norm {n} reaches the injectivity radius pi"
            )));
        }
        if n < 1e-14 {
            return Ok(v.base.clone());
        }
        let out = v.base.coords() * n.cos() + &v.components * (n.sin() / n);
        Ok(SpherePoint::renormalized(out))
    }

    fn retract(&self, v: &SphereTangent) -> Result<SpherePoint> {
        self.retraction(v)
    }

    fn log(&self, x: &SpherePoint, y: &SpherePoint) -> Result<SphereTangent> {
        self.check_dim(y.coords())?;
        let (dot, u) = Self::split(x, y)?;
        let nu = u.norm();
        if nu == 0.0 {
            return Ok(self.zero(x));
        }
        let theta = nu.atan2(dot);
        Ok(TangentVector::new(x.clone(), u * (theta / nu)))
    }

    fn transport(&self, v: &SphereTangent, y: &SpherePoint) -> Result<SphereTangent> {
        let x = &v.base;
        if self.same_point(x, y) {
            return Ok(TangentVector::new(y.clone(), v.components.clone()));
        }
        let (dot, u) = Self::split(x, y)?;
        let nu = u.norm();
        if nu < 1e-14 {
            return Ok(TangentVector::new(y.clone(), v.components.clone()));
        }
        let theta = nu.atan2(dot);
        let e = u / nu;
        let w = e.dot(&v.components);
        let mut out = v.components.clone();
        out.axpy(w * (theta.cos() - 1.0), &e, 1.0);
        out.axpy(-w * theta.sin(), x.coords(), 1.0);
        // strip the rounding drift out of the tangent space at y
        let drift = y.coords().dot(&out);
        out.axpy(-drift, y.coords(), 1.0);
        Ok(TangentVector::new(y.clone(), out))
    }

    fn dist(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        self.check_dim(y.coords())?;
        let dot = x.coords().dot(y.coords());
        let u = y.coords() - x.coords() * dot;
        Ok(u.norm().atan2(dot))
    }

    fn project(&self, x: &SpherePoint, ambient: &DVector<f64>) -> SphereTangent {
        let dot = x.coords().dot(ambient);
        TangentVector::new(x.clone(), ambient - x.coords() * dot)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SpherePoint {
        loop {
            let g = gaussian_vector(rng, self.dim);
            if g.norm() > 1e-8 {
                return SpherePoint::renormalized(g);
            }
        }
    }

    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &SpherePoint, rng: &mut R) -> SphereTangent {
        loop {
            let t = self.project(x, &gaussian_vector(rng, self.dim));
            let n = t.components.norm();
            if n > 1e-8 {
                return t.scale(1.0 / n);
            }
        }
    }

    fn zero(&self, x: &SpherePoint) -> SphereTangent {
        TangentVector::new(x.clone(), DVector::zeros(self.dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn e(d: usize, k: usize) -> SpherePoint {
        SpherePoint::basis(d, k).unwrap()
    }

    fn tangent(x: &SpherePoint, c: &[f64]) -> SphereTangent {
        TangentVector::new(x.clone(), DVector::from_column_slice(c))
    }

    #[test]
    fn construction_normalizes_and_validates() {
        let p = SpherePoint::from_slice(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(p.coords().norm(), 1.0, epsilon = 1e-15);
        assert!(SpherePoint::from_slice(&[1.0]).is_err());
        assert!(SpherePoint::from_slice(&[0.0, 0.0]).is_err());
        assert!(Sphere::new(1).is_err());
    }

    #[test]
    fn exp_examples() {
        let s = Sphere::new(4).unwrap();
        let x = e(4, 0);
        assert_eq!(s.exp(&s.zero(&x)).unwrap(), x);

        let out = s.exp(&tangent(&x, &[0.0, FRAC_PI_2, 0.0, 0.0])).unwrap();
        assert!((out.coords() - e(4, 1).coords()).norm() < 1e-15);

        let out = s.exp(&tangent(&x, &[0.0, 0.3, 0.0, 0.0])).unwrap();
        assert_relative_eq!(out.coords()[0], 0.3f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(out.coords()[1], 0.3f64.sin(), epsilon = 1e-15);
        // cross-check with arccos of the dot product
        assert_relative_eq!(x.coords().dot(out.coords()).acos(), 0.3, epsilon = 1e-12);
        assert_relative_eq!(s.dist(&x, &out).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn exp_rejects_beyond_injectivity_radius() {
        let s = Sphere::new(3).unwrap();
        let x = e(3, 0);
        assert!(matches!(
            s.exp(&tangent(&x, &[0.0, PI, 0.0])),
            Err(Error::Domain(_))
        ));
        assert!(s.exp(&tangent(&x, &[0.0, 3.1, 0.0])).is_ok());
    }

    #[test]
    fn log_examples() {
        let s = Sphere::new(3).unwrap();
        let x = e(3, 0);
        assert_eq!(s.log(&x, &x).unwrap().components, DVector::zeros(3));
        let v = s.log(&x, &e(3, 1)).unwrap();
        assert!((v.components - DVector::from_column_slice(&[0.0, FRAC_PI_2, 0.0])).norm() < 1e-15);
        let back = s.exp(&s.log(&x, &e(3, 1)).unwrap()).unwrap();
        assert!((back.coords() - e(3, 1).coords()).norm() < 1e-15);

        let minus_x = SpherePoint::from_slice(&[-1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(s.log(&x, &minus_x), Err(Error::Domain(_))));
    }

    #[test]
    fn log_is_tangent_and_symmetric_in_norm() {
        let s = Sphere::new(10).unwrap();
        let mut rng = seeded(3);
        for _ in 0..200 {
            let x = s.random_point(&mut rng);
            let y = s.random_point(&mut rng);
            let v = s.log(&x, &y).unwrap();
            assert!(s.tangent_residual(&x, &v.components) < 1e-14);
            let w = s.log(&y, &x).unwrap();
            assert!((s.norm(&v) - s.norm(&w)).abs() < 1e-9);
            assert_relative_eq!(
                s.norm(&v),
                x.coords().dot(y.coords()).acos(),
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn transport_examples() {
        let s = Sphere::new(3).unwrap();
        let x = e(3, 0);
        let v = tangent(&x, &[0.0, 0.4, -0.2]);
        assert_eq!(s.transport(&v, &x).unwrap(), v);

        let alpha = 1.7;
        let out = s
            .transport(&tangent(&x, &[0.0, alpha, 0.0]), &e(3, 1))
            .unwrap();
        assert!((&out.components - DVector::from_column_slice(&[-alpha, 0.0, 0.0])).norm() < 1e-15);
        assert_relative_eq!(s.norm(&out), alpha, epsilon = 1e-15);

        let normal = tangent(&x, &[0.0, 0.0, 1.0]);
        let out = s.transport(&normal, &e(3, 1)).unwrap();
        assert!((out.components - normal.components).norm() < 1e-15);

        let minus_x = SpherePoint::from_slice(&[-1.0, 0.0, 0.0]).unwrap();
        assert!(s.transport(&v, &minus_x).is_err());
    }

    #[test]
    fn retraction_examples() {
        let s = Sphere::new(3).unwrap();
        let x = e(3, 0);
        assert_eq!(s.retract(&s.zero(&x)).unwrap(), x);
        let r = s.retract(&tangent(&x, &[0.0, 1.0, 0.0])).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((r.coords() - DVector::from_column_slice(&[h, h, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn retraction_agrees_with_exp_to_third_order() {
        let s = Sphere::new(10).unwrap();
        let mut rng = seeded(9);
        for _ in 0..50 {
            let x = s.random_point(&mut rng);
            let v = s.random_unit_tangent(&x, &mut rng).scale(0.01);
            let gap = (s.retract(&v).unwrap().coords() - s.exp(&v).unwrap().coords()).norm();
            assert!(gap <= 1e-6, "gap {gap}");
        }
        // ratio test: shrinking the step 10x shrinks the gap ~1000x
        let x = s.random_point(&mut rng);
        let v = s.random_unit_tangent(&x, &mut rng);
        let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&eta| {
                let w = v.scale(eta);
                (s.retract(&w).unwrap().coords() - s.exp(&w).unwrap().coords()).norm()
            })
            .collect();
        for pair in gaps.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((700.0..1300.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn sphere_spec_has_unit_zeta() {
        assert_eq!(Sphere::new(5).unwrap().spec().zeta(), 1.0);
    }
}
