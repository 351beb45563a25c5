//! The manifold contract shared by every solver, plus curvature bookkeeping.
//!
//! Points and tangent vectors are kept in their ambient representation
//! (a unit vector for the sphere, a symmetric matrix for SPD). A
//! [`TangentVector`] always carries the point it is anchored at, and
//! [`Manifold::inner`] refuses to pair vectors from different tangent spaces.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Linear-space operations on ambient coordinates.
pub trait Ambient: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zeros_like(&self) -> Self;
    fn scale(&self, a: f64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// Euclidean / Frobenius norm of the coordinates.
    fn coord_norm(&self) -> f64;
}

impl Ambient for DVector<f64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn scale(&self, a: f64) -> Self {
        self * a
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        nalgebra::Matrix::axpy(self, a, x, 1.0);
    }
    fn coord_norm(&self) -> f64 {
        self.norm()
    }
}

impl Ambient for DMatrix<f64> {
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn scale(&self, a: f64) -> Self {
        self * a
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn coord_norm(&self) -> f64 {
        self.norm()
    }
}

/// A tangent vector together with the point it is anchored at.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<P, V> {
    pub base: P,
    pub components: V,
}

/// Tangent vector type of manifold `M`.
pub type Tangent<M> = TangentVector<<M as Manifold>::Point, <M as Manifold>::Vector>;

impl<P: Clone, V: Ambient> TangentVector<P, V> {
    pub fn new(base: P, components: V) -> Self {
        TangentVector { base, components }
    }

    pub fn scale(&self, a: f64) -> Self {
        TangentVector::new(self.base.clone(), self.components.scale(a))
    }

    /// Sum of two vectors; the caller guarantees a shared base point.
    pub fn add(&self, other: &Self) -> Self {
        TangentVector::new(self.base.clone(), self.components.add(&other.components))
    }

    /// Difference of two vectors; the caller guarantees a shared base point.
    pub fn sub(&self, other: &Self) -> Self {
        TangentVector::new(self.base.clone(), self.components.sub(&other.components))
    }
}

/// Riemannian manifold operations used by the solvers.
pub trait Manifold: Send + Sync {
    type Point: Clone + Debug + Send + Sync;
    type Vector: Ambient;

    fn name(&self) -> &'static str;

    /// Largest tangent norm accepted by [`Manifold::exp`] (sphere: π, SPD: ∞).
    fn injectivity_radius(&self) -> f64;

    /// Point equality up to representation tolerance (1e-12).
    fn same_point(&self, x: &Self::Point, y: &Self::Point) -> bool;

    /// How far `v` is from the tangent space at `x`, relative to `‖v‖`.
    fn tangent_residual(&self, x: &Self::Point, v: &Self::Vector) -> f64;

    /// Metric at `x` applied to raw ambient coordinates.
    fn metric(&self, x: &Self::Point, u: &Self::Vector, v: &Self::Vector) -> f64;

    fn exp(&self, v: &Tangent<Self>) -> Result<Self::Point>;

    /// First-order approximation of `exp`; defaults to the exact map.
    fn retract(&self, v: &Tangent<Self>) -> Result<Self::Point> {
        self.exp(v)
    }

    fn log(&self, x: &Self::Point, y: &Self::Point) -> Result<Tangent<Self>>;

    /// Parallel transport of `v` from `v.base` to `y` along the minimizing geodesic.
    fn transport(&self, v: &Tangent<Self>, y: &Self::Point) -> Result<Tangent<Self>>;

    /// Transport two vectors anchored at the same point; implementations may
    /// share the work.
    fn transport_pair(
        &self,
        u: &Tangent<Self>,
        v: &Tangent<Self>,
        y: &Self::Point,
    ) -> Result<(Tangent<Self>, Tangent<Self>)> {
        Ok((self.transport(u, y)?, self.transport(v, y)?))
    }

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Result<f64> {
        Ok(self.norm(&self.log(x, y)?))
    }

    /// Orthogonal projection of ambient coordinates onto the tangent space at `x`.
    fn project(&self, x: &Self::Point, ambient: &Self::Vector) -> Tangent<Self>;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    /// Random tangent vector at `x` with unit metric norm.
    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &Self::Point, rng: &mut R) -> Tangent<Self>;

    fn zero(&self, x: &Self::Point) -> Tangent<Self>;

    /// Inner product of two vectors in the same tangent space.
    fn inner(&self, u: &Tangent<Self>, v: &Tangent<Self>) -> Result<f64> {
        if !self.same_point(&u.base, &v.base) {
            return Err(Error::invalid(
                "inner product of tangent vectors anchored at different points",
            ));
        }
        Ok(self.metric(&u.base, &u.components, &v.components))
    }

    fn norm(&self, v: &Tangent<Self>) -> f64 {
        self.norm_sq(v).sqrt()
    }

    fn norm_sq(&self, v: &Tangent<Self>) -> f64 {
        self.metric(&v.base, &v.components, &v.components).max(0.0)
    }
}

/// Curvature bounds and domain diameter of the working region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldSpec {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub diameter: f64,
}

impl ManifoldSpec {
    pub fn new(kappa_min: f64, kappa_max: f64, diameter: f64) -> Result<Self> {
        if !(kappa_min.is_finite() && kappa_max.is_finite()) || kappa_min > kappa_max {
            return Err(Error::invalid(format!(
                "curvature bounds must satisfy kappa_min <= kappa_max, got [{kappa_min}, {kappa_max}]"
            )));
        }
        check_diameter(diameter)?;
        Ok(ManifoldSpec {
            kappa_min,
            kappa_max,
            diameter,
        })
    }

    pub fn zeta(&self) -> f64 {
        curvature_factor(self.kappa_min, self.diameter)
    }
}

fn check_diameter(diameter: f64) -> Result<()> {
    if !diameter.is_finite() || diameter <= 0.0 {
        return Err(Error::invalid(format!(
            "diameter must be positive and finite, got {diameter}"
        )));
    }
    Ok(())
}

/// `√|κ|·ℓ / tanh(√|κ|·ℓ)` for negative `κ`, else 1.
fn curvature_factor(kappa_min: f64, length: f64) -> f64 {
    if kappa_min >= 0.0 {
        return 1.0;
    }
    let s = kappa_min.abs().sqrt() * length;
    if s < 1e-4 {
        // s/tanh(s) = 1 + s²/3 - s⁴/45 + ...
        1.0 + s * s / 3.0
    } else {
        s / s.tanh()
    }
}

/// Curvature distortion constant ζ of the working domain.
///
/// Equals `√|κ_min|·D / tanh(√|κ_min|·D)` when `κ_min < 0` and 1 otherwise;
/// always at least 1.
pub fn zeta(kappa_min: f64, diameter: f64) -> Result<f64> {
    check_diameter(diameter)?;
    if kappa_min.is_nan() {
        return Err(Error::invalid("kappa_min is NaN"));
    }
    Ok(curvature_factor(kappa_min, diameter))
}

/// Geodesic triangle with vertices `x, y, z`.
///
/// `a` is opposite `x`, and `angle_a` is the angle at `x` between the
/// geodesics towards `y` and `z`.
#[derive(Clone, Debug)]
pub struct GeodesicTriangle<P> {
    pub x: P,
    pub y: P,
    pub z: P,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub angle_a: f64,
}

impl<P: Clone> GeodesicTriangle<P> {
    pub fn from_points<M>(manifold: &M, x: &P, y: &P, z: &P) -> Result<Self>
    where
        M: Manifold<Point = P>,
    {
        let a = manifold.dist(y, z)?;
        let b = manifold.dist(x, z)?;
        let c = manifold.dist(x, y)?;
        let to_y = manifold.log(x, y)?;
        let to_z = manifold.log(x, z)?;
        let ny = manifold.norm(&to_y);
        let nz = manifold.norm(&to_z);
        // vanishing side: the angle is irrelevant since it is multiplied by b·c
        let angle_a = if ny == 0.0 || nz == 0.0 {
            0.0
        } else {
            let cos = manifold.inner(&to_y, &to_z)? / (ny * nz);
            cos.clamp(-1.0, 1.0).acos()
        };
        Ok(GeodesicTriangle {
            x: x.clone(),
            y: y.clone(),
            z: z.clone(),
            a,
            b,
            c,
            angle_a,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Trigonometric distance bound for a geodesic triangle:
/// `a² ≤ ζ(c)·b² + c² − 2bc·cos A`, with the side-length factor
/// `ζ(c) = √|κ_min|c / tanh(√|κ_min|c)`.
pub fn check_triangle_bound<P>(spec: &ManifoldSpec, tri: &GeodesicTriangle<P>) -> TriangleBound {
    let factor = curvature_factor(spec.kappa_min, tri.c);
    let lhs = tri.a * tri.a;
    let rhs = factor * tri.b * tri.b + tri.c * tri.c - 2.0 * tri.b * tri.c * tri.angle_a.cos();
    TriangleBound {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    }
}
