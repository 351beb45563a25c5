//! Reference computations that solver results are judged against.
//!
//! Nothing here calls into `solvers`. Optimality is established from residuals
//! and closed forms: a dense eigensolver for PCA, and a damped full-gradient
//! iteration driven to a tiny gradient norm for the centroid.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Tangent};
use crate::problems::{CentroidInstance, FiniteSumProblem, PcaInstance};
use crate::rng::seeded;
use crate::spd::{SpdPoint, SymEig};
use crate::sphere::SpherePoint;

/// Ground truth for a problem instance.
#[derive(Clone, Debug)]
pub struct OracleResult<P> {
    pub optimum_value: f64,
    pub optimum_point: P,
    pub method: &'static str,
    /// Eigen-residual `‖Av − λv‖` for PCA, gradient norm for the centroid.
    pub residual: f64,
}

/// Flip `v` so that its first nonzero coordinate is positive.
pub fn canonicalize_sign(v: &DVector<f64>) -> DVector<f64> {
    match v.iter().find(|c| **c != 0.0) {
        Some(c) if *c < 0.0 => -v,
        _ => v.clone(),
    }
}

/// Leading eigenpair of `A` by dense symmetric eigendecomposition.
pub fn pca_ground_truth(inst: &PcaInstance) -> Result<OracleResult<SpherePoint>> {
    let a = inst.covariance();
    let eig = SymEig::new(&a)?;
    let d = inst.d();
    let lambda1 = eig.eigenvalues[d - 1];
    let v = canonicalize_sign(&eig.eigenvectors.column(d - 1).into_owned());
    let residual = (&a * &v - &v * lambda1).norm();
    if residual > 1e-10 * lambda1.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::OracleNotConverged { residual, steps: 1 });
    }
    Ok(OracleResult {
        optimum_value: -lambda1,
        optimum_point: SpherePoint::new(v)?,
        method: "dense-eigensolver",
        residual,
    })
}

/// Convergence tolerance of the centroid reference solver.
pub const CENTROID_TOL: f64 = 1e-12;
const CENTROID_MAX_STEPS: usize = 20_000;

/// Karcher mean by damped Riemannian gradient descent from the arithmetic mean.
///
/// Iterates `X ← Exp_X(−η·∇φ(X))` on `φ(X) = (1/n)·Σ d²(X, A_i)`, starting at
/// `η = 1/2` and halving whenever `φ` would increase. The reported residual is
/// `‖∇φ(X*)‖` in the metric at `X*`; the optimum value is `Σ d²(X*, A_i)`.
pub fn centroid_ground_truth(inst: &CentroidInstance) -> Result<OracleResult<SpdPoint>> {
    let spd = inst.manifold();
    let n = inst.n() as f64;
    let mean_grad = |x: &SpdPoint| -> Result<Tangent<crate::spd::Spd>> {
        let mut acc = spd.zero(x);
        for a in inst.matrices() {
            acc.components += spd.log(x, a)?.components;
        }
        Ok(acc.scale(-2.0 / n))
    };

    let mut x = inst.arithmetic_mean()?;
    let mut phi = inst.value(&x)? / n;
    let mut g = mean_grad(&x)?;
    let mut gnorm = spd.norm(&g);
    let mut eta = 0.5;
    let mut steps = 0;
    while gnorm > CENTROID_TOL {
        if steps >= CENTROID_MAX_STEPS || eta < 1e-20 {
            return Err(Error::OracleNotConverged {
                residual: gnorm,
                steps,
            });
        }
        steps += 1;
        let cand = spd.exp(&g.scale(-eta))?;
        let cand_phi = inst.value(&cand)? / n;
        // ties at rounding level are accepted: near the optimum φ is flat
        if cand_phi <= phi + 8.0 * f64::EPSILON * phi.abs() {
            let cand_g = mean_grad(&cand)?;
            let cand_norm = spd.norm(&cand_g);
            if cand_phi < phi || cand_norm < gnorm {
                x = cand;
                phi = cand_phi;
                g = cand_g;
                gnorm = cand_norm;
                eta = (eta * 2.0).min(0.5);
                continue;
            }
        }
        eta *= 0.5;
    }
    Ok(OracleResult {
        optimum_value: inst.value(&x)?,
        optimum_point: x,
        method: "damped-karcher-descent",
        residual: gnorm,
    })
}

/// Worst deviation between the directional derivative of `f` at `x` and a
/// geodesic central difference, over `trials` random unit tangents.
///
/// The tangents are drawn from `seed`, so two calls with the same seed probe
/// the same directions. If a step leaves the exponential map's domain the
/// step is halved once before giving up.
pub fn fd_check_fn<M, F>(
    manifold: &M,
    f: F,
    grad: &Tangent<M>,
    trials: usize,
    h: f64,
    seed: u64,
) -> Result<f64>
where
    M: Manifold,
    F: Fn(&M::Point) -> Result<f64>,
{
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::invalid(format!(
            "finite-difference step {h} outside [1e-6, 1e-2]"
        )));
    }
    let x = &grad.base;
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let v = manifold.random_unit_tangent(x, &mut rng);
        let slope = manifold.inner(grad, &v)?;
        let fd = match central_difference(manifold, &f, &v, h) {
            Ok(fd) => fd,
            Err(Error::Domain(_)) => central_difference(manifold, &f, &v, h / 2.0)?,
            Err(e) => return Err(e),
        };
        worst = worst.max((slope - fd).abs());
    }
    Ok(worst)
}

fn central_difference<M, F>(manifold: &M, f: &F, v: &Tangent<M>, h: f64) -> Result<f64>
where
    M: Manifold,
    F: Fn(&M::Point) -> Result<f64>,
{
    let plus = manifold.exp(&v.scale(h))?;
    let minus = manifold.exp(&v.scale(-h))?;
    Ok((f(&plus)? - f(&minus)?) / (2.0 * h))
}

/// [`fd_check_fn`] applied to the full objective and full gradient of a problem.
pub fn fd_gradient_check<P: FiniteSumProblem>(
    problem: &P,
    x: &<P::M as Manifold>::Point,
    trials: usize,
    h: f64,
    seed: u64,
) -> Result<f64> {
    let grad = problem.full_grad(x)?;
    fd_check_fn(
        problem.manifold(),
        |y| problem.full_value(y),
        &grad,
        trials,
        h,
        seed,
    )
}

/// Errors at `h` and `h/10` along the same directions, and their ratio.
///
/// A correct gradient gives a ratio near 100 (second-order accuracy).
#[derive(Clone, Copy, Debug)]
pub struct FdRefinement {
    pub h: f64,
    pub error_h: f64,
    pub error_h10: f64,
    pub ratio: f64,
}

pub fn fd_refinement<P: FiniteSumProblem>(
    problem: &P,
    x: &<P::M as Manifold>::Point,
    trials: usize,
    h: f64,
    seed: u64,
) -> Result<FdRefinement> {
    let error_h = fd_gradient_check(problem, x, trials, h, seed)?;
    let error_h10 = fd_gradient_check(problem, x, trials, h / 10.0, seed)?;
    Ok(FdRefinement {
        h,
        error_h,
        error_h10,
        ratio: error_h / error_h10,
    })
}

/// Mean over every index of the variance-reduced gradient, next to the full gradient.
pub struct VrEnumeration<M: Manifold> {
    pub mean_v: Tangent<M>,
    pub full_grad: Tangent<M>,
}

impl<M: Manifold> VrEnumeration<M> {
    /// Coordinate distance `‖mean_v − full_grad‖`.
    pub fn gap(&self) -> f64 {
        use crate::geometry::Ambient;
        self.mean_v
            .components
            .sub(&self.full_grad.components)
            .coord_norm()
    }
}

/// Enumerates `v_i = ∇f_i(x_t) − Γ(∇f_i(x̃) − ∇f(x̃))` over all `i`.
///
/// Written from the update formula directly, one transport per index.
pub fn vr_gradient_enumeration<P: FiniteSumProblem>(
    problem: &P,
    x_t: &<P::M as Manifold>::Point,
    anchor: &<P::M as Manifold>::Point,
) -> Result<VrEnumeration<P::M>> {
    use crate::geometry::Ambient;
    let m = problem.manifold();
    let g_anchor = problem.full_grad(anchor)?;
    let mut sum = m.zero(x_t);
    for i in 0..problem.n() {
        let gi_t = problem.component_grad(i, x_t)?;
        let gi_anchor = problem.component_grad(i, anchor)?;
        let correction = m.transport(&gi_anchor.sub(&g_anchor), x_t)?;
        let v = gi_t.components.sub(&correction.components);
        sum.components.axpy(1.0, &v);
    }
    Ok(VrEnumeration {
        mean_v: sum.scale(1.0 / problem.n() as f64),
        full_grad: problem.full_grad(x_t)?,
    })
}
