//! Randomized self-test of the manifold primitives and problem gradients.

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{check_triangle_bound, GeodesicTriangle, Manifold, ManifoldSpec, Tangent};
use crate::oracle::fd_gradient_check;
use crate::problems::{gen_centroid_instance, gen_pca_instance, FiniteSumProblem};
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::spd::{spd_spec, Spd};
use crate::sphere::Sphere;

use super::config::ExperimentConfig;
use super::csv::{Cell, Table};
use super::with_pool;

pub const ROUNDTRIP_TOL: f64 = 1e-10;
pub const ISOMETRY_TOL: f64 = 1e-10;
pub const TRIANGLE_TOL: f64 = 1e-9;
pub const GRADIENT_TOL: f64 = 1e-6;
/// Largest tangent norm used for random steps.
const STEP_RADIUS: f64 = 3.0;
const FD_STEP: f64 = 1e-4;

/// Wraps a manifold and scales every transported vector by `1 + epsilon`.
///
/// With `epsilon = 0` it behaves exactly like the inner manifold; any other
/// value must make the isometry suite fail.
pub struct PerturbedTransport<M> {
    pub inner: M,
    pub epsilon: f64,
}

impl<M: Manifold> Manifold for PerturbedTransport<M> {
    type Point = M::Point;
    type Vector = M::Vector;

    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn injectivity_radius(&self) -> f64 {
        self.inner.injectivity_radius()
    }
    fn same_point(&self, x: &Self::Point, y: &Self::Point) -> bool {
        self.inner.same_point(x, y)
    }
    fn tangent_residual(&self, x: &Self::Point, v: &Self::Vector) -> f64 {
        self.inner.tangent_residual(x, v)
    }
    fn metric(&self, x: &Self::Point, u: &Self::Vector, v: &Self::Vector) -> f64 {
        self.inner.metric(x, u, v)
    }
    fn exp(&self, v: &Tangent<Self>) -> Result<Self::Point> {
        self.inner.exp(v)
    }
    fn retract(&self, v: &Tangent<Self>) -> Result<Self::Point> {
        self.inner.retract(v)
    }
    fn log(&self, x: &Self::Point, y: &Self::Point) -> Result<Tangent<Self>> {
        self.inner.log(x, y)
    }
    fn transport(&self, v: &Tangent<Self>, y: &Self::Point) -> Result<Tangent<Self>> {
        Ok(self.inner.transport(v, y)?.scale(1.0 + self.epsilon))
    }
    fn project(&self, x: &Self::Point, ambient: &Self::Vector) -> Tangent<Self> {
        self.inner.project(x, ambient)
    }
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point {
        self.inner.random_point(rng)
    }
    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &Self::Point, rng: &mut R) -> Tangent<Self> {
        self.inner.random_unit_tangent(x, rng)
    }
    fn zero(&self, x: &Self::Point) -> Tangent<Self> {
        self.inner.zero(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub manifold: &'static str,
    pub dim: usize,
    pub samples: usize,
    pub worst_residual: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.worst_residual <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct GeometryReport {
    pub suites: Vec<SuiteResult>,
}

impl GeometryReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed())
    }
}

fn random_step<M: Manifold>(m: &M, x: &M::Point, rng: &mut SeededRng) -> Tangent<M> {
    let r = rng.random_range(0.0..STEP_RADIUS);
    m.random_unit_tangent(x, rng).scale(r)
}

/// `‖log_x(exp_x v) − v‖ / max(1, ‖v‖)`, worst case over the samples.
pub fn roundtrip_residual<M: Manifold>(m: &M, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = m.random_point(&mut rng);
        let v = random_step(m, &x, &mut rng);
        let back = m.log(&x, &m.exp(&v)?)?;
        let err = m.norm(&back.sub(&v)) / m.norm(&v).max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Worst violation of inner-product preservation, norm preservation and
/// tangency for transport between random pairs of points.
pub fn isometry_residual<M: Manifold>(m: &M, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = m.random_point(&mut rng);
        let y = m.exp(&random_step(m, &x, &mut rng))?;
        let u = m.random_unit_tangent(&x, &mut rng);
        let v = m
            .random_unit_tangent(&x, &mut rng)
            .scale(rng.random_range(0.1..2.0));
        let tu = m.transport(&u, &y)?;
        let tv = m.transport(&v, &y)?;
        let inner = (m.inner(&tu, &tv)? - m.inner(&u, &v)?).abs();
        let norm = (m.norm(&tv) - m.norm(&v)).abs();
        let tangency = m.tangent_residual(&y, &tu.components);
        worst = worst.max(inner).max(norm).max(tangency);
    }
    Ok(worst)
}

/// Worst absolute excess `max(0, a² − rhs)` of the trigonometric distance
/// bound over random triangles.
pub fn triangle_residual<M: Manifold>(
    m: &M,
    spec: &ManifoldSpec,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = m.random_point(&mut rng);
        let y = m.exp(&random_step(m, &x, &mut rng).scale(0.5))?;
        let z = m.exp(&random_step(m, &x, &mut rng).scale(0.5))?;
        let tri = GeodesicTriangle::from_points(m, &x, &y, &z)?;
        let b = check_triangle_bound(spec, &tri);
        worst = worst.max(b.lhs - b.rhs);
    }
    Ok(worst)
}

/// Finite-difference error of the full gradient relative to its norm, worst over `points`.
pub fn gradient_residual<P: FiniteSumProblem>(
    problem: &P,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let x = problem.manifold().random_point(&mut rng);
        let scale = problem.manifold().norm(&problem.full_grad(&x)?).max(1.0);
        let err = fd_gradient_check(problem, &x, trials, FD_STEP, derive_seed(seed, k as u64))?;
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
enum Job {
    Sphere(usize),
    Spd(usize),
}

fn geometry_suites<M: Manifold>(
    m: &M,
    spec: &ManifoldSpec,
    dim: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<SuiteResult>> {
    let row = |suite, worst_residual, tolerance| SuiteResult {
        suite,
        manifold: m.name(),
        dim,
        samples: cfg.samples,
        worst_residual,
        tolerance,
    };
    Ok(vec![
        row(
            "exp-log-roundtrip",
            roundtrip_residual(m, cfg.samples, derive_seed(seed, 1))?,
            ROUNDTRIP_TOL,
        ),
        row(
            "transport-isometry",
            isometry_residual(m, cfg.samples, derive_seed(seed, 2))?,
            ISOMETRY_TOL,
        ),
        row(
            "triangle-bound",
            triangle_residual(m, spec, cfg.samples, derive_seed(seed, 3))?,
            TRIANGLE_TOL,
        ),
    ])
}

fn run_job(cfg: &ExperimentConfig, job: Job) -> Result<Vec<SuiteResult>> {
    let points = cfg.samples.clamp(1, 5);
    match job {
        Job::Sphere(d) => {
            let seed = derive_seed(cfg.seed, d as u64);
            let m = PerturbedTransport {
                inner: Sphere::new(d)?,
                epsilon: cfg.transport_perturbation,
            };
            let mut out = geometry_suites(&m, &m.inner.spec(), d, cfg, seed)?;
            let inst = gen_pca_instance(d, 2 * d, 0.3, derive_seed(seed, 4))?;
            out.push(SuiteResult {
                suite: "gradient",
                manifold: m.name(),
                dim: d,
                samples: points * cfg.fd_trials,
                worst_residual: gradient_residual(
                    &inst,
                    points,
                    cfg.fd_trials,
                    derive_seed(seed, 5),
                )?,
                tolerance: GRADIENT_TOL,
            });
            Ok(out)
        }
        Job::Spd(d) => {
            let seed = derive_seed(cfg.seed, 1000 + d as u64);
            let m = PerturbedTransport {
                inner: Spd::new(d)?,
                epsilon: cfg.transport_perturbation,
            };
            let mut out = geometry_suites(&m, &spd_spec(1.0)?, d, cfg, seed)?;
            let inst = gen_centroid_instance(d.max(2), 5, 10.0, derive_seed(seed, 4))?;
            out.push(SuiteResult {
                suite: "gradient",
                manifold: m.name(),
                dim: d.max(2),
                samples: points * cfg.fd_trials,
                worst_residual: gradient_residual(
                    &inst,
                    points,
                    cfg.fd_trials,
                    derive_seed(seed, 5),
                )?,
                tolerance: GRADIENT_TOL,
            });
            Ok(out)
        }
    }
}

/// Runs every suite on every configured dimension and writes `check_geometry.csv`.
pub fn run_check_geometry(cfg: &ExperimentConfig) -> Result<GeometryReport> {
    cfg.validate_geometry()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let jobs: Vec<Job> = cfg
        .sphere_dims
        .iter()
        .map(|&d| Job::Sphere(d))
        .chain(cfg.spd_dims.iter().map(|&d| Job::Spd(d)))
        .collect();
    let nested = with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&j| run_job(cfg, j))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut suites: Vec<SuiteResult> = nested.into_iter().flatten().collect();
    suites.sort_by(|a, b| (a.manifold, a.dim, a.suite).cmp(&(b.manifold, b.dim, b.suite)));

    let mut table = Table::new(&[
        "suite",
        "manifold",
        "dim",
        "samples",
        "worst_residual",
        "tolerance",
        "passed",
    ]);
    for s in &suites {
        table.push(vec![
            Cell::from(s.suite),
            Cell::from(s.manifold),
            Cell::from(s.dim),
            Cell::from(s.samples),
            Cell::from(s.worst_residual),
            Cell::from(s.tolerance),
            Cell::from(if s.passed() { "true" } else { "false" }),
        ]);
    }
    table.write(&cfg.out_dir.join("check_geometry.csv"))?;
    cfg.save_resolved("check_geometry")?;
    Ok(GeometryReport { suites })
}
