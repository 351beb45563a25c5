//! Finite-sum objectives `f(x) = (1/n)·Σ f_i(x)` and IFO accounting.
//!
//! Component functions are exposed through [`FiniteSumProblem`]; solvers
//! never call them directly but through an [`Ifo`] handle, which bills one
//! call per `(f_i(x), ∇f_i(x))` access to an [`IfoCounter`].

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldSpec, Tangent};

pub mod centroid;
pub mod io;
pub mod pca;

pub use centroid::{gen_centroid_instance, CentroidInstance};
pub use pca::{gen_pca_instance, pca_gd_constant, PcaInstance};

/// Number of incremental first-order oracle calls made so far.
///
/// Atomic so concurrent workers can share one counter; the final total does
/// not depend on interleaving.
#[derive(Debug, Default)]
pub struct IfoCounter(AtomicU64);

impl IfoCounter {
    pub fn new() -> Self {
        IfoCounter(AtomicU64::new(0))
    }

    pub fn add(&self, calls: u64) {
        self.0.fetch_add(calls, Ordering::Relaxed);
    }

    pub fn calls(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// `min_x (1/n)·Σ_i f_i(x)` over a Riemannian manifold.
pub trait FiniteSumProblem: Send + Sync {
    type M: Manifold;

    fn manifold(&self) -> &Self::M;

    fn n(&self) -> usize;

    /// Curvature bounds and diameter of the working domain.
    fn spec(&self) -> ManifoldSpec;

    /// g-smoothness constant `L` of the components.
    fn smoothness(&self) -> f64;

    /// Strong g-convexity constant `μ` of `f`, when known.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }

    /// Gradient-domination constant `τ` of `f`, when known.
    fn gradient_dominance(&self) -> Option<f64> {
        None
    }

    fn component_value(&self, i: usize, x: &<Self::M as Manifold>::Point) -> Result<f64>;

    /// Riemannian gradient of `f_i` at `x`.
    fn component_grad(
        &self,
        i: usize,
        x: &<Self::M as Manifold>::Point,
    ) -> Result<Tangent<Self::M>>;

    /// `(1/n)·Σ f_i(x)`: summed in index order, then divided.
    fn full_value(&self, x: &<Self::M as Manifold>::Point) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..self.n() {
            acc += self.component_value(i, x)?;
        }
        Ok(acc / self.n() as f64)
    }

    /// `(1/n)·Σ ∇f_i(x)`: summed in index order, then scaled.
    fn full_grad(&self, x: &<Self::M as Manifold>::Point) -> Result<Tangent<Self::M>> {
        let mut acc = self.component_grad(0, x)?;
        for i in 1..self.n() {
            let g = self.component_grad(i, x)?;
            crate::geometry::Ambient::axpy(&mut acc.components, 1.0, &g.components);
        }
        Ok(acc.scale(1.0 / self.n() as f64))
    }

    /// Objective value for reporting; may use a closed form that is not
    /// billed as IFO calls.
    fn measure_value(&self, x: &<Self::M as Manifold>::Point) -> Result<f64> {
        self.full_value(x)
    }

    /// `‖∇f(x)‖²` for reporting.
    fn measure_grad_norm_sq(&self, x: &<Self::M as Manifold>::Point) -> Result<f64> {
        let g = self.full_grad(x)?;
        Ok(self.manifold().norm_sq(&g))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        Ok(())
    }
}

/// Billing wrapper around a problem: every access goes through the counter.
pub struct Ifo<'a, P: FiniteSumProblem> {
    problem: &'a P,
    counter: &'a IfoCounter,
}

impl<'a, P: FiniteSumProblem> Ifo<'a, P> {
    pub fn new(problem: &'a P, counter: &'a IfoCounter) -> Self {
        Ifo { problem, counter }
    }

    pub fn problem(&self) -> &'a P {
        self.problem
    }

    pub fn calls(&self) -> u64 {
        self.counter.calls()
    }

    /// One IFO call.
    pub fn grad(&self, i: usize, x: &<P::M as Manifold>::Point) -> Result<Tangent<P::M>> {
        self.counter.add(1);
        self.problem.component_grad(i, x)
    }

    /// `n` IFO calls.
    pub fn full_grad(&self, x: &<P::M as Manifold>::Point) -> Result<Tangent<P::M>> {
        self.counter.add(self.problem.n() as u64);
        self.problem.full_grad(x)
    }
}
