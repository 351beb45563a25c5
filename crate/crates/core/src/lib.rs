//! Variance-reduced stochastic optimization on Riemannian manifolds.
//!
//! The crate is organized around a small manifold contract ([`geometry::Manifold`])
//! with two implementations, the unit sphere ([`sphere::Sphere`]) and the
//! symmetric positive-definite cone under the affine-invariant metric
//! ([`spd::Spd`]). Finite-sum objectives ([`problems::FiniteSumProblem`]) are
//! optimized by Riemannian SVRG and its baselines in [`solvers`], with every
//! component-gradient access billed to an IFO counter.
//!
//! [`oracle`] holds independent references (dense eigensolver, high-accuracy
//! centroid, geodesic finite differences, variance-reduced gradient
//! enumeration) and [`experiments`] drives the reproducible desk-scale studies
//! exposed by the `rsvrg` binary.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```bash
//! cargo run --release -p rsvrg --example sphere_geometry
//! cargo run --release -p rsvrg --example leading_eigenvector
//! cargo run --release -p rsvrg --example karcher_mean
//! ```

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod spd;
pub mod sphere;

pub use error::{Error, Result};
pub use geometry::{Manifold, ManifoldSpec, Tangent, TangentVector};
pub use problems::{FiniteSumProblem, IfoCounter};
pub use spd::{Spd, SpdPoint};
pub use sphere::{Sphere, SpherePoint};
