//! Riemannian centroid (Karcher mean) of SPD matrices.
//!
//! The objective is the sum of squared affine-invariant distances
//! `f(X) = Σ_i d²(X, A_i)`. Components are stored as `f_i = n·d²(X, A_i)` so the
//! mean-form finite sum agrees with `f`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldSpec};
use crate::oracle::{centroid_ground_truth, OracleResult};
use crate::problems::FiniteSumProblem;
use crate::rng::{haar_orthonormal, seeded};
use crate::spd::{spd_spec, Spd, SpdPoint, SpdTangent};

#[derive(Clone, Debug)]
pub struct CentroidInstance {
    matrices: Vec<SpdPoint>,
    cond_q: f64,
    seed: Option<u64>,
    manifold: Spd,
    spec: ManifoldSpec,
}

impl CentroidInstance {
    /// Instance over the given matrices.
    ///
    /// The working-domain diameter is taken as twice the largest distance from
    /// the arithmetic mean to any `A_i`, which contains every iterate of a
    /// descent method started at the arithmetic mean in practice.
    pub fn new(matrices: Vec<SpdPoint>, cond_q: f64, seed: Option<u64>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::invalid("centroid instance needs at least one matrix"))?;
        let manifold = Spd::new(first.dim())?;
        if matrices.iter().any(|a| a.dim() != first.dim()) {
            return Err(Error::invalid("matrices of different sizes"));
        }
        let mean = SpdPoint::arithmetic_mean(&matrices)?;
        let mut radius: f64 = 0.0;
        for a in &matrices {
            radius = radius.max(manifold.dist(&mean, a)?);
        }
        // all matrices equal: any positive diameter gives ζ ≈ 1
        let diameter = (2.0 * radius).max(1e-8);
        Ok(CentroidInstance {
            spec: spd_spec(diameter)?,
            matrices,
            cond_q,
            seed,
            manifold,
        })
    }

    pub fn matrices(&self) -> &[SpdPoint] {
        &self.matrices
    }

    pub fn d(&self) -> usize {
        self.manifold.matrix_dim()
    }

    pub fn cond_q(&self) -> f64 {
        self.cond_q
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Initial point used by the benchmarks: `(1/n)·Σ A_i`.
    pub fn arithmetic_mean(&self) -> Result<SpdPoint> {
        SpdPoint::arithmetic_mean(&self.matrices)
    }

    /// `Σ_i d²(X, A_i)`.
    pub fn value(&self, x: &SpdPoint) -> Result<f64> {
        let mut acc = 0.0;
        for a in &self.matrices {
            let d = self.manifold.dist(x, a)?;
            acc += d * d;
        }
        Ok(acc)
    }

    /// `−2·Log_X(A_i)`, the gradient of a single squared distance.
    pub fn term_grad(&self, i: usize, x: &SpdPoint) -> Result<SpdTangent> {
        self.check_index(i)?;
        Ok(self.manifold.log(x, &self.matrices[i])?.scale(-2.0))
    }

    pub fn ground_truth(&self) -> Result<OracleResult<SpdPoint>> {
        centroid_ground_truth(self)
    }
}

impl FiniteSumProblem for CentroidInstance {
    type M = Spd;

    fn manifold(&self) -> &Spd {
        &self.manifold
    }

    fn n(&self) -> usize {
        self.matrices.len()
    }

    fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    /// `2nζ` for the sum-form objective.
    fn smoothness(&self) -> f64 {
        2.0 * self.n() as f64 * self.spec.zeta()
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(2.0 * self.n() as f64)
    }

    fn gradient_dominance(&self) -> Option<f64> {
        self.strong_convexity().map(|mu| 1.0 / (2.0 * mu))
    }

    fn component_value(&self, i: usize, x: &SpdPoint) -> Result<f64> {
        self.check_index(i)?;
        let d = self.manifold.dist(x, &self.matrices[i])?;
        Ok(self.n() as f64 * d * d)
    }

    fn component_grad(&self, i: usize, x: &SpdPoint) -> Result<SpdTangent> {
        Ok(self.term_grad(i, x)?.scale(self.n() as f64))
    }
}

/// `n` random SPD matrices `A_i = Q_i·Λ·Q_iᵀ` with Haar `Q_i`.
///
/// `Λ` has log-spaced eigenvalues from `1` down to `1/cond_q`, so each matrix
/// has condition number `cond_q` and spectral norm 1.
pub fn gen_centroid_instance(
    d: usize,
    n: usize,
    cond_q: f64,
    seed: u64,
) -> Result<CentroidInstance> {
    if d < 2 {
        return Err(Error::invalid("centroid instance needs d >= 2"));
    }
    if n == 0 {
        return Err(Error::invalid("centroid instance needs n >= 1"));
    }
    if !(cond_q >= 1.0 && cond_q.is_finite()) {
        return Err(Error::invalid(format!("cond_q must be >= 1, got {cond_q}")));
    }
    let lambda: Vec<f64> = (0..d)
        .map(|k| cond_q.powf(-(k as f64) / (d - 1) as f64))
        .collect();
    let top = lambda.iter().cloned().fold(0.0, f64::max);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        lambda.iter().map(|l| l / top),
    ));
    let mut rng = seeded(seed);
    let mut matrices = Vec::with_capacity(n);
    for _ in 0..n {
        let q = haar_orthonormal(&mut rng, d, d);
        matrices.push(SpdPoint::new(&q * &diag * q.transpose())?);
    }
    CentroidInstance::new(matrices, cond_q, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::SymEig;
    use approx::assert_relative_eq;

    #[test]
    fn single_matrix_has_zero_value_and_gradient_at_itself() {
        let a = SpdPoint::from_diagonal(&[2.0, 3.0]).unwrap();
        let inst = CentroidInstance::new(vec![a.clone()], 1.5, None).unwrap();
        assert!(inst.value(&a).unwrap() < 1e-20);
        assert!(inst.component_grad(0, &a).unwrap().components.norm() < 1e-14);
    }

    #[test]
    fn one_gradient_step_with_half_lands_on_single_matrix() {
        let a = SpdPoint::from_diagonal(&[2.0, 0.5]).unwrap();
        let inst = CentroidInstance::new(vec![a.clone()], 4.0, None).unwrap();
        let x = SpdPoint::identity(2).unwrap();
        let g = inst.full_grad(&x).unwrap();
        let next = inst.manifold().exp(&g.scale(-0.5)).unwrap();
        assert!((next.mat() - a.mat()).norm() < 1e-12);
    }

    #[test]
    fn commuting_pair_is_minimized_at_geometric_mean() {
        let a = SpdPoint::from_diagonal(&[1.0, 4.0]).unwrap();
        let b = SpdPoint::from_diagonal(&[9.0, 1.0]).unwrap();
        let inst = CentroidInstance::new(vec![a, b], 9.0, None).unwrap();
        let star = SpdPoint::from_diagonal(&[3.0, 2.0]).unwrap();
        assert!(inst.full_grad(&star).unwrap().components.norm() < 1e-12);
        let off = SpdPoint::from_diagonal(&[3.1, 2.0]).unwrap();
        assert!(inst.value(&off).unwrap() > inst.value(&star).unwrap());
    }

    #[test]
    fn value_is_sum_of_squared_distances() {
        let inst = gen_centroid_instance(4, 6, 20.0, 1).unwrap();
        let x = inst.arithmetic_mean().unwrap();
        let direct: f64 = inst
            .matrices()
            .iter()
            .map(|a| inst.manifold().dist(&x, a).unwrap().powi(2))
            .sum();
        assert_relative_eq!(inst.value(&x).unwrap(), direct, epsilon = 1e-12);
        assert_relative_eq!(inst.full_value(&x).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn generator_contract() {
        let inst = gen_centroid_instance(5, 8, 100.0, 7).unwrap();
        for a in inst.matrices() {
            let eig = SymEig::new(a.mat()).unwrap();
            assert!((eig.max() - 1.0).abs() < 1e-12);
            assert!((eig.max() / eig.min() - 100.0).abs() < 1e-8);
        }
        let again = gen_centroid_instance(5, 8, 100.0, 7).unwrap();
        assert_eq!(inst.matrices(), again.matrices());
    }

    #[test]
    fn unit_condition_number_gives_identity() {
        let inst = gen_centroid_instance(3, 4, 1.0, 0).unwrap();
        for a in inst.matrices() {
            assert!((a.mat() - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
        }
    }

    #[test]
    fn generator_rejects_bad_arguments() {
        assert!(gen_centroid_instance(1, 4, 2.0, 0).is_err());
        assert!(gen_centroid_instance(3, 0, 2.0, 0).is_err());
        assert!(gen_centroid_instance(3, 4, 0.5, 0).is_err());
    }

    #[test]
    fn constants_follow_sum_form() {
        let inst = gen_centroid_instance(3, 10, 10.0, 2).unwrap();
        assert_eq!(inst.strong_convexity(), Some(20.0));
        assert!(inst.smoothness() >= 20.0);
        assert_eq!(inst.gradient_dominance(), Some(1.0 / 40.0));
    }
}
