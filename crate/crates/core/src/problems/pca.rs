//! Leading eigenvector as a finite sum on the sphere.
//!
//! `f(x) = −xᵀAx` with `A = Σ_i z_i z_iᵀ`. As a finite-sum problem the
//! components are stored scaled by `n`, `f_i(x) = −n·(z_iᵀx)²`, so that their
//! mean is exactly `f`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, TangentVector};
use crate::oracle::{pca_ground_truth, OracleResult};
use crate::problems::FiniteSumProblem;
use crate::rng::{haar_orthonormal, seeded};
use crate::sphere::{Sphere, SpherePoint, SphereTangent};

/// Above this dimension `A` is never formed; products go through `Z`.
const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub struct PcaInstance {
    z: DMatrix<f64>,
    a: Option<DMatrix<f64>>,
    eigengap: f64,
    seed: Option<u64>,
    sphere: Sphere,
    smoothness: f64,
}

impl PcaInstance {
    /// Instance from a `d × n` data matrix whose columns are the `z_i`.
    ///
    /// `eigengap` is recorded as given; pass the true `λ₁ − λ₂` of `ZZᵀ`.
    pub fn from_data(z: DMatrix<f64>, eigengap: f64, seed: Option<u64>) -> Result<Self> {
        let (d, n) = z.shape();
        let sphere = Sphere::new(d)?;
        if n == 0 {
            return Err(Error::invalid("PCA instance needs at least one sample"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data matrix has non-finite entries"));
        }
        let max_sq = z
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0, f64::max);
        let a = (d <= DENSE_LIMIT).then(|| {
            let a = &z * z.transpose();
            (&a + a.transpose()) * 0.5
        });
        Ok(PcaInstance {
            smoothness: 2.0 * n as f64 * max_sq,
            z,
            a,
            eigengap,
            seed,
            sphere,
        })
    }

    pub fn d(&self) -> usize {
        self.z.nrows()
    }

    pub fn n(&self) -> usize {
        self.z.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn eigengap(&self) -> f64 {
        self.eigengap
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    /// `A = ZZᵀ`, formed on demand when it is not cached.
    pub fn covariance(&self) -> DMatrix<f64> {
        match &self.a {
            Some(a) => a.clone(),
            None => &self.z * self.z.transpose(),
        }
    }

    fn apply_a(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.a {
            Some(a) => a * x,
            None => &self.z * (self.z.transpose() * x),
        }
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.dim() != self.d() {
            return Err(Error::invalid(format!(
                "point has dimension {}, instance has d = {}",
                x.dim(),
                self.d()
            )));
        }
        Ok(())
    }

    /// `f(x) = −xᵀAx`.
    pub fn value(&self, x: &SpherePoint) -> Result<f64> {
        self.check_point(x)?;
        Ok(-x.coords().dot(&self.apply_a(x.coords())))
    }

    /// Riemannian gradient of `f`: `−2(I − xxᵀ)Ax`.
    pub fn riemannian_grad(&self, x: &SpherePoint) -> Result<SphereTangent> {
        self.check_point(x)?;
        let ax = self.apply_a(x.coords());
        let rayleigh = x.coords().dot(&ax);
        let g = (ax - x.coords() * rayleigh) * -2.0;
        Ok(TangentVector::new(x.clone(), g))
    }

    /// Gradient-domination constant inside the ball `{x : ⟨x, v₁⟩ ≥ ε}`.
    pub fn gd_constant(&self, epsilon: f64) -> Result<f64> {
        pca_gd_constant(self.eigengap, epsilon)
    }

    pub fn ground_truth(&self) -> Result<OracleResult<SpherePoint>> {
        pca_ground_truth(self)
    }
}

/// `τ = max{1/(2ε²δ), 1/δ}`: `f − f* ≤ τ‖∇f‖²` whenever `⟨x, v₁⟩ ≥ ε`.
pub fn pca_gd_constant(eigengap: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if !(eigengap > 0.0 && eigengap.is_finite()) {
        return Err(Error::invalid(format!(
            "eigengap must be positive, got {eigengap}"
        )));
    }
    Ok((1.0 / (2.0 * epsilon * epsilon * eigengap)).max(1.0 / eigengap))
}

impl FiniteSumProblem for PcaInstance {
    type M = Sphere;

    fn manifold(&self) -> &Sphere {
        &self.sphere
    }

    fn n(&self) -> usize {
        self.z.ncols()
    }

    fn spec(&self) -> ManifoldSpec {
        self.sphere.spec()
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn component_value(&self, i: usize, x: &SpherePoint) -> Result<f64> {
        self.check_index(i)?;
        self.check_point(x)?;
        let p = self.z.column(i).dot(x.coords());
        Ok(-(self.n() as f64) * p * p)
    }

    /// `−2n·(z_iᵀx)·(z_i − (z_iᵀx)·x)`.
    fn component_grad(&self, i: usize, x: &SpherePoint) -> Result<SphereTangent> {
        self.check_index(i)?;
        self.check_point(x)?;
        let zi = self.z.column(i);
        let p = zi.dot(x.coords());
        let scale = -2.0 * self.n() as f64 * p;
        let g = (zi - x.coords() * p) * scale;
        Ok(TangentVector::new(x.clone(), g))
    }

    fn measure_value(&self, x: &SpherePoint) -> Result<f64> {
        self.value(x)
    }

    fn measure_grad_norm_sq(&self, x: &SpherePoint) -> Result<f64> {
        Ok(self.riemannian_grad(x)?.components.norm_squared())
    }
}

/// Synthetic `Z = U·D·Vᵀ` with `A = ZZᵀ = U·D²·Uᵀ`.
///
/// `D²` has `1` and `1 − δ` on top, and a tail `(1 − δ)·u_i` with
/// `u_i ~ Uniform(0, 1)` sorted descending, so `λ₁ − λ₂ = δ`. `U` and the
/// first `d` columns of `V` are Haar. The random draws do not depend on `δ`:
/// two instances with the same seed share `U`, `V` and the tail.
pub fn gen_pca_instance(d: usize, n: usize, delta: f64, seed: u64) -> Result<PcaInstance> {
    if d < 2 {
        return Err(Error::invalid("PCA instance needs d >= 2"));
    }
    if n < d {
        return Err(Error::invalid(format!(
            "PCA instance needs n >= d, got n = {n}, d = {d}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut rng = seeded(seed);
    let u = haar_orthonormal(&mut rng, d, d);
    let v = haar_orthonormal(&mut rng, n, d);
    let mut tail: Vec<f64> = (2..d).map(|_| rng.random::<f64>()).collect();
    tail.sort_by(|a, b| b.total_cmp(a));

    let spectrum = pca_spectrum(delta, &tail);
    let mut ud = u;
    for (j, s) in spectrum.iter().enumerate() {
        ud.column_mut(j).scale_mut(s.sqrt());
    }
    let z = ud * v.transpose();
    PcaInstance::from_data(z, delta, Some(seed))
}

/// Eigenvalues of `A` (descending) for gap `delta` and tail draws in `(0, 1)`.
pub fn pca_spectrum(delta: f64, tail: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(tail.len() + 2);
    out.push(1.0);
    out.push(1.0 - delta);
    out.extend(tail.iter().map(|u| (1.0 - delta) * u));
    out
}

/// Uniform point on the sphere with `⟨x, v⟩ ≥ epsilon`, by rejection.
pub fn sample_in_cap<R: Rng + ?Sized>(
    sphere: &Sphere,
    v: &SpherePoint,
    epsilon: f64,
    rng: &mut R,
) -> SpherePoint {
    use crate::geometry::Manifold;
    loop {
        let x = sphere.random_point(rng);
        let a = x.coords().dot(v.coords());
        if a.abs() >= epsilon {
            let x = if a < 0.0 {
                SpherePoint::new(-x.into_inner()).expect("unit vector")
            } else {
                x
            };
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;
    use crate::spd::SymEig;
    use approx::assert_relative_eq;

    fn diag21() -> PcaInstance {
        // Z = diag(√2, 1) gives A = diag(2, 1)
        let z = DMatrix::from_row_slice(2, 2, &[2f64.sqrt(), 0.0, 0.0, 1.0]);
        PcaInstance::from_data(z, 1.0, None).unwrap()
    }

    #[test]
    fn value_examples() {
        let p = diag21();
        let e1 = SpherePoint::basis(2, 0).unwrap();
        assert_relative_eq!(p.value(&e1).unwrap(), -2.0, epsilon = 1e-14);
        let x = SpherePoint::from_slice(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(p.value(&x).unwrap(), -1.5, epsilon = 1e-14);
        assert!(p.value(&SpherePoint::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn value_respects_rayleigh_bound() {
        let p = gen_pca_instance(6, 20, 0.2, 1).unwrap();
        let mut rng = seeded(2);
        for _ in 0..1000 {
            let x = p.sphere().random_point(&mut rng);
            assert!(p.value(&x).unwrap() >= -1.0 - 1e-12);
        }
    }

    #[test]
    fn gradient_examples() {
        let p = diag21();
        let x = SpherePoint::from_slice(&[1.0, 1.0]).unwrap();
        let g = p.full_grad(&x).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((g.components - DVector::from_column_slice(&[-h, h])).norm() < 1e-14);
        let g = p.riemannian_grad(&x).unwrap();
        assert!((g.components - DVector::from_column_slice(&[-h, h])).norm() < 1e-14);

        let e1 = SpherePoint::basis(2, 0).unwrap();
        assert!(p.full_grad(&e1).unwrap().components.norm() < 1e-15);
        assert!(matches!(
            p.component_grad(2, &x),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn component_means_match_full_objective() {
        let p = gen_pca_instance(10, 50, 0.1, 3).unwrap();
        let mut rng = seeded(4);
        for _ in 0..20 {
            let x = p.sphere().random_point(&mut rng);
            assert!((p.full_value(&x).unwrap() - p.value(&x).unwrap()).abs() < 1e-12);
            let g = p.full_grad(&x).unwrap();
            assert!((g.components - p.riemannian_grad(&x).unwrap().components).norm() < 1e-12);
            for i in 0..p.n() {
                let gi = p.component_grad(i, &x).unwrap();
                assert!(p.sphere().tangent_residual(&x, &gi.components) < 1e-12);
            }
        }
    }

    #[test]
    fn gd_constant_examples() {
        assert_relative_eq!(pca_gd_constant(0.5, 1.0).unwrap(), 2.0);
        let eps = 1.0 / 2f64.sqrt();
        assert_relative_eq!(
            pca_gd_constant(0.3, eps).unwrap(),
            1.0 / 0.3,
            epsilon = 1e-12
        );
        assert!(pca_gd_constant(0.3, 0.0).is_err());
        assert!(pca_gd_constant(0.3, 1.5).is_err());
    }

    #[test]
    fn generator_eigengap_matches_dense_eigensolver() {
        for &(d, n, delta) in &[(5usize, 20usize, 0.3), (20, 40, 0.01), (30, 30, 1e-3)] {
            let p = gen_pca_instance(d, n, delta, 11).unwrap();
            let eig = SymEig::new(&p.covariance()).unwrap();
            let l = eig.eigenvalues.as_slice();
            assert!((l[d - 1] - l[d - 2] - delta).abs() < 1e-10, "d={d}");
            assert!((l[d - 1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_small_case() {
        let p = gen_pca_instance(2, 2, 0.5, 0).unwrap();
        let eig = SymEig::new(&p.covariance()).unwrap();
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn generator_is_deterministic_and_shares_factors() {
        let a = gen_pca_instance(8, 30, 0.1, 5).unwrap();
        let b = gen_pca_instance(8, 30, 0.1, 5).unwrap();
        assert_eq!(a.data(), b.data());
        let c = gen_pca_instance(8, 30, 0.01, 5).unwrap();
        // same U: the leading eigenvector does not depend on delta
        let va = a.ground_truth().unwrap().optimum_point;
        let vc = c.ground_truth().unwrap().optimum_point;
        assert!((va.coords() - vc.coords()).norm() < 1e-8);
    }

    #[test]
    fn generator_rejects_bad_arguments() {
        assert!(gen_pca_instance(1, 5, 0.1, 0).is_err());
        assert!(gen_pca_instance(5, 4, 0.1, 0).is_err());
        assert!(gen_pca_instance(5, 5, 0.0, 0).is_err());
        assert!(gen_pca_instance(5, 5, 1.0, 0).is_err());
    }

    #[test]
    fn cap_sampling_respects_threshold() {
        let s = Sphere::new(20).unwrap();
        let v = SpherePoint::basis(20, 0).unwrap();
        let mut rng = seeded(1);
        for _ in 0..100 {
            let x = sample_in_cap(&s, &v, 0.3, &mut rng);
            assert!(x.coords()[0] >= 0.3);
        }
    }
}
