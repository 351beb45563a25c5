//! Symmetric positive-definite matrices under the affine-invariant metric
//! `⟨U, V⟩_X = tr(X⁻¹ U X⁻¹ V)`.
//!
//! All matrix functions go through a symmetric eigendecomposition
//! ([`SymEig`]). Every matrix-valued result is re-symmetrized so that SPD
//! invariants survive long iterate sequences.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldSpec, TangentVector};
use crate::rng::{gaussian_matrix, gaussian_vector, haar_orthonormal};

/// Eigenvalues at or below this are treated as a hard positive-definiteness failure.
pub const EIG_FLOOR: f64 = 1e-12;

/// Lower sectional-curvature bound of the affine-invariant metric.
pub const SPD_KAPPA_MIN: f64 = -0.5;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Spectral decomposition `M = Q·diag(λ)·Qᵀ` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymEig {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let eig = SymmetricEigen::new(symmetrize(m));
        let d = m.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(d, d);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(SymEig {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Q·diag(f(λ))·Qᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            scaled.column_mut(j).scale_mut(fl);
        }
        symmetrize(&(scaled * q.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|l| l)
    }
}

/// Scalar functions that [`sym_func`] lifts to symmetric matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatFn {
    Sqrt,
    InvSqrt,
    Log,
    Exp,
}

impl MatFn {
    fn needs_positive(self) -> bool {
        !matches!(self, MatFn::Exp)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            MatFn::Sqrt => x.sqrt(),
            MatFn::InvSqrt => 1.0 / x.sqrt(),
            MatFn::Log => x.ln(),
            MatFn::Exp => x.exp(),
        }
    }
}

/// Spectral calculus on a symmetric matrix.
///
/// `sqrt`, `inv_sqrt` and `log` fail with [`Error::NotPositiveDefinite`] when
/// the smallest eigenvalue is at or below [`EIG_FLOOR`]; nothing is clamped.
pub fn sym_func(m: &DMatrix<f64>, f: MatFn) -> Result<DMatrix<f64>> {
    let eig = SymEig::new(m)?;
    sym_func_eig(&eig, f)
}

fn sym_func_eig(eig: &SymEig, f: MatFn) -> Result<DMatrix<f64>> {
    if f.needs_positive() && eig.min() <= EIG_FLOOR {
        return Err(Error::NotPositiveDefinite { min_eig: eig.min() });
    }
    Ok(eig.map(|l| f.apply(l)))
}

struct SpdData {
    mat: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

/// A point of the SPD manifold.
///
/// The square root and inverse square root are computed once at construction
/// and shared between clones.
#[derive(Clone)]
pub struct SpdPoint(Arc<SpdData>);

impl SpdPoint {
    /// Symmetrizes `mat` and checks positive definiteness.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let eig = SymEig::new(&mat)?;
        if eig.min() <= EIG_FLOOR {
            return Err(Error::NotPositiveDefinite { min_eig: eig.min() });
        }
        Ok(SpdPoint(Arc::new(SpdData {
            mat: symmetrize(&mat),
            sqrt: eig.map(f64::sqrt),
            inv_sqrt: eig.map(|l| 1.0 / l.sqrt()),
            eigenvalues: eig.eigenvalues,
        })))
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.0.mat
    }

    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.0.sqrt
    }

    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.0.inv_sqrt
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.0.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.0.mat.nrows()
    }

    /// Spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.0.eigenvalues[self.dim() - 1]
    }

    /// `X^{-1/2}·M·X^{-1/2}`, symmetrized.
    pub fn whiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(self.inv_sqrt() * m * self.inv_sqrt()))
    }

    /// `X^{1/2}·M·X^{1/2}`, symmetrized.
    pub fn unwhiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(self.sqrt() * m * self.sqrt()))
    }

    /// `P·X·Pᵀ`.
    pub fn congruence(&self, p: &DMatrix<f64>) -> Result<Self> {
        Self::new(p * self.mat() * p.transpose())
    }

    /// Entrywise average `(1/n)·Σ X_i`; SPD as a convex combination of SPD matrices.
    pub fn arithmetic_mean(points: &[SpdPoint]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::invalid("arithmetic mean of an empty set"))?;
        let mut acc = DMatrix::zeros(first.dim(), first.dim());
        for p in points {
            if p.dim() != first.dim() {
                return Err(Error::invalid("matrices of different sizes"));
            }
            acc += p.mat();
        }
        Self::new(acc / points.len() as f64)
    }
}

impl fmt::Debug for SpdPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SpdPoint").field(&self.0.mat).finish()
    }
}

impl PartialEq for SpdPoint {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.mat == other.0.mat
    }
}

pub type SpdTangent = TangentVector<SpdPoint, DMatrix<f64>>;

/// SPD(d) with the affine-invariant metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spd {
    dim: usize,
}

impl Spd {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("SPD manifold needs d >= 1"));
        }
        Ok(Spd { dim })
    }

    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    fn check(&self, x: &SpdPoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: expected {}, got {}",
                self.dim,
                x.dim()
            )));
        }
        Ok(())
    }

    /// `E = X^{1/2}(X^{-1/2} Y X^{-1/2})^{1/2} X^{-1/2}`, the transport factor.
    fn transport_factor(&self, x: &SpdPoint, y: &SpdPoint) -> Result<DMatrix<f64>> {
        self.check(y)?;
        let s = sym_func(&x.whiten(y.mat()), MatFn::Sqrt)?;
        Ok(x.sqrt() * s * x.inv_sqrt())
    }
}

/// Curvature bounds for SPD with the affine-invariant metric.
pub fn spd_spec(diameter_estimate: f64) -> Result<ManifoldSpec> {
    ManifoldSpec::new(SPD_KAPPA_MIN, 0.0, diameter_estimate)
}

impl Manifold for Spd {
    type Point = SpdPoint;
    type Vector = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "spd"
    }

    fn injectivity_radius(&self) -> f64 {
        f64::INFINITY
    }

    fn same_point(&self, x: &SpdPoint, y: &SpdPoint) -> bool {
        Arc::ptr_eq(&x.0, &y.0) || (x.mat() - y.mat()).norm() <= 1e-12 * x.mat().norm().max(1.0)
    }

    fn tangent_residual(&self, _x: &SpdPoint, v: &DMatrix<f64>) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        (v - v.transpose()).norm() / n
    }

    fn metric(&self, x: &SpdPoint, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        let wu = x.inv_sqrt() * u * x.inv_sqrt();
        if std::ptr::eq(u, v) {
            return wu.norm_squared();
        }
        let wv = x.inv_sqrt() * v * x.inv_sqrt();
        wu.dot(&wv)
    }

    /// `X^{1/2} exp(X^{-1/2} V X^{-1/2}) X^{1/2}`.
    fn exp(&self, v: &SpdTangent) -> Result<SpdPoint> {
        let x = &v.base;
        self.check(x)?;
        if v.components.iter().any(|e| !e.is_finite()) {
            return Err(Error::domain("non-finite tangent vector"));
        }
        if v.components.iter().all(|&e| e == 0.0) {
            return Ok(x.clone());
        }
        let e = sym_func(&x.whiten(&v.components), MatFn::Exp)?;
        SpdPoint::new(x.unwhiten(&e))
    }

    /// `X^{1/2} log(X^{-1/2} Y X^{-1/2}) X^{1/2}`.
    fn log(&self, x: &SpdPoint, y: &SpdPoint) -> Result<SpdTangent> {
        self.check(x)?;
        self.check(y)?;
        if Arc::ptr_eq(&x.0, &y.0) {
            return Ok(self.zero(x));
        }
        let l = sym_func(&x.whiten(y.mat()), MatFn::Log)?;
        Ok(TangentVector::new(x.clone(), x.unwhiten(&l)))
    }

    fn transport(&self, v: &SpdTangent, y: &SpdPoint) -> Result<SpdTangent> {
        if self.same_point(&v.base, y) {
            return Ok(TangentVector::new(y.clone(), v.components.clone()));
        }
        let e = self.transport_factor(&v.base, y)?;
        let out = symmetrize(&(&e * &v.components * e.transpose()));
        Ok(TangentVector::new(y.clone(), out))
    }

    fn transport_pair(
        &self,
        u: &SpdTangent,
        v: &SpdTangent,
        y: &SpdPoint,
    ) -> Result<(SpdTangent, SpdTangent)> {
        if self.same_point(&u.base, y) {
            return Ok((
                TangentVector::new(y.clone(), u.components.clone()),
                TangentVector::new(y.clone(), v.components.clone()),
            ));
        }
        let e = self.transport_factor(&u.base, y)?;
        let et = e.transpose();
        let tu = symmetrize(&(&e * &u.components * &et));
        let tv = symmetrize(&(&e * &v.components * &et));
        Ok((
            TangentVector::new(y.clone(), tu),
            TangentVector::new(y.clone(), tv),
        ))
    }

    /// `‖log(X^{-1/2} Y X^{-1/2})‖_F`.
    fn dist(&self, x: &SpdPoint, y: &SpdPoint) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let eig = SymEig::new(&x.whiten(y.mat()))?;
        if eig.min() <= EIG_FLOOR {
            return Err(Error::NotPositiveDefinite { min_eig: eig.min() });
        }
        Ok(eig
            .eigenvalues
            .iter()
            .map(|l| l.ln().powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn project(&self, x: &SpdPoint, ambient: &DMatrix<f64>) -> SpdTangent {
        TangentVector::new(x.clone(), symmetrize(ambient))
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SpdPoint {
        let q = haar_orthonormal(rng, self.dim, self.dim);
        let logs = gaussian_vector(rng, self.dim) * 0.7;
        let lam = DMatrix::from_diagonal(&logs.map(f64::exp));
        SpdPoint::new(&q * lam * q.transpose()).expect("random SPD point is positive definite")
    }

    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &SpdPoint, rng: &mut R) -> SpdTangent {
        loop {
            let s = symmetrize(&gaussian_matrix(rng, self.dim, self.dim));
            let n = s.norm();
            if n > 1e-8 {
                // whitened coordinates with unit Frobenius norm have unit metric norm
                return TangentVector::new(x.clone(), x.unwhiten(&(s / n)));
            }
        }
    }

    fn zero(&self, x: &SpdPoint) -> SpdTangent {
        TangentVector::new(x.clone(), DMatrix::zeros(self.dim, self.dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn symeig_reconstructs_and_is_orthogonal() {
        let mut rng = seeded(1);
        let spd = Spd::new(8).unwrap();
        let x = spd.random_point(&mut rng);
        let eig = SymEig::new(x.mat()).unwrap();
        assert!((eig.reconstruct() - x.mat()).norm() <= 1e-9 * x.mat().norm());
        let q = &eig.eigenvectors;
        assert!((q.transpose() * q - DMatrix::<f64>::identity(8, 8)).norm() <= 1e-10);
        assert!(eig.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sym_func_examples() {
        assert!(
            sym_func(&DMatrix::identity(3, 3), MatFn::Log)
                .unwrap()
                .norm()
                < 1e-15
        );
        let r = sym_func(&diag(&[4.0, 9.0]), MatFn::Sqrt).unwrap();
        assert!((r - diag(&[2.0, 3.0])).norm() < 1e-14);
        let r = sym_func(&diag(&[4.0, 9.0]), MatFn::InvSqrt).unwrap();
        assert!((r - diag(&[0.5, 1.0 / 3.0])).norm() < 1e-14);

        let mut rng = seeded(2);
        let m = Spd::new(10).unwrap().random_point(&mut rng);
        let back = sym_func(&sym_func(m.mat(), MatFn::Log).unwrap(), MatFn::Exp).unwrap();
        assert!((back - m.mat()).norm() <= 1e-8 * m.mat().norm());
        let s = sym_func(m.mat(), MatFn::Sqrt).unwrap();
        assert!((&s * &s - m.mat()).norm() <= 1e-8 * m.mat().norm());
    }

    #[test]
    fn sym_func_refuses_non_positive_input() {
        let m = diag(&[1.0, 0.0]);
        assert!(matches!(
            sym_func(&m, MatFn::Log),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            sym_func(&diag(&[1.0, -2.0]), MatFn::Sqrt),
            Err(Error::NotPositiveDefinite { .. })
        ));
        // exp has no positivity requirement
        assert!(sym_func(&diag(&[1.0, -2.0]), MatFn::Exp).is_ok());
        assert!(SpdPoint::new(m).is_err());
    }

    #[test]
    fn sym_func_ill_conditioned_roundtrip() {
        let mut rng = seeded(5);
        let q = haar_orthonormal(&mut rng, 6, 6);
        let lam: Vec<f64> = (0..6).map(|k| 10f64.powf(-8.0 * k as f64 / 5.0)).collect();
        let m = &q * diag(&lam) * q.transpose();
        let back = sym_func(&sym_func(&m, MatFn::Log).unwrap(), MatFn::Exp).unwrap();
        let eig = SymEig::new(&back).unwrap();
        let mut expected = lam.clone();
        expected.sort_by(f64::total_cmp);
        for (got, want) in eig.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
        }
        assert!((back - &m).norm() <= 1e-6 * m.norm());
    }

    #[test]
    fn exp_examples() {
        let spd = Spd::new(3).unwrap();
        let x = SpdPoint::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(spd.exp(&spd.zero(&x)).unwrap(), x);

        let i = SpdPoint::identity(3).unwrap();
        let v = symmetrize(&DMatrix::from_row_slice(
            3,
            3,
            &[0.1, 0.2, 0.0, 0.2, -0.3, 0.1, 0.0, 0.1, 0.4],
        ));
        let out = spd.exp(&TangentVector::new(i, v.clone())).unwrap();
        let expected = v.exp();
        assert!((out.mat() - expected).norm() < 1e-12);

        let (a, b) = (2.0, 0.7);
        let x = SpdPoint::from_diagonal(&[a; 3]).unwrap();
        let out = spd
            .exp(&TangentVector::new(x, DMatrix::identity(3, 3) * b))
            .unwrap();
        assert!((out.mat() - DMatrix::<f64>::identity(3, 3) * (a * (b / a).exp())).norm() < 1e-12);
    }

    #[test]
    fn log_and_dist_examples() {
        let spd = Spd::new(4).unwrap();
        let mut rng = seeded(4);
        let x = spd.random_point(&mut rng);
        assert!(spd.norm(&spd.log(&x, &x).unwrap()) < 1e-12);
        assert!(spd.dist(&x, &x).unwrap() < 1e-12);

        let i = SpdPoint::identity(4).unwrap();
        let y = spd.random_point(&mut rng);
        let l = spd.log(&i, &y).unwrap();
        assert!((l.components - sym_func(y.mat(), MatFn::Log).unwrap()).norm() < 1e-12);

        let (a, b) = (0.5, 3.0);
        let d = spd
            .dist(
                &SpdPoint::from_diagonal(&[a; 4]).unwrap(),
                &SpdPoint::from_diagonal(&[b; 4]).unwrap(),
            )
            .unwrap();
        assert_relative_eq!(d, 2.0 * (b / a).ln().abs(), epsilon = 1e-12);
    }

    #[test]
    fn transport_examples() {
        let spd = Spd::new(3).unwrap();
        let mut rng = seeded(6);
        let x = spd.random_point(&mut rng);
        let v = spd.random_unit_tangent(&x, &mut rng);
        assert_eq!(spd.transport(&v, &x).unwrap(), v);

        let i = SpdPoint::identity(3).unwrap();
        let c = 2.5;
        let y = SpdPoint::from_diagonal(&[c; 3]).unwrap();
        let v = spd.random_unit_tangent(&i, &mut rng);
        let tv = spd.transport(&v, &y).unwrap();
        assert!((&tv.components - &v.components * c).norm() < 1e-12);
        assert_relative_eq!(spd.norm(&tv), spd.norm(&v), epsilon = 1e-12);
    }

    #[test]
    fn transport_pair_matches_single() {
        let spd = Spd::new(4).unwrap();
        let mut rng = seeded(7);
        let x = spd.random_point(&mut rng);
        let y = spd.random_point(&mut rng);
        let u = spd.random_unit_tangent(&x, &mut rng);
        let v = spd.random_unit_tangent(&x, &mut rng);
        let (tu, tv) = spd.transport_pair(&u, &v, &y).unwrap();
        assert!((tu.components - spd.transport(&u, &y).unwrap().components).norm() < 1e-13);
        assert!((tv.components - spd.transport(&v, &y).unwrap().components).norm() < 1e-13);
    }

    #[test]
    fn affine_invariance_and_equivariance() {
        let spd = Spd::new(5).unwrap();
        let mut rng = seeded(8);
        for _ in 0..20 {
            let x = spd.random_point(&mut rng);
            let y = spd.random_point(&mut rng);
            let p = gaussian_matrix(&mut rng, 5, 5) + DMatrix::<f64>::identity(5, 5) * 3.0;
            let px = x.congruence(&p).unwrap();
            let py = y.congruence(&p).unwrap();
            let d0 = spd.dist(&x, &y).unwrap();
            assert!((spd.dist(&px, &py).unwrap() - d0).abs() <= 1e-8);
            assert!((spd.dist(&y, &x).unwrap() - d0).abs() <= 1e-9);

            let v = spd.random_unit_tangent(&x, &mut rng);
            let lhs = spd
                .exp(&TangentVector::new(
                    px.clone(),
                    &p * &v.components * p.transpose(),
                ))
                .unwrap();
            let rhs = spd.exp(&v).unwrap().congruence(&p).unwrap();
            assert!((lhs.mat() - rhs.mat()).norm() <= 1e-8 * rhs.mat().norm());
        }
    }

    #[test]
    fn spec_zeta_values() {
        let z1 = spd_spec(1.0).unwrap().zeta();
        let s = 0.5f64.sqrt();
        assert_relative_eq!(z1, s / s.tanh(), epsilon = 1e-14);
        assert_relative_eq!(z1, 1.161363069730, epsilon = 1e-11);
        let z2 = spd_spec(2.0).unwrap().zeta();
        assert_relative_eq!(z2, 2f64.sqrt() / 2f64.sqrt().tanh(), epsilon = 1e-14);
        assert_relative_eq!(z2, 1.591891655520, epsilon = 1e-11);
        assert!((spd_spec(1e-9).unwrap().zeta() - 1.0).abs() < 1e-15);
        assert!(spd_spec(0.0).is_err());
        assert!(spd_spec(-1.0).is_err());
    }

    #[test]
    fn arithmetic_mean_is_spd() {
        let spd = Spd::new(4).unwrap();
        let mut rng = seeded(10);
        let pts: Vec<_> = (0..5).map(|_| spd.random_point(&mut rng)).collect();
        let m = SpdPoint::arithmetic_mean(&pts).unwrap();
        assert!(m.eigenvalues()[0] > 0.0);
        assert!(SpdPoint::arithmetic_mean(&[]).is_err());
    }
}
