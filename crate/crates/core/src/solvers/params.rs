use crate::error::{Error, Result};

/// Default `μ₀` for the nonconvex step-size rules.
pub const DEFAULT_MU0: f64 = 0.1;
/// Default `ν` for the gradient-dominated epoch count.
pub const DEFAULT_NU: f64 = 0.5;

/// Problem constants that the theorem settings are expressed in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremParams {
    /// Strong g-convexity `μ`.
    pub mu: f64,
    /// g-smoothness `L`.
    pub l: f64,
    /// Curvature constant `ζ ≥ 1`.
    pub zeta: f64,
    /// Gradient-domination constant `τ`.
    pub tau: Option<f64>,
}

impl TheoremParams {
    pub fn new(mu: f64, l: f64, zeta: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("L", l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(zeta >= 1.0 && zeta.is_finite()) {
            return Err(Error::invalid(format!("zeta must be >= 1, got {zeta}")));
        }
        if mu > l {
            return Err(Error::invalid(format!("mu = {mu} exceeds L = {l}")));
        }
        Ok(TheoremParams {
            mu,
            l,
            zeta,
            tau: None,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        self.tau = Some(tau);
        Ok(self)
    }

    /// A `μ`-strongly g-convex function is `1/(2μ)`-gradient dominated.
    pub fn with_strong_convexity_tau(self) -> Self {
        TheoremParams {
            tau: Some(1.0 / (2.0 * self.mu)),
            ..self
        }
    }
}

/// Contraction factor `q = 1 + 4ζη²L² − 2ημ` of the inner loop.
pub fn theorem1_q(p: &TheoremParams, eta: f64) -> f64 {
    1.0 + 4.0 * p.zeta * eta * eta * p.l * p.l - 2.0 * eta * p.mu
}

/// Per-epoch contraction of `E d²(x, x*)` for strongly g-convex problems:
///
/// `α = 3ζηL²/(μ − 2ζηL²) + q^m·(μ − 5ζηL²)/(μ − 2ζηL²)`
///
/// with `q` from [`theorem1_q`]. The `L²` inside `q` comes from the
/// contraction argument; dropping it would understate `q` whenever `L > 1`.
pub fn theorem1_alpha(p: &TheoremParams, eta: f64, m: usize) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be positive, got {eta}")));
    }
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let zl2 = p.zeta * eta * p.l * p.l;
    let denom = p.mu - 2.0 * zl2;
    if denom <= 0.0 {
        return Err(Error::ParameterInfeasible(format!(
            "mu - 2*zeta*eta*L^2 = {denom:e} is not positive"
        )));
    }
    let q = theorem1_q(p, eta);
    Ok(3.0 * zl2 / denom + q.powf(m as f64) * (p.mu - 5.0 * zl2) / denom)
}

/// `η = μ/(17ζL²)` and `m = ⌈10ζL²/μ²⌉`, for which `α ≤ 1/2`.
pub fn corollary1_params(p: &TheoremParams) -> (f64, usize) {
    let eta = p.mu / (17.0 * p.zeta * p.l * p.l);
    let m = (10.0 * p.zeta * p.l * p.l / (p.mu * p.mu)).ceil() as usize;
    (eta, m.max(1))
}

/// Nonconvex setting: `η = μ₀/(L·n^{α₁}·ζ^{α₂})` and
/// `m = ⌊n^{3α₁/2}/(3μ₀·ζ^{1−2α₂})⌋`, clamped to at least 1.
pub fn theorem2_params(
    p: &TheoremParams,
    n: usize,
    alpha1: f64,
    alpha2: f64,
    mu0: f64,
) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(alpha1 > 0.0 && alpha1 <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha1 must lie in (0, 1], got {alpha1}"
        )));
    }
    if !(0.0..=2.0).contains(&alpha2) {
        return Err(Error::invalid(format!(
            "alpha2 must lie in [0, 2], got {alpha2}"
        )));
    }
    if !(mu0 > 0.0 && mu0 < 1.0) {
        return Err(Error::invalid(format!("mu0 must lie in (0, 1), got {mu0}")));
    }
    let nf = n as f64;
    let eta = mu0 / (p.l * nf.powf(alpha1) * p.zeta.powf(alpha2));
    let raw = nf.powf(1.5 * alpha1) / (3.0 * mu0 * p.zeta.powf(1.0 - 2.0 * alpha2));
    // guard against 3333.0000000000005-style rounding below an integer
    let m = (raw * (1.0 + 1e-12)).floor() as usize;
    Ok((eta, m.max(1)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem4Params {
    pub eta: f64,
    pub m: usize,
    /// Epochs per restart.
    pub s: usize,
}

/// Gradient-dominated setting:
/// `η = μ₀/(L·n^{2/3}·ζ^{1/2})`, `m = ⌊n/(3μ₀)⌋`,
/// `S = ⌈(6 + 18μ₀/(n − 3))·L·τ·ζ^{1/2}·μ₀/(ν·n^{1/3})⌉`.
pub fn theorem4_params(p: &TheoremParams, n: usize, mu0: f64, nu: f64) -> Result<Theorem4Params> {
    if n <= 3 {
        return Err(Error::invalid(format!("n must exceed 3, got {n}")));
    }
    let tau = p
        .tau
        .ok_or_else(|| Error::invalid("gradient-domination constant tau is not set"))?;
    if !(mu0 > 0.0 && mu0 < 1.0) || !(nu > 0.0 && nu < 1.0) {
        return Err(Error::invalid(format!(
            "need mu0, nu in (0, 1), got {mu0}, {nu}"
        )));
    }
    let nf = n as f64;
    let sz = p.zeta.sqrt();
    let eta = mu0 / (p.l * nf.powf(2.0 / 3.0) * sz);
    let m = ((nf / (3.0 * mu0)) * (1.0 + 1e-12)).floor() as usize;
    let s = ((6.0 + 18.0 * mu0 / (nf - 3.0)) * p.l * tau * sz * mu0 / (nu * nf.cbrt())).ceil();
    Ok(Theorem4Params {
        eta,
        m: m.max(1),
        s: (s as usize).max(1),
    })
}
