//! Determinantal point processes of cluster centres.
//!
//! Two stationary planar families are supported, both parametrized by an
//! intensity `ρ_Y` and a scale `β`:
//!
//! * Gaussian DPP with correlation `exp(−|u−v|²/β²)`,
//! * scaled Ginibre process with complex correlation
//!   `exp((u·v̄ − |u|²/2 − |v|²/2)/β²)`.
//!
//! Both exist iff `0 < β ≤ 1/√(π ρ_Y)`. Simulation goes through a spectral
//! representation ([`DppSpectrum`]) on a compact domain.

mod sampler;
mod spectrum;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;

pub use sampler::sample_dpp;
pub use spectrum::{
    gaussian_dpp_spectrum, ginibre_spectrum, DppSpectrum, SpectrumBasis, DEFAULT_RELATIVE_TOL,
};

/// Relative slack allowed at the existence boundary `β = 1/√(πρ_Y)` so that
/// parameters built as `ρ_Y = 1/(πβ²)` pass despite rounding.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DppFamily {
    Gaussian { rho: f64, beta: f64 },
    Ginibre { rho: f64, beta: f64 },
}

impl DppFamily {
    pub fn intensity(&self) -> f64 {
        match *self {
            DppFamily::Gaussian { rho, .. } | DppFamily::Ginibre { rho, .. } => rho,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            DppFamily::Gaussian { beta, .. } | DppFamily::Ginibre { beta, .. } => beta,
        }
    }
}

/// Largest admissible `β` for intensity `rho` in the plane.
pub fn max_beta(rho: f64) -> f64 {
    1.0 / (rho.sqrt() * PI.sqrt())
}

/// Intensity of the most repulsive DPP with scale `beta`: `1/(πβ²)`.
pub fn most_repulsive_intensity(beta: f64) -> f64 {
    1.0 / (PI * beta * beta)
}

/// Checks `ρ_Y > 0` and `0 < β ≤ 1/√(πρ_Y)`; equality is accepted.
pub fn validate_dpp_params(family: &DppFamily) -> Result<()> {
    let rho = family.intensity();
    let beta = family.beta();
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid(format!("DPP intensity must be positive and finite, got {rho}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!("DPP scale beta must be positive and finite, got {beta}")));
    }
    if beta * beta * rho * PI > 1.0 + BOUNDARY_SLACK {
        return Err(Error::ExistenceViolation {
            beta,
            max_beta: max_beta(rho),
        });
    }
    Ok(())
}

/// `R_β(y) = |r_β(y, 0)|²`: `exp(−2|y/β|²)` (Gaussian) or `exp(−|y/β|²)` (Ginibre).
pub fn kernel_correlation_modulus_sq(family: &DppFamily, y: Point) -> f64 {
    let beta = family.beta();
    let s = (y.x * y.x + y.y * y.y) / (beta * beta);
    match family {
        DppFamily::Gaussian { .. } => (-2.0 * s).exp(),
        DppFamily::Ginibre { .. } => (-s).exp(),
    }
}

/// The kernel `c(u, v)` of the DPP.
pub fn kernel(family: &DppFamily, u: Point, v: Point) -> Complex64 {
    match *family {
        DppFamily::Gaussian { rho, beta } => Complex64::new(rho * (-u.dist2(&v) / (beta * beta)).exp(), 0.0),
        DppFamily::Ginibre { rho, beta } => {
            let uc = Complex64::new(u.x, u.y);
            let vc = Complex64::new(v.x, v.y);
            let expo = (uc * vc.conj() - 0.5 * uc.norm_sqr() - 0.5 * vc.norm_sqr()) / (beta * beta);
            rho * expo.exp()
        }
    }
}

/// Maximal number of points accepted by [`nth_order_intensity`].
pub const MAX_INTENSITY_ORDER: usize = 12;

/// `ρ⁽ⁿ⁾(u₁,…,uₙ) = det[c(uᵢ,uⱼ)]` for `1 ≤ n ≤ 12`.
///
/// The determinant of a Hermitian matrix is real; an imaginary part above
/// `1e-9` relative to the magnitude of the matrix entries is reported as an error.
pub fn nth_order_intensity(family: &DppFamily, points: &[Point]) -> Result<f64> {
    let n = points.len();
    if n == 0 || n > MAX_INTENSITY_ORDER {
        return Err(invalid(format!(
            "intensity order must be in 1..={MAX_INTENSITY_ORDER}, got {n}"
        )));
    }
    validate_dpp_params(family)?;
    let mut m: Vec<Complex64> = Vec::with_capacity(n * n);
    for u in points {
        for v in points {
            m.push(kernel(family, *u, *v));
        }
    }
    let det = complex_determinant(&mut m, n);
    let scale = family.intensity().powi(n as i32);
    if det.im.abs() > 1e-9 * scale.max(det.re.abs()) {
        return Err(invalid(format!(
            "kernel determinant has non-negligible imaginary part {} (real {})",
            det.im, det.re
        )));
    }
    Ok(det.re.max(0.0))
}

/// Determinant by LU with partial pivoting; `m` is row-major and overwritten.
pub(crate) fn complex_determinant(m: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].norm().total_cmp(&m[b * n + col].norm()))
            .unwrap();
        if m[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = m[row * n + col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[row * n + k] -= f * v;
            }
        }
    }
    det
}

/// Variation-independent parametrization `(ν, λ) ∈ (0,1] × (0,∞)` of the scaled
/// Ginibre process, with `λ = ρ_Y` and `ν = λπβ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GinibreParams {
    pub nu: f64,
    pub lambda: f64,
}

impl GinibreParams {
    pub fn new(nu: f64, lambda: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0 + BOUNDARY_SLACK) {
            return Err(invalid(format!("Ginibre thinning level nu must lie in (0,1], got {nu}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("Ginibre intensity lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            nu: nu.min(1.0),
            lambda,
        })
    }

    pub fn from_rho_beta(rho: f64, beta: f64) -> Result<Self> {
        validate_dpp_params(&DppFamily::Ginibre { rho, beta })?;
        Self::new(rho * PI * beta * beta, rho)
    }

    /// `β = √(ν/(λπ))`.
    pub fn beta(&self) -> f64 {
        (self.nu / (self.lambda * PI)).sqrt()
    }

    pub fn family(&self) -> DppFamily {
        DppFamily::Ginibre {
            rho: self.lambda,
            beta: self.beta(),
        }
    }
}
