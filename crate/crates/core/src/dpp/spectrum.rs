use std::f64::consts::PI;

use num_complex::Complex64;

use super::{validate_dpp_params, DppFamily, GinibreParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, Window};
use crate::special::regularized_gamma_cdf;

/// Default truncation threshold, relative to the leading eigenvalue.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-12;

/// Truncated spectral representation `c(u,v) ≈ Σ ξᵢ φᵢ(u) φᵢ(v)*` of a DPP
/// kernel restricted to a compact domain.
#[derive(Debug, Clone)]
pub struct DppSpectrum {
    domain: Window,
    eigenvalues: Vec<f64>,
    basis: SpectrumBasis,
    truncation_error: f64,
}

/// Eigenfunction family of a [`DppSpectrum`].
#[derive(Debug, Clone)]
pub enum SpectrumBasis {
    /// Restricted scaled Ginibre kernel on a disc: `φᵢ(u) ∝ u^{i−1} exp(−λπ|u|²/(2ν))`
    /// with `u` measured from the disc centre. `ln_coef[i−1]` is the log of the
    /// full normalizing constant including the disc factor `1/√P(i, λπr²/ν)`.
    Ginibre {
        params: GinibreParams,
        center: Point,
        ln_coef: Vec<f64>,
    },
    /// Periodic Fourier basis on a rectangle: `exp(2πi(k₁x/L₁ + k₂y/L₂))/√(L₁L₂)`.
    Fourier {
        origin: Point,
        lx: f64,
        ly: f64,
        freqs: Vec<(i32, i32)>,
    },
}

impl DppSpectrum {
    pub fn domain(&self) -> &Window {
        &self.domain
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &SpectrumBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Expected count on the domain minus the sum of the retained eigenvalues.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// `Σ ξᵢ`, the expected number of points of the truncated process.
    pub fn expected_count(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `Σ ξᵢ(1 − ξᵢ)`, the variance of the count of the truncated process.
    pub fn count_variance(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x * (1.0 - x)).sum()
    }

    /// Evaluates eigenfunction `index` (0-based) at `p`.
    pub fn eigenfunction(&self, index: usize, p: Point) -> Complex64 {
        let mut out = [Complex64::new(0.0, 0.0)];
        self.eval_into(&[index], p, &mut out);
        out[0]
    }

    /// Evaluates the eigenfunctions listed in `indices` at `p` into `out`.
    pub(crate) fn eval_into(&self, indices: &[usize], p: Point, out: &mut [Complex64]) {
        debug_assert_eq!(indices.len(), out.len());
        match &self.basis {
            SpectrumBasis::Ginibre {
                params,
                center,
                ln_coef,
            } => {
                let u = p.sub(center);
                let r2 = u.x * u.x + u.y * u.y;
                let gauss = -params.lambda * PI * r2 / (2.0 * params.nu);
                if r2 == 0.0 {
                    for (o, &i) in out.iter_mut().zip(indices) {
                        *o = if i == 0 {
                            Complex64::new((ln_coef[0]).exp(), 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                    }
                    return;
                }
                let ln_r = 0.5 * r2.ln();
                let theta = u.y.atan2(u.x);
                for (o, &i) in out.iter_mut().zip(indices) {
                    let k = i as f64;
                    let modulus = (ln_coef[i] + k * ln_r + gauss).exp();
                    let (s, c) = (k * theta).sin_cos();
                    *o = Complex64::new(modulus * c, modulus * s);
                }
            }
            SpectrumBasis::Fourier { origin, lx, ly, freqs } => {
                let norm = 1.0 / (lx * ly).sqrt();
                let ax = 2.0 * PI * (p.x - origin.x) / lx;
                let ay = 2.0 * PI * (p.y - origin.y) / ly;
                for (o, &i) in out.iter_mut().zip(indices) {
                    let (k1, k2) = freqs[i];
                    let (s, c) = (k1 as f64 * ax + k2 as f64 * ay).sin_cos();
                    *o = Complex64::new(norm * c, norm * s);
                }
            }
        }
    }
}

/// Spectrum of the scaled Ginibre kernel restricted to the disc of radius
/// `radius` centred at `center`.
///
/// Eigenvalues are `ξᵢ = ν P(i, λπr²/ν)`, `i = 1, 2, …`, truncated at the
/// first `i` with `ξᵢ < tol`.
pub fn ginibre_spectrum(params: GinibreParams, center: Point, radius: f64, tol: f64) -> Result<DppSpectrum> {
    if !(tol > 0.0) {
        return Err(invalid(format!("truncation tolerance must be positive, got {tol}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("disc radius must be positive, got {radius}")));
    }
    let GinibreParams { nu, lambda } = params;
    let t = lambda * PI * radius * radius / nu;
    let ln_lambda_pi = (lambda * PI).ln();
    let ln_nu = nu.ln();

    let mut eigenvalues = Vec::new();
    let mut ln_coef = Vec::new();
    let mut ln_fact = 0.0; // ln (i−1)!
    // P(i, t) vanishes super-exponentially once i exceeds t by a few √t.
    let i_max = (t + 60.0 * t.sqrt() + 200.0) as usize;
    for i in 1..=i_max {
        if i > 1 {
            ln_fact += ((i - 1) as f64).ln();
        }
        let p = regularized_gamma_cdf(i as f64, t);
        let xi = nu * p;
        if xi < tol {
            break;
        }
        let k = (i - 1) as f64;
        let c = 0.5 * lambda.ln() + 0.5 * k * ln_lambda_pi - 0.5 * ln_fact - 0.5 * i as f64 * ln_nu - 0.5 * p.ln();
        eigenvalues.push(xi);
        ln_coef.push(c);
    }
    let retained: f64 = eigenvalues.iter().sum();
    Ok(DppSpectrum {
        domain: Window::disc(center, radius)?,
        eigenvalues,
        basis: SpectrumBasis::Ginibre {
            params,
            center,
            ln_coef,
        },
        truncation_error: lambda * PI * radius * radius - retained,
    })
}

/// Fourier approximation of the Gaussian DPP kernel on a rectangle.
///
/// With side lengths `L₁, L₂`, frequency `k` gets eigenvalue
/// `ρ πβ² exp(−π²β²|(k₁/L₁, k₂/L₂)|²)` (clipped to 1); frequencies with
/// eigenvalue below `tol` are dropped.
pub fn gaussian_dpp_spectrum(family: &DppFamily, rect: &Window, tol: f64) -> Result<DppSpectrum> {
    let (rho, beta) = match *family {
        DppFamily::Gaussian { rho, beta } => (rho, beta),
        DppFamily::Ginibre { .. } => {
            return Err(Error::Unsupported(
                "the Fourier spectrum is only defined for the Gaussian DPP".into(),
            ))
        }
    };
    validate_dpp_params(family)?;
    if !(tol > 0.0) {
        return Err(invalid(format!("truncation tolerance must be positive, got {tol}")));
    }
    let (xmin, ymin) = match *rect {
        Window::Rect { xmin, ymin, .. } => (xmin, ymin),
        Window::Disc { .. } => {
            return Err(Error::UnsupportedWindow(
                "the Gaussian DPP spectrum needs a rectangular domain",
            ))
        }
    };
    let (lx, ly) = rect.side_lengths();
    let top = (rho * PI * beta * beta).min(1.0);
    let mut entries: Vec<(f64, (i32, i32))> = Vec::new();
    if top >= tol {
        let decay = PI * PI * beta * beta;
        // ξ ≥ tol  ⇔  |k/L|² ≤ ln(top/tol)/(π²β²)
        let budget = (top / tol).ln() / decay;
        let k1_max = (lx * budget.sqrt()).floor() as i32;
        for k1 in -k1_max..=k1_max {
            let f1 = (k1 as f64 / lx).powi(2);
            let rest = budget - f1;
            if rest < 0.0 {
                continue;
            }
            let k2_max = (ly * rest.sqrt()).floor() as i32;
            for k2 in -k2_max..=k2_max {
                let f = f1 + (k2 as f64 / ly).powi(2);
                let xi = (rho * PI * beta * beta * (-decay * f).exp()).min(1.0);
                if xi >= tol {
                    entries.push((xi, (k1, k2)));
                }
            }
        }
    }
    // largest eigenvalues first; ties broken by frequency for a fixed order
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let retained: f64 = entries.iter().map(|e| e.0).sum();
    Ok(DppSpectrum {
        domain: *rect,
        eigenvalues: entries.iter().map(|e| e.0).collect(),
        basis: SpectrumBasis::Fourier {
            origin: Point::new(xmin, ymin),
            lx,
            ly,
            freqs: entries.iter().map(|e| e.1).collect(),
        },
        truncation_error: rho * lx * ly - retained,
    })
}
