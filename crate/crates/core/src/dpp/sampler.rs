//! Spectral simulation of a DPP from its truncated eigen-expansion.
//!
//! Eigen-index `i` is kept with probability `ξᵢ`; the kept eigenfunctions
//! span a projection DPP whose points are then drawn one at a time. With
//! `v(x) = (φᵢ(x))ᵢ` over the kept indices and `e₁,…,e_k` an orthonormal
//! basis of `span{v(x₁),…,v(x_k)}`, the next point has density
//! `(|v(x)|² − Σⱼ |⟨eⱼ, v(x)⟩|²)/(n − k)`, sampled by rejection from the
//! uniform law on the domain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::spectrum::{DppSpectrum, SpectrumBasis};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, PointPattern, Window};
use crate::rng::RngStream;

/// Safety factor applied to the grid maximum of `|v(x)|²`.
const BOUND_SAFETY: f64 = 1.1;
/// Radial resolution used to bound `|v|²` for the rotation-invariant Ginibre basis.
const RADIAL_GRID: usize = 4096;
/// Per-axis resolution of the 2-D bounding grid for other bases.
const PLANAR_GRID: usize = 96;
const MAX_PROPOSALS_PER_POINT: usize = 1_000_000;

/// Draws one realization of the DPP described by `spec` on `spec.domain()`.
pub fn sample_dpp(spec: &DppSpectrum, rng: &mut RngStream) -> Result<PointPattern> {
    let selected: Vec<usize> = spec
        .eigenvalues()
        .iter()
        .enumerate()
        .filter_map(|(i, &xi)| (rng.random::<f64>() < xi).then_some(i))
        .collect();
    let domain = *spec.domain();
    let n = selected.len();
    if n == 0 {
        return Ok(PointPattern::empty(domain));
    }

    let bound = BOUND_SAFETY * sup_squared_norm(spec, &selected);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut points = Vec::with_capacity(n);

    for _ in 0..n {
        let mut accepted = None;
        for _ in 0..MAX_PROPOSALS_PER_POINT {
            let x = uniform_in(&domain, rng);
            spec.eval_into(&selected, x, &mut v);
            let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let projected: f64 = basis.iter().map(|e| inner(e, &v).norm_sqr()).sum();
            let residual = (total - projected).max(0.0);
            if residual > bound {
                return Err(Error::RejectionBoundExceeded {
                    density: residual,
                    bound,
                });
            }
            if rng.random::<f64>() * bound < residual {
                accepted = Some(x);
                break;
            }
        }
        let x = accepted.ok_or_else(|| invalid("DPP rejection sampler made no progress"))?;
        spec.eval_into(&selected, x, &mut v);
        // Gram–Schmidt, applied twice for numerical orthogonality
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = inner(e, &w);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
        }
        points.push(x);
    }
    Ok(PointPattern::restricted(points, domain))
}

/// `⟨e, v⟩ = Σ ēᵢ vᵢ`
fn inner(e: &[Complex64], v: &[Complex64]) -> Complex64 {
    e.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn uniform_in(w: &Window, rng: &mut RngStream) -> Point {
    match *w {
        Window::Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        } => Point::new(
            xmin + (xmax - xmin) * rng.random::<f64>(),
            ymin + (ymax - ymin) * rng.random::<f64>(),
        ),
        Window::Disc { center, radius } => {
            let r = radius * rng.random::<f64>().sqrt();
            let t = 2.0 * PI * rng.random::<f64>();
            let p = Point::new(center.x + r * t.cos(), center.y + r * t.sin());
            // rounding can push a point a hair outside the closed disc
            if w.contains(&p) {
                p
            } else {
                center
            }
        }
    }
}

/// Grid maximum of `|v(x)|²` over the domain.
fn sup_squared_norm(spec: &DppSpectrum, selected: &[usize]) -> f64 {
    let mut v = vec![Complex64::new(0.0, 0.0); selected.len()];
    let mut eval = |p: Point| {
        spec.eval_into(selected, p, &mut v);
        v.iter().map(|z| z.norm_sqr()).sum::<f64>()
    };
    match (spec.basis(), spec.domain()) {
        (SpectrumBasis::Ginibre { center, .. }, Window::Disc { radius, .. }) => (0..=RADIAL_GRID)
            .map(|k| eval(Point::new(center.x + radius * k as f64 / RADIAL_GRID as f64, center.y)))
            .fold(0.0, f64::max),
        (_, domain) => {
            let (x0, x1, y0, y1) = domain.bounding_box();
            let mut best = 0.0f64;
            for a in 0..=PLANAR_GRID {
                for b in 0..=PLANAR_GRID {
                    let p = Point::new(
                        x0 + (x1 - x0) * a as f64 / PLANAR_GRID as f64,
                        y0 + (y1 - y0) * b as f64 / PLANAR_GRID as f64,
                    );
                    if domain.contains(&p) {
                        best = best.max(eval(p));
                    }
                }
            }
            best
        }
    }
}
