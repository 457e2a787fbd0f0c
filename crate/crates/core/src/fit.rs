//! Minimum contrast estimation of the cluster and DPP scales from K̂, and the
//! moment estimate of the mean cluster size.
//!
//! For the DPP families the centre intensity is tied to the DPP scale,
//! `ρ_Y = 1/(πβ²)`, and the search runs over `(α, β)`. The Thomas family is
//! searched over `(α, ρ_Y)`.

use serde::{Deserialize, Serialize};

use crate::cluster::{ModelFamily, ModelParams};
use crate::dpp::most_repulsive_intensity;
use crate::error::{invalid, Error, Result};
use crate::geometry::{PointPattern, Window};
use crate::summaries::{k_hat, k_theoretical, linspace, SummaryCurve, DEFAULT_GRID_SIZE};

/// Contrast `∫_{r_min}^{r_max} |K̂(r)^q − K_θ(r)^q|^p dr` settings and the
/// search box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub q: f64,
    pub p: f64,
    pub grid_size: usize,
    pub alpha_bounds: (f64, f64),
    /// DPP families only.
    pub beta_bounds: (f64, f64),
    /// Thomas family only.
    pub rho_y_bounds: (f64, f64),
}

impl ContrastOptions {
    pub const DEFAULT_Q: f64 = 0.25;
    pub const DEFAULT_P: f64 = 2.0;
    pub const MIN_GRID_SIZE: usize = 64;

    /// Defaults for a pattern of `n` points on `w`: `r ∈ [0, shorter side/4]`,
    /// 513 grid points, `q = 1/4`, `p = 2`.
    pub fn default_for(w: &Window, n: usize) -> Self {
        Self::with_range(w, n, 0.0, 0.25 * w.shorter_side())
    }

    /// Defaults with an explicit distance range; the search box follows `r_max`.
    pub fn with_range(w: &Window, n: usize, r_min: f64, r_max: f64) -> Self {
        let area = w.area();
        Self {
            r_min,
            r_max,
            q: Self::DEFAULT_Q,
            p: Self::DEFAULT_P,
            grid_size: DEFAULT_GRID_SIZE,
            alpha_bounds: (r_max / 1000.0, r_max),
            beta_bounds: (r_max / 1000.0, 4.0 * r_max),
            rho_y_bounds: (1.0 / area, 10.0 * n.max(1) as f64 / area),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(invalid(format!(
                "contrast range must satisfy 0 <= r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(invalid(format!("contrast exponent q must be positive, got {}", self.q)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("discrepancy exponent p must be at least 1, got {}", self.p)));
        }
        if self.grid_size < Self::MIN_GRID_SIZE {
            return Err(invalid(format!(
                "contrast grid needs at least {} points, got {}",
                Self::MIN_GRID_SIZE,
                self.grid_size
            )));
        }
        for (name, (lo, hi)) in [
            ("alpha", self.alpha_bounds),
            ("beta", self.beta_bounds),
            ("rhoY", self.rho_y_bounds),
        ] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(invalid(format!("{name} search bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.r_min, self.r_max, self.grid_size)
    }

    fn second_bounds(&self, family: ModelFamily) -> (f64, f64) {
        if family.is_dpp() {
            self.beta_bounds
        } else {
            self.rho_y_bounds
        }
    }
}

/// Second coordinate of θ: `β` for DPP families, `ρ_Y` for Thomas.
fn model_for(family: ModelFamily, alpha: f64, second: f64) -> ModelParams {
    let (rho_y, beta) = if family.is_dpp() {
        (most_repulsive_intensity(second), Some(second))
    } else {
        (second, None)
    };
    ModelParams {
        family,
        gamma: 1.0,
        alpha,
        rho_y,
        beta,
    }
}

/// K̂ sampled on the contrast grid and raised to `q`, ready for repeated evaluation.
struct Contrast {
    family: ModelFamily,
    grid: Vec<f64>,
    target: Vec<f64>,
    q: f64,
    p: f64,
}

impl Contrast {
    fn new(k: &SummaryCurve, family: ModelFamily, opts: &ContrastOptions) -> Result<Self> {
        opts.validate()?;
        let grid = opts.grid();
        let target = grid
            .iter()
            .map(|&r| {
                k.interpolate(r).map(|v| v.max(0.0).powf(opts.q)).ok_or_else(|| {
                    invalid(format!(
                        "K estimate covers [{}, {}] but the contrast needs [{}, {}]",
                        k.r.first().copied().unwrap_or(f64::NAN),
                        k.r.last().copied().unwrap_or(f64::NAN),
                        opts.r_min,
                        opts.r_max
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family,
            grid,
            target,
            q: opts.q,
            p: opts.p,
        })
    }

    fn eval(&self, alpha: f64, second: f64) -> f64 {
        let m = model_for(self.family, alpha, second);
        let mut total = 0.0;
        let mut prev: Option<f64> = None;
        for (k, (&r, &t)) in self.grid.iter().zip(&self.target).enumerate() {
            let f = (t - k_theoretical(&m, r).max(0.0).powf(self.q)).abs().powf(self.p);
            if let Some(fp) = prev {
                total += 0.5 * (fp + f) * (r - self.grid[k - 1]);
            }
            prev = Some(f);
        }
        total
    }
}

/// Trapezoid-rule contrast between `k` and the model K at `θ = (α, β)` (DPP
/// families) or `θ = (α, ρ_Y)` (Thomas).
pub fn contrast_objective(
    k: &SummaryCurve,
    family: ModelFamily,
    theta: (f64, f64),
    opts: &ContrastOptions,
) -> Result<f64> {
    let (alpha, second) = theta;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(second > 0.0) || !second.is_finite() {
        let name = if family.is_dpp() { "beta" } else { "rhoY" };
        return Err(invalid(format!("{name} must be positive, got {second}")));
    }
    Ok(Contrast::new(k, family, opts)?.eval(alpha, second))
}

/// Outcome of a minimum contrast fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: ModelFamily,
    pub alpha: f64,
    /// `None` for Thomas.
    pub beta: Option<f64>,
    #[serde(rename = "rhoY")]
    pub rho_y: f64,
    pub gamma: f64,
    pub objective: f64,
    pub converged: bool,
    pub options: ContrastOptions,
}

impl FitResult {
    /// The fitted model.
    pub fn model(&self) -> Result<ModelParams> {
        match self.beta {
            Some(beta) => ModelParams::dpp(self.family, self.gamma, self.alpha, self.rho_y, beta),
            None => ModelParams::thomas(self.gamma, self.alpha, self.rho_y),
        }
    }
}

/// `γ̂ = n/(|W| ρ̂_Y)`.
pub fn estimate_gamma(pattern: &PointPattern, rho_y: f64) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    if !(rho_y > 0.0) || !rho_y.is_finite() {
        return Err(invalid(format!("centre intensity must be positive, got {rho_y}")));
    }
    Ok(pattern.intensity() / rho_y)
}

/// Fits `family` to `pattern` by minimum contrast on K̂.
pub fn min_contrast_fit(pattern: &PointPattern, family: ModelFamily, opts: &ContrastOptions) -> Result<FitResult> {
    opts.validate()?;
    if pattern.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: pattern.len(),
        });
    }
    let k = k_hat(pattern, &opts.grid())?;
    fit_k_curve(&k, family, opts, pattern.intensity())
}

/// Fits `family` to a tabulated K estimate. `intensity` is `n/|W|` and only
/// enters `γ̂`.
pub fn fit_k_curve(k: &SummaryCurve, family: ModelFamily, opts: &ContrastOptions, intensity: f64) -> Result<FitResult> {
    let contrast = Contrast::new(k, family, opts)?;
    let lo = [opts.alpha_bounds.0.ln(), opts.second_bounds(family).0.ln()];
    let hi = [opts.alpha_bounds.1.ln(), opts.second_bounds(family).1.ln()];
    let objective = |x: [f64; 2]| {
        if (0..2).any(|i| !(x[i] >= lo[i] && x[i] <= hi[i])) {
            return f64::INFINITY;
        }
        contrast.eval(x[0].exp(), x[1].exp())
    };

    let mut best: Option<Minimum> = None;
    for fa in START_FRACTIONS {
        for fb in START_FRACTIONS {
            let start = [lo[0] + fa * (hi[0] - lo[0]), lo[1] + fb * (hi[1] - lo[1])];
            let step = [0.1 * (hi[0] - lo[0]), 0.1 * (hi[1] - lo[1])];
            let mut m = nelder_mead(&objective, start, step);
            // one restart from the optimum guards against a collapsed simplex
            let again = nelder_mead(&objective, m.x, [0.25 * step[0], 0.25 * step[1]]);
            if again.f <= m.f {
                m = again;
            } else {
                m.converged = m.converged && again.converged;
            }
            best = Some(match best {
                None => m,
                Some(b) => {
                    if m.f < b.f || (m.f == b.f && m.x[0] < b.x[0]) {
                        m
                    } else {
                        b
                    }
                }
            });
        }
    }
    let best = best.expect("nine starts");
    if !best.f.is_finite() {
        return Err(Error::Unsupported("contrast is not finite anywhere in the search box".into()));
    }
    let alpha = best.x[0].exp();
    let second = best.x[1].exp();
    let m = model_for(family, alpha, second);
    Ok(FitResult {
        family,
        alpha,
        beta: m.beta,
        rho_y: m.rho_y,
        gamma: intensity / m.rho_y,
        objective: best.f,
        converged: best.converged,
        options: *opts,
    })
}

/// Positions of the 3×3 multistart within each log-range.
const START_FRACTIONS: [f64; 3] = [1.0 / 6.0, 0.5, 5.0 / 6.0];
const SIMPLEX_TOL: f64 = 1e-6;
const MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy)]
struct Minimum {
    x: [f64; 2],
    f: f64,
    converged: bool,
}

/// Nelder–Mead on a 2-D problem. Converged when the largest vertex distance
/// from the best vertex falls below [`SIMPLEX_TOL`]; coordinates are logs, so
/// the tolerance is relative.
fn nelder_mead(f: &impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2]) -> Minimum {
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut values = simplex.map(|x| f(x));
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..MAX_ITER {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);

        let diameter = simplex[1..]
            .iter()
            .map(|v| ((v[0] - simplex[0][0]).powi(2) + (v[1] - simplex[0][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOL {
            return Minimum {
                x: simplex[0],
                f: values[0],
                converged: values[0].is_finite(),
            };
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = lerp(centroid, reflected, 0.5);
                (c, f(c))
            } else {
                let c = lerp(centroid, simplex[2], 0.5);
                (c, f(c))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let (i, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("three vertices");
    Minimum {
        x: simplex[i],
        f: values[i],
        converged: false,
    }
}
