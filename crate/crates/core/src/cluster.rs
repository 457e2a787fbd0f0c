//! Simulation of Thomas, Gaussian-DPP-Thomas and Ginibre-DPP-Thomas processes.
//!
//! Conditional on the centres `Y`, each centre `y` spawns a Poisson(γ) number
//! of offspring drawn from `N₂(y, α²I)`. Centres are simulated on the window
//! extended by a margin, and offspring falling outside the window are dropped.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dpp::{
    gaussian_dpp_spectrum, ginibre_spectrum, most_repulsive_intensity, sample_dpp, validate_dpp_params,
    DppFamily, DppSpectrum, GinibreParams, DEFAULT_RELATIVE_TOL,
};
use crate::error::{invalid, Result};
use crate::geometry::{Point, PointPattern, Window};
use crate::rng::RngStream;
use crate::special::regularized_gamma_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    Thomas,
    GaussianDppThomas,
    GinibreDppThomas,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [
        ModelFamily::GaussianDppThomas,
        ModelFamily::GinibreDppThomas,
        ModelFamily::Thomas,
    ];

    pub fn is_dpp(&self) -> bool {
        !matches!(self, ModelFamily::Thomas)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Thomas => "thomas",
            ModelFamily::GaussianDppThomas => "gaussian-dpp-thomas",
            ModelFamily::GinibreDppThomas => "ginibre-dpp-thomas",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thomas" => Ok(ModelFamily::Thomas),
            "gaussian-dpp-thomas" | "gaussian" => Ok(ModelFamily::GaussianDppThomas),
            "ginibre-dpp-thomas" | "ginibre" => Ok(ModelFamily::GinibreDppThomas),
            other => Err(invalid(format!(
                "unknown model `{other}` (expected thomas, gaussian-dpp-thomas or ginibre-dpp-thomas)"
            ))),
        }
    }
}

/// Parameters of a stationary cluster model.
///
/// `gamma` is the mean cluster size, `alpha` the offspring standard
/// deviation, `rho_y` the centre intensity and `beta` the DPP scale (absent
/// for Thomas).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: ModelFamily,
    pub gamma: f64,
    pub alpha: f64,
    #[serde(rename = "rhoY")]
    pub rho_y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl ModelParams {
    pub fn thomas(gamma: f64, alpha: f64, rho_y: f64) -> Result<Self> {
        let m = Self {
            family: ModelFamily::Thomas,
            gamma,
            alpha,
            rho_y,
            beta: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// A DPP-Thomas model with explicit `(ρ_Y, β)`, subject to the existence condition.
    pub fn dpp(family: ModelFamily, gamma: f64, alpha: f64, rho_y: f64, beta: f64) -> Result<Self> {
        if !family.is_dpp() {
            return Err(invalid("the Thomas process has no DPP scale parameter"));
        }
        let m = Self {
            family,
            gamma,
            alpha,
            rho_y,
            beta: Some(beta),
        };
        m.validate()?;
        Ok(m)
    }

    /// A DPP-Thomas model in the most repulsive mode, `ρ_Y = 1/(πβ²)`.
    pub fn most_repulsive(family: ModelFamily, gamma: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::dpp(family, gamma, alpha, most_repulsive_intensity(beta), beta)
    }

    /// Builds any family from `(α, β)` with `ρ_Y = 1/(πβ²)`; for Thomas `β`
    /// only sets the centre intensity.
    pub fn from_beta(family: ModelFamily, gamma: f64, alpha: f64, beta: f64) -> Result<Self> {
        if family.is_dpp() {
            Self::most_repulsive(family, gamma, alpha, beta)
        } else {
            Self::thomas(gamma, alpha, most_repulsive_intensity(beta))
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("alpha", self.alpha), ("rhoY", self.rho_y)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        match (self.family.is_dpp(), self.beta) {
            (true, Some(_)) => validate_dpp_params(&self.dpp_family().unwrap()),
            (true, None) => Err(invalid(format!("{} requires beta", self.family))),
            (false, Some(_)) => Err(invalid("the Thomas process has no DPP scale parameter")),
            (false, None) => Ok(()),
        }
    }

    /// The centre process, for DPP families.
    pub fn dpp_family(&self) -> Option<DppFamily> {
        let beta = self.beta?;
        match self.family {
            ModelFamily::Thomas => None,
            ModelFamily::GaussianDppThomas => Some(DppFamily::Gaussian { rho: self.rho_y, beta }),
            ModelFamily::GinibreDppThomas => Some(DppFamily::Ginibre { rho: self.rho_y, beta }),
        }
    }

    /// `ρ_X = γ ρ_Y`.
    pub fn intensity(&self) -> f64 {
        intensity(self)
    }
}

/// `ρ_X = γ ρ_Y`.
pub fn intensity(m: &ModelParams) -> f64 {
    m.gamma * m.rho_y
}

/// Margin by which the window is grown before centres are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub margin: f64,
}

impl Extension {
    /// Offspring beyond four standard deviations are negligible.
    pub const DEFAULT_SDS: f64 = 4.0;

    pub fn new(margin: f64) -> Result<Self> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(invalid(format!("extension margin must be nonnegative, got {margin}")));
        }
        Ok(Self { margin })
    }

    pub fn default_for(m: &ModelParams) -> Self {
        Self {
            margin: Self::DEFAULT_SDS * m.alpha,
        }
    }
}

/// Draws the offspring of one centre: Poisson(γ) points from `N₂(centre, α²I)`.
pub fn sample_cluster(centre: Point, gamma: f64, alpha: f64, rng: &mut RngStream) -> Vec<Point> {
    let n = poisson_count(gamma, rng);
    (0..n)
        .map(|_| {
            let dx: f64 = StandardNormal.sample(rng);
            let dy: f64 = StandardNormal.sample(rng);
            Point::new(centre.x + alpha * dx, centre.y + alpha * dy)
        })
        .collect()
}

fn poisson_count(mean: f64, rng: &mut RngStream) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    let n: f64 = d.sample(rng);
    n as usize
}

fn uniform_points(w: &Window, n: usize, rng: &mut RngStream) -> Vec<Point> {
    use rand::Rng;
    let (x0, x1, y0, y1) = w.bounding_box();
    match w {
        Window::Rect { .. } => (0..n)
            .map(|_| Point::new(x0 + (x1 - x0) * rng.random::<f64>(), y0 + (y1 - y0) * rng.random::<f64>()))
            .collect(),
        Window::Disc { center, radius } => (0..n)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                let t = std::f64::consts::TAU * rng.random::<f64>();
                let p = Point::new(center.x + r * t.cos(), center.y + r * t.sin());
                if w.contains(&p) {
                    p
                } else {
                    *center
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone)]
enum CentreSampler {
    Poisson,
    Dpp(DppSpectrum),
}

/// A cluster model bound to a window, with the centre spectrum precomputed so
/// that many replicates can be drawn cheaply (and concurrently, one
/// [`RngStream`] per replicate).
#[derive(Debug, Clone)]
pub struct ClusterSimulator {
    params: ModelParams,
    window: Window,
    extended: Window,
    centres: CentreSampler,
}

impl ClusterSimulator {
    pub fn new(params: ModelParams, window: Window, ext: Extension) -> Result<Self> {
        params.validate()?;
        window.validate()?;
        Extension::new(ext.margin)?;
        let extended = window.expanded(ext.margin);
        let centres = match params.dpp_family() {
            None => CentreSampler::Poisson,
            Some(family @ DppFamily::Gaussian { .. }) => {
                let (x0, x1, y0, y1) = extended.bounding_box();
                let rect = Window::rect(x0, x1, y0, y1)?;
                let top = (family.intensity() * std::f64::consts::PI * family.beta().powi(2)).min(1.0);
                CentreSampler::Dpp(gaussian_dpp_spectrum(&family, &rect, DEFAULT_RELATIVE_TOL * top)?)
            }
            Some(DppFamily::Ginibre { rho, beta }) => {
                let gp = GinibreParams::from_rho_beta(rho, beta)?;
                let center = extended.center();
                let radius = extended.circumradius();
                let t = gp.lambda * std::f64::consts::PI * radius * radius / gp.nu;
                let top = gp.nu * regularized_gamma_cdf(1.0, t);
                CentreSampler::Dpp(ginibre_spectrum(gp, center, radius, DEFAULT_RELATIVE_TOL * top)?)
            }
        };
        Ok(Self {
            params,
            window,
            extended,
            centres,
        })
    }

    pub fn with_default_extension(params: ModelParams, window: Window) -> Result<Self> {
        Self::new(params, window, Extension::default_for(&params))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn extended_window(&self) -> &Window {
        &self.extended
    }

    /// The precomputed centre spectrum (DPP families only).
    pub fn spectrum(&self) -> Option<&DppSpectrum> {
        match &self.centres {
            CentreSampler::Poisson => None,
            CentreSampler::Dpp(s) => Some(s),
        }
    }

    /// Centres on the extended window.
    pub fn sample_centres(&self, rng: &mut RngStream) -> Result<PointPattern> {
        match &self.centres {
            CentreSampler::Poisson => {
                let n = poisson_count(self.params.rho_y * self.extended.area(), rng);
                Ok(PointPattern::restricted(uniform_points(&self.extended, n, rng), self.extended))
            }
            CentreSampler::Dpp(spec) => {
                let y = sample_dpp(spec, rng)?;
                Ok(PointPattern::restricted(y.into_points(), self.extended))
            }
        }
    }

    /// One realization of the cluster process on the window.
    pub fn sample(&self, rng: &mut RngStream) -> Result<PointPattern> {
        let centres = self.sample_centres(rng)?;
        let mut points = Vec::new();
        for c in centres.points() {
            points.extend(
                sample_cluster(*c, self.params.gamma, self.params.alpha, rng)
                    .into_iter()
                    .filter(|p| self.window.contains(p)),
            );
        }
        Ok(PointPattern::restricted(points, self.window))
    }
}

/// Cluster centres on the window extended by `ext`.
pub fn sample_centres(m: &ModelParams, w: &Window, ext: Extension, rng: &mut RngStream) -> Result<PointPattern> {
    ClusterSimulator::new(*m, *w, ext)?.sample_centres(rng)
}

/// One realization of the model on `w`.
pub fn sample_model(m: &ModelParams, w: &Window, ext: Extension, rng: &mut RngStream) -> Result<PointPattern> {
    ClusterSimulator::new(*m, *w, ext)?.sample(rng)
}
