use std::f64::consts::PI;

use super::{check_grid, CurveKind, Statistic, SummaryCurve};
use crate::cluster::{ModelFamily, ModelParams};
use crate::error::{Error, Result};

/// Spatial dimension of every model in this crate.
pub const DIM: usize = 2;

/// Scale entering the DPP correction term: `β²/2` (Gaussian) or `β²` (Ginibre).
fn dpp_scale(m: &ModelParams) -> Option<f64> {
    let beta = m.beta?;
    match m.family {
        ModelFamily::Thomas => None,
        ModelFamily::GaussianDppThomas => Some(0.5 * beta * beta),
        ModelFamily::GinibreDppThomas => Some(beta * beta),
    }
}

/// Pair correlation function at distance `r`.
pub fn pcf_theoretical(m: &ModelParams, r: f64) -> f64 {
    let four_a2 = 4.0 * m.alpha * m.alpha;
    let r2 = r * r;
    let cluster = (-r2 / four_a2).exp() / (PI * four_a2 * m.rho_y);
    match dpp_scale(m) {
        None => 1.0 + cluster,
        Some(b) => {
            let s = four_a2 + b;
            1.0 + cluster - b / s * (-r2 / s).exp()
        }
    }
}

/// K-function at distance `r`.
pub fn k_theoretical(m: &ModelParams, r: f64) -> f64 {
    let four_a2 = 4.0 * m.alpha * m.alpha;
    let r2 = r * r;
    let base = PI * r2 + -(-r2 / four_a2).exp_m1() / m.rho_y;
    match dpp_scale(m) {
        None => base,
        Some(b) => base - PI * b * -(-r2 / (four_a2 + b)).exp_m1(),
    }
}

/// The unique `r > 0` at which the pair correlation crosses 1; it exceeds 1
/// below and falls under 1 above.
pub fn pcf_crossover_radius(m: &ModelParams) -> Result<f64> {
    m.validate()?;
    let b = dpp_scale(m).ok_or_else(|| {
        Error::Unsupported("the Thomas pair correlation exceeds 1 at every distance".into())
    })?;
    let four_a2 = 4.0 * m.alpha * m.alpha;
    let s = four_a2 + b;
    let arg = m.rho_y * PI * four_a2 * b / s;
    if !(arg < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "no crossover: centre intensity {} is at or above the degenerate value {}",
            m.rho_y,
            s / (PI * four_a2 * b)
        )));
    }
    Ok((arg.ln() / (1.0 / s - 1.0 / four_a2)).sqrt())
}

/// Tabulates the theoretical pcf or K on `grid`.
pub fn theoretical_curve(m: &ModelParams, statistic: Statistic, grid: &[f64]) -> Result<SummaryCurve> {
    m.validate()?;
    check_grid(grid)?;
    let f: fn(&ModelParams, f64) -> f64 = match statistic {
        Statistic::Pcf => pcf_theoretical,
        Statistic::K => k_theoretical,
        other => {
            return Err(Error::Unsupported(format!(
                "no closed form for the {other} function of these models"
            )))
        }
    };
    let values = grid.iter().map(|&r| f(m, r)).collect();
    SummaryCurve::new(grid.to_vec(), values, statistic, CurveKind::Theoretical)
}
