//! Functional summary statistics: closed-form pair correlation and K-functions
//! of the three cluster models, and nonparametric estimators of K, g, F, G, J.

mod empirical;
mod theory;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Window;

pub use empirical::{
    default_pcf_bandwidth, f_hat, g_hat, j_hat, k_hat, pcf_hat, statistic_values, F_LATTICE_SIZE,
};
pub use theory::{k_theoretical, pcf_crossover_radius, pcf_theoretical, theoretical_curve, DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "pcf")]
    Pcf,
    K,
    F,
    G,
    J,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Pcf => "pcf",
            Statistic::K => "K",
            Statistic::F => "F",
            Statistic::G => "G",
            Statistic::J => "J",
        })
    }
}

impl FromStr for Statistic {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcf" | "g" => Ok(Statistic::Pcf),
            "K" | "k" => Ok(Statistic::K),
            "F" | "f" => Ok(Statistic::F),
            "G" => Ok(Statistic::G),
            "J" | "j" => Ok(Statistic::J),
            other => Err(invalid(format!("unknown statistic `{other}` (pcf, K, F, G, J)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Theoretical,
    Empirical,
}

/// A summary function tabulated on a strictly increasing grid of distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub statistic: Statistic,
    pub kind: CurveKind,
    /// Set when the curve had to be truncated to an empty range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SummaryCurve {
    pub fn new(r: Vec<f64>, values: Vec<f64>, statistic: Statistic, kind: CurveKind) -> Result<Self> {
        if r.len() != values.len() {
            return Err(invalid(format!(
                "curve grid has {} points but {} values",
                r.len(),
                values.len()
            )));
        }
        check_grid(&r)?;
        Ok(Self {
            r,
            values,
            statistic,
            kind,
            warning: None,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Linear interpolation at `x`; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.r.len();
        if n == 0 || x < self.r[0] || x > self.r[n - 1] {
            return None;
        }
        let k = self.r.partition_point(|&v| v < x);
        if k < n && self.r[k] == x {
            return Some(self.values[k]);
        }
        let (x0, x1) = (self.r[k - 1], self.r[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Writes `r,value` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,value")?;
        for (r, v) in self.r.iter().zip(&self.values) {
            writeln!(out, "{r},{v}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_grid(r: &[f64]) -> Result<()> {
    if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(invalid("curve grid must contain finite nonnegative distances"));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("curve grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` equally spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Number of grid points in [`default_grid`].
pub const DEFAULT_GRID_SIZE: usize = 513;

/// `r ∈ [0, shorter side / 4]` with 513 points.
pub fn default_grid(w: &Window) -> Vec<f64> {
    linspace(0.0, 0.25 * w.shorter_side(), DEFAULT_GRID_SIZE)
}
