//! Simulation study: for each true model and parameter cell, simulate
//! replicates, fit competing families and test each fit with a global envelope.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterSimulator, ModelFamily, ModelParams};
use crate::dpp::max_beta;
use crate::envelope::{envelope_test_with, TestOptions, DEFAULT_LEVEL};
use crate::error::{invalid, Result};
use crate::fit::{min_contrast_fit, ContrastOptions};
use crate::geometry::Window;
use crate::rng::RngStream;
use crate::summaries::Statistic;

/// Default simulations per envelope test in a study.
pub const STUDY_N_SIM: usize = 1999;

fn default_replicates() -> usize {
    100
}

fn default_n_sim() -> usize {
    STUDY_N_SIM
}

fn default_statistic() -> Statistic {
    Statistic::J
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_threshold() -> f64 {
    0.05
}

fn default_window() -> Window {
    Window::unit_square()
}

/// Study grid. DPP true models run in the most repulsive mode,
/// `β = 1/sqrt(π ρ_Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub true_families: Vec<ModelFamily>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    #[serde(rename = "rhoYs")]
    pub rho_ys: Vec<f64>,
    /// Families fitted to each replicate; by default the two other than the true one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_families: Option<Vec<ModelFamily>>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_n_sim")]
    pub n_sim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_statistic")]
    pub statistic: Statistic,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Reject when the p-value falls below this.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_window")]
    pub window: Window,
}

/// One `(true family, α, γ, ρ_Y)` combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    /// Position in the full grid; fixes the cell's random stream.
    pub index: usize,
    pub true_family: ModelFamily,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "rhoY")]
    pub rho_y: f64,
}

impl StudyCell {
    pub fn model(&self) -> Result<ModelParams> {
        if self.true_family.is_dpp() {
            ModelParams::dpp(self.true_family, self.gamma, self.alpha, self.rho_y, max_beta(self.rho_y))
        } else {
            ModelParams::thomas(self.gamma, self.alpha, self.rho_y)
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.true_families.is_empty() || self.alphas.is_empty() || self.gammas.is_empty() || self.rho_ys.is_empty()
        {
            return Err(invalid("study grid needs at least one family, alpha, gamma and rhoY"));
        }
        if self.replicates == 0 {
            return Err(invalid("study needs at least one replicate"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        self.window.validate()?;
        for cell in self.cells() {
            cell.model()?;
        }
        Ok(())
    }

    /// Cells in a fixed order: family, then α, γ, ρ_Y.
    pub fn cells(&self) -> Vec<StudyCell> {
        let mut out = Vec::new();
        for &true_family in &self.true_families {
            for &alpha in &self.alphas {
                for &gamma in &self.gammas {
                    for &rho_y in &self.rho_ys {
                        out.push(StudyCell {
                            index: out.len(),
                            true_family,
                            alpha,
                            gamma,
                            rho_y,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn fitted_for(&self, truth: ModelFamily) -> Vec<ModelFamily> {
        match &self.fitted_families {
            Some(f) => f.clone(),
            None => ModelFamily::ALL.into_iter().filter(|&f| f != truth).collect(),
        }
    }
}

/// One output line: a fitted family within a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub true_family: ModelFamily,
    pub fitted_family: ModelFamily,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "rhoY")]
    pub rho_y: f64,
    /// Fraction of replicates with p-value below the threshold.
    pub reject_rate: f64,
    /// Mean of `ρ̂_Y / ρ_Y` over replicates.
    #[serde(rename = "mean_rhoY_ratio")]
    pub mean_rho_y_ratio: f64,
}

pub const STUDY_CSV_HEADER: &str = "true_family,fitted_family,alpha,gamma,rhoY,reject_rate,mean_rhoY_ratio";

impl StudyRow {
    pub fn write_csv_line<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.true_family,
            self.fitted_family,
            self.alpha,
            self.gamma,
            self.rho_y,
            self.reject_rate,
            self.mean_rho_y_ratio
        )
    }

    /// Key shared with [`StudyCell::key`].
    pub fn cell_key(&self) -> String {
        cell_key(self.true_family, self.alpha, self.gamma, self.rho_y)
    }
}

impl StudyCell {
    /// Identifies a cell in a results file, for resuming.
    pub fn key(&self) -> String {
        cell_key(self.true_family, self.alpha, self.gamma, self.rho_y)
    }
}

fn cell_key(f: ModelFamily, alpha: f64, gamma: f64, rho_y: f64) -> String {
    format!("{f},{alpha},{gamma},{rho_y}")
}

pub fn write_study_csv<W: Write>(rows: &[StudyRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{STUDY_CSV_HEADER}")?;
    for r in rows {
        r.write_csv_line(&mut out)?;
    }
    Ok(())
}

/// Per-replicate outcome for one fitted family.
#[derive(Debug, Clone, Copy)]
struct ReplicateOutcome {
    rejected: bool,
    rho_ratio: f64,
}

/// Runs every replicate of one cell. Replicate `k` uses
/// `RngStream::new(seed, cell.index).child(k)`.
pub fn run_cell(config: &StudyConfig, cell: &StudyCell) -> Result<Vec<StudyRow>> {
    let model = cell.model()?;
    let window = config.window;
    let sim = ClusterSimulator::with_default_extension(model, window)?;
    let fitted = config.fitted_for(cell.true_family);
    let cell_stream = RngStream::new(config.seed, cell.index as u64);
    let test_opts = TestOptions {
        level: config.level,
        ..TestOptions::default()
    };
    let outcomes = (0..config.replicates)
        .into_par_iter()
        .map(|k| -> Result<Vec<ReplicateOutcome>> {
            let rep = cell_stream.child(k as u64);
            let x = sim.sample(&mut rep.child(0))?;
            let opts = ContrastOptions::default_for(&window, x.len());
            fitted
                .iter()
                .map(|&family| {
                    let fit = min_contrast_fit(&x, family, &opts)?;
                    let stream = rep.child(1 + family as u64);
                    let env = envelope_test_with(&x, &fit, config.statistic, config.n_sim, None, &stream, &test_opts)?;
                    Ok(ReplicateOutcome {
                        rejected: env.rejects(config.threshold),
                        rho_ratio: fit.rho_y / cell.rho_y,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = config.replicates as f64;
    Ok(fitted
        .iter()
        .enumerate()
        .map(|(j, &family)| StudyRow {
            true_family: cell.true_family,
            fitted_family: family,
            alpha: cell.alpha,
            gamma: cell.gamma,
            rho_y: cell.rho_y,
            reject_rate: outcomes.iter().filter(|o| o[j].rejected).count() as f64 / reps,
            mean_rho_y_ratio: outcomes.iter().map(|o| o[j].rho_ratio).sum::<f64>() / reps,
        })
        .collect())
}

/// A cell that failed, with the error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: StudyCell,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyOutcome {
    pub rows: Vec<StudyRow>,
    pub failures: Vec<CellFailure>,
}

/// Runs all cells; a failing cell is recorded and the rest continue.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome> {
    config.validate()?;
    let mut outcome = StudyOutcome::default();
    for cell in config.cells() {
        match run_cell(config, &cell) {
            Ok(rows) => outcome.rows.extend(rows),
            Err(e) => outcome.failures.push(CellFailure {
                cell,
                error: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> StudyConfig {
        serde_json::from_str(
            r#"{"true_families": ["thomas", "ginibre-dpp-thomas"], "alphas": [0.03, 0.05],
                "gammas": [50], "rhoYs": [50], "replicates": 2, "n_sim": 99, "seed": 4}"#,
        )
        .unwrap()
    }

    #[test]
    fn config_defaults_and_cells() {
        let c = config();
        assert_eq!(c.statistic, Statistic::J);
        assert_eq!(c.level, 0.95);
        assert_eq!(c.window, Window::unit_square());
        let cells = c.cells();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[3].index, 3);
        assert_eq!(cells[2].true_family, ModelFamily::GinibreDppThomas);
        assert_eq!(
            c.fitted_for(ModelFamily::Thomas),
            vec![ModelFamily::GaussianDppThomas, ModelFamily::GinibreDppThomas]
        );
        let m = cells[2].model().unwrap();
        assert!((m.beta.unwrap() - 1.0 / (std::f64::consts::PI * 50.0).sqrt()).abs() < 1e-15);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(serde_json::from_str::<StudyConfig>(r#"{"true_families": [], "alphas": [], "gammas": [], "rhoYs": [], "bogus": 1}"#).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let row = StudyRow {
            true_family: ModelFamily::Thomas,
            fitted_family: ModelFamily::GinibreDppThomas,
            alpha: 0.03,
            gamma: 50.0,
            rho_y: 50.0,
            reject_rate: 0.25,
            mean_rho_y_ratio: 0.5,
        };
        let mut buf = Vec::new();
        write_study_csv(&[row.clone()], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "true_family,fitted_family,alpha,gamma,rhoY,reject_rate,mean_rhoY_ratio\nthomas,ginibre-dpp-thomas,0.03,50,50,0.25,0.5\n"
        );
        assert_eq!(row.cell_key(), config().cells()[0].key());
    }

    #[test]
    fn small_cell_is_deterministic() {
        let mut c = config();
        c.alphas = vec![0.05];
        c.gammas = vec![10.0];
        c.rho_ys = vec![20.0];
        c.true_families = vec![ModelFamily::Thomas];
        let cell = c.cells()[0];
        let a = run_cell(&c, &cell).unwrap();
        let b = run_cell(&c, &cell).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        for r in &a {
            assert!((0.0..=1.0).contains(&r.reject_rate));
            assert!(r.mean_rho_y_ratio > 0.0);
        }
    }
}
