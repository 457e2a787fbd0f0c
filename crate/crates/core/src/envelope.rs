//! Global envelopes and Monte Carlo tests ordered by extreme rank length.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterSimulator, Extension};
use crate::error::{invalid, Result};
use crate::fit::FitResult;
use crate::geometry::PointPattern;
use crate::rng::RngStream;
use crate::summaries::{default_grid, default_pcf_bandwidth, linspace, statistic_values, Statistic, DEFAULT_GRID_SIZE};

/// Default number of simulations for a single test.
pub const DEFAULT_N_SIM: usize = 2499;
/// Reduced simulation count for quick runs.
pub const FAST_N_SIM: usize = 199;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Curves a test must be able to discard beyond the envelope.
pub const MIN_DISCARDED_FOR_TEST: usize = 5;

const LEVEL_EPS: f64 = 1e-9;

/// Observed curve and simulated curves on a shared grid, restricted to grid
/// points where every curve is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEnsemble {
    r: Vec<f64>,
    observed: Vec<f64>,
    simulated: Vec<Vec<f64>>,
    dropped: usize,
}

impl CurveEnsemble {
    pub fn new(r: Vec<f64>, observed: Vec<f64>, simulated: Vec<Vec<f64>>) -> Result<Self> {
        if simulated.is_empty() {
            return Err(invalid("an ensemble needs at least one simulated curve"));
        }
        let m = r.len();
        if observed.len() != m || simulated.iter().any(|c| c.len() != m) {
            return Err(invalid("all curves must share the grid"));
        }
        let keep: Vec<usize> = (0..m)
            .filter(|&k| observed[k].is_finite() && simulated.iter().all(|c| c[k].is_finite()))
            .collect();
        if keep.is_empty() {
            return Err(invalid("no grid point where every curve is defined"));
        }
        let pick = |c: &[f64]| keep.iter().map(|&k| c[k]).collect::<Vec<_>>();
        Ok(Self {
            r: pick(&r),
            observed: pick(&observed),
            simulated: simulated.iter().map(|c| pick(c)).collect(),
            dropped: m - keep.len(),
        })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn simulated(&self) -> &[Vec<f64>] {
        &self.simulated
    }

    pub fn n_sim(&self) -> usize {
        self.simulated.len()
    }

    /// Grid points removed because some curve was undefined there.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Curve `j`, with the observed curve at index 0.
    pub fn curve(&self, j: usize) -> &[f64] {
        if j == 0 {
            &self.observed
        } else {
            &self.simulated[j - 1]
        }
    }
}

/// Extreme rank length ordering of the `s + 1` curves of an ensemble (index
/// 0 is the observed curve).
#[derive(Debug, Clone)]
pub struct ErlOrdering {
    /// Per curve, its two-sided pointwise ranks sorted ascending.
    sorted_ranks: Vec<Vec<u32>>,
}

impl ErlOrdering {
    pub fn len(&self) -> usize {
        self.sorted_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_ranks.is_empty()
    }

    /// `N_m = #{grid points where the two-sided rank equals m}` for `m = 1..=s+1`.
    pub fn counts(&self, j: usize) -> Vec<usize> {
        let mut c = vec![0; self.len()];
        for &r in &self.sorted_ranks[j] {
            c[r as usize - 1] += 1;
        }
        c
    }

    /// `Greater` when curve `a` is more extreme than curve `b`.
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        // a smaller sorted-rank vector means more points at low (extreme) ranks
        self.sorted_ranks[b].cmp(&self.sorted_ranks[a])
    }

    /// Curve indices from least to most extreme; ties keep index order.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.compare(a, b).then(a.cmp(&b)));
        idx
    }

    /// `(1 + #{i ≥ 1 : curve i at least as extreme as curve 0}) / (s + 1)`.
    pub fn p_value(&self) -> f64 {
        let at_least = (1..self.len()).filter(|&i| self.compare(i, 0) != Ordering::Less).count();
        (1 + at_least) as f64 / self.len() as f64
    }
}

/// Two-sided pointwise ranks: `min(1 + #below, 1 + #above)` per curve and
/// grid point, so tied values share the smaller rank.
pub fn pointwise_ranks(ens: &CurveEnsemble) -> Vec<Vec<u32>> {
    let n = ens.n_sim() + 1;
    let m = ens.r.len();
    let mut ranks = vec![vec![0u32; m]; n];
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    for k in 0..m {
        column.clear();
        column.extend((0..n).map(|j| (ens.curve(j)[k], j)));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && column[end].0 == column[start].0 {
                end += 1;
            }
            let below = start as u32;
            let above = (n - end) as u32;
            let r = 1 + below.min(above);
            for &(_, j) in &column[start..end] {
                ranks[j][k] = r;
            }
            start = end;
        }
    }
    ranks
}

pub fn extreme_rank_length(ens: &CurveEnsemble) -> Result<ErlOrdering> {
    let mut sorted_ranks = pointwise_ranks(ens);
    if sorted_ranks.len() < 2 {
        return Err(invalid("ranking needs at least two curves"));
    }
    for v in &mut sorted_ranks {
        v.sort_unstable();
    }
    Ok(ErlOrdering { sorted_ranks })
}

/// Global envelope and test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub r: Vec<f64>,
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub central: Vec<f64>,
    pub p_value: f64,
    pub level: f64,
    pub n_sim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Statistic>,
    /// Grid points dropped because some curve was undefined there.
    pub dropped_points: usize,
}

/// Scalar outcome written next to the envelope CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub p_value: f64,
    pub level: f64,
    pub n_sim: usize,
    pub statistic: Option<Statistic>,
    pub grid_points: usize,
    pub dropped_points: usize,
    pub outside: bool,
}

impl EnvelopeResult {
    /// Whether the observed curve leaves the envelope anywhere.
    pub fn observed_outside(&self) -> bool {
        self.observed
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(o, (lo, hi))| o < lo || o > hi)
    }

    pub fn rejects(&self, threshold: f64) -> bool {
        self.p_value < threshold
    }

    pub fn summary(&self) -> EnvelopeSummary {
        EnvelopeSummary {
            p_value: self.p_value,
            level: self.level,
            n_sim: self.n_sim,
            statistic: self.statistic,
            grid_points: self.r.len(),
            dropped_points: self.dropped_points,
            outside: self.observed_outside(),
        }
    }

    /// Writes `r,obs,lo,hi,central` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,obs,lo,hi,central")?;
        for k in 0..self.r.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.r[k], self.observed[k], self.lower[k], self.upper[k], self.central[k]
            )?;
        }
        Ok(())
    }
}

fn discardable(level: f64, n_curves: usize) -> usize {
    ((1.0 - level) * n_curves as f64 + LEVEL_EPS).floor() as usize
}

/// Global envelope at `level` from the ERL ordering of all `s + 1` curves.
///
/// The `⌈level·(s+1)⌉` least extreme curves fix the cutoff; the envelope spans
/// the simulated curves no more extreme than the cutoff curve.
pub fn global_envelope(ens: &CurveEnsemble, level: f64) -> Result<EnvelopeResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("envelope level must lie in (0, 1), got {level}")));
    }
    let n = ens.n_sim() + 1;
    if discardable(level, n) < 1 {
        return Err(invalid(format!(
            "{} simulations are too few for a {level} envelope",
            ens.n_sim()
        )));
    }
    let erl = extreme_rank_length(ens)?;
    let order = erl.order();
    let keep = ((level * n as f64) - LEVEL_EPS).ceil() as usize;
    let cutoff = order[keep.clamp(1, n) - 1];
    let retained: Vec<usize> = (1..n).filter(|&i| erl.compare(i, cutoff) != Ordering::Greater).collect();
    if retained.is_empty() {
        return Err(invalid("no simulated curve inside the envelope"));
    }
    let m = ens.r.len();
    let mut lower = vec![f64::INFINITY; m];
    let mut upper = vec![f64::NEG_INFINITY; m];
    for &i in &retained {
        for (k, &v) in ens.curve(i).iter().enumerate() {
            lower[k] = lower[k].min(v);
            upper[k] = upper[k].max(v);
        }
    }
    let s = ens.n_sim() as f64;
    let central = (0..m)
        .map(|k| ens.simulated.iter().map(|c| c[k]).sum::<f64>() / s)
        .collect();
    Ok(EnvelopeResult {
        r: ens.r.clone(),
        observed: ens.observed.clone(),
        lower,
        upper,
        central,
        p_value: erl.p_value(),
        level,
        n_sim: ens.n_sim(),
        statistic: None,
        dropped_points: ens.dropped,
    })
}

/// Settings for [`envelope_test_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct TestOptions {
    pub level: f64,
    /// Defaults to `[0, shorter side / 4]` with 513 points (pcf: starting at the bandwidth).
    pub grid: Option<Vec<f64>>,
    /// pcf only; defaults to the bandwidth rule applied to the data.
    pub pcf_bandwidth: Option<f64>,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            level: DEFAULT_LEVEL,
            grid: None,
            pcf_bandwidth: None,
        }
    }
}

/// Global envelope test of `fitted` against `pattern` at level 0.95.
pub fn envelope_test(
    pattern: &PointPattern,
    fitted: &FitResult,
    statistic: Statistic,
    n_sim: usize,
    ext: Option<Extension>,
    rng: &RngStream,
) -> Result<EnvelopeResult> {
    envelope_test_with(pattern, fitted, statistic, n_sim, ext, rng, &TestOptions::default())
}

/// [`envelope_test`] with explicit level and grid. Simulation `i` draws from
/// `rng.child(i)`, so results do not depend on scheduling.
pub fn envelope_test_with(
    pattern: &PointPattern,
    fitted: &FitResult,
    statistic: Statistic,
    n_sim: usize,
    ext: Option<Extension>,
    rng: &RngStream,
    opts: &TestOptions,
) -> Result<EnvelopeResult> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(invalid(format!("envelope level must lie in (0, 1), got {}", opts.level)));
    }
    if discardable(opts.level, n_sim + 1) < MIN_DISCARDED_FOR_TEST {
        return Err(invalid(format!(
            "{n_sim} simulations are too few for a level {} test: need (1 - level)(n_sim + 1) >= {MIN_DISCARDED_FOR_TEST}",
            opts.level
        )));
    }
    let model = fitted.model()?;
    let window = *pattern.window();
    let sim = ClusterSimulator::new(model, window, ext.unwrap_or_else(|| Extension::default_for(&model)))?;

    let bandwidth = match statistic {
        Statistic::Pcf => Some(opts.pcf_bandwidth.unwrap_or_else(|| default_pcf_bandwidth(pattern))),
        _ => None,
    };
    let grid = match (&opts.grid, bandwidth) {
        (Some(g), _) => g.clone(),
        (None, Some(b)) => linspace(b, 0.25 * window.shorter_side(), DEFAULT_GRID_SIZE),
        (None, None) => default_grid(&window),
    };
    let observed = statistic_values(pattern, statistic, &grid, bandwidth)?;
    let simulated = (0..n_sim)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.child(i as u64);
            let x = sim.sample(&mut stream)?;
            statistic_values(&x, statistic, &grid, bandwidth)
        })
        .collect::<Result<Vec<_>>>()?;
    let ens = CurveEnsemble::new(grid, observed, simulated)?;
    let mut res = global_envelope(&ens, opts.level)?;
    res.statistic = Some(statistic);
    Ok(res)
}
