use std::f64::consts::PI;

use super::{check_grid, CurveKind, Statistic, SummaryCurve};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, PointPattern, Window};
use crate::spatial::CellGrid;

/// Test points per shorter window side in the empty-space estimator.
pub const F_LATTICE_SIZE: usize = 128;

/// `0.15 / sqrt(intensity)`.
pub fn default_pcf_bandwidth(p: &PointPattern) -> f64 {
    0.15 / p.intensity().sqrt()
}

/// Calls `f(i, j, d)` for every unordered pair at distance `d <= rmax`.
fn for_each_close_pair(points: &[Point], rmax: f64, mut f: impl FnMut(usize, usize, f64)) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let r2 = rmax * rmax;
    for (k, &i) in order.iter().enumerate() {
        let pi = points[i];
        for &j in &order[k + 1..] {
            let pj = points[j];
            if pj.x - pi.x > rmax {
                break;
            }
            let d2 = pi.dist2(&pj);
            if d2 <= r2 {
                f(i, j, d2.sqrt());
            }
        }
    }
}

fn require_points(p: &PointPattern, needed: usize) -> Result<()> {
    if p.len() < needed {
        return Err(Error::InsufficientPoints { needed, got: p.len() });
    }
    Ok(())
}

fn require_rect(w: &Window) -> Result<()> {
    match w {
        Window::Rect { .. } => Ok(()),
        Window::Disc { .. } => Err(Error::UnsupportedWindow(
            "translation edge correction requires a rectangular window",
        )),
    }
}

fn k_values(p: &PointPattern, grid: &[f64]) -> Result<Vec<f64>> {
    require_points(p, 2)?;
    require_rect(p.window())?;
    let Some(&rmax) = grid.last() else {
        return Ok(Vec::new());
    };
    let w = p.window();
    let pts = p.points();
    let mut bins = vec![0.0; grid.len() + 1];
    for_each_close_pair(pts, rmax, |i, j, d| {
        let area = w.shift_intersection_area(pts[i].sub(&pts[j])).unwrap_or(0.0);
        if area > 0.0 {
            bins[grid.partition_point(|&r| r < d)] += 2.0 / area;
        }
    });
    let n = pts.len() as f64;
    let scale = w.area() * w.area() / (n * (n - 1.0));
    let mut acc = 0.0;
    Ok(bins[..grid.len()]
        .iter()
        .map(|b| {
            acc += b;
            scale * acc
        })
        .collect())
}

/// Translation-corrected estimate of K on `grid`. Rectangular windows only.
pub fn k_hat(p: &PointPattern, grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(grid)?;
    let values = k_values(p, grid)?;
    SummaryCurve::new(grid.to_vec(), values, Statistic::K, CurveKind::Empirical)
}

fn pcf_values(p: &PointPattern, grid: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    require_points(p, 2)?;
    require_rect(p.window())?;
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(invalid(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let h = 0.5 * bandwidth;
    let Some(&rmax) = grid.last() else {
        return Ok(Vec::new());
    };
    if grid[0] <= h {
        return Err(invalid(format!(
            "pair correlation grid must start above half the bandwidth ({h}), got {}",
            grid[0]
        )));
    }
    let w = p.window();
    let pts = p.points();
    let mut sums = vec![0.0; grid.len()];
    let norm = 3.0 / (4.0 * h);
    for_each_close_pair(pts, rmax + h, |i, j, d| {
        let area = w.shift_intersection_area(pts[i].sub(&pts[j])).unwrap_or(0.0);
        if area <= 0.0 {
            return;
        }
        let lo = grid.partition_point(|&r| r < d - h);
        let hi = grid.partition_point(|&r| r <= d + h);
        for k in lo..hi {
            let t = (grid[k] - d) / h;
            sums[k] += 2.0 * norm * (1.0 - t * t) / area;
        }
    });
    let n = pts.len() as f64;
    let scale = w.area() * w.area() / (n * (n - 1.0));
    Ok(sums
        .iter()
        .zip(grid)
        .map(|(s, r)| scale * s / (2.0 * PI * r))
        .collect())
}

/// Translation-corrected kernel estimate of the pair correlation function,
/// Epanechnikov kernel supported on `[-bandwidth/2, bandwidth/2]`. Defaults to
/// [`default_pcf_bandwidth`].
pub fn pcf_hat(p: &PointPattern, grid: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    check_grid(grid)?;
    require_points(p, 2)?;
    let b = bandwidth.unwrap_or_else(|| default_pcf_bandwidth(p));
    let values = pcf_values(p, grid, b)?;
    SummaryCurve::new(grid.to_vec(), values, Statistic::Pcf, CurveKind::Empirical)
}

/// Border-corrected distribution estimate from `(distance, boundary distance)`
/// pairs: among sites with boundary distance ≥ r, the fraction with distance ≤ r.
/// NaN where no site qualifies.
fn border_corrected(sites: impl Iterator<Item = (f64, f64)>, grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let mut num = vec![0i64; m + 1];
    let mut den = vec![0i64; m + 1];
    for (d, b) in sites {
        let end = grid.partition_point(|&r| r <= b);
        den[0] += 1;
        den[end] -= 1;
        let start = grid.partition_point(|&r| r < d);
        if start < end {
            num[start] += 1;
            num[end] -= 1;
        }
    }
    let (mut nu, mut de) = (0i64, 0i64);
    (0..m)
        .map(|k| {
            nu += num[k];
            de += den[k];
            if de > 0 {
                nu as f64 / de as f64
            } else {
                f64::NAN
            }
        })
        .collect()
}

fn test_lattice(w: &Window) -> Vec<Point> {
    let h = w.shorter_side() / F_LATTICE_SIZE as f64;
    let (x0, x1, y0, y1) = w.bounding_box();
    let nx = (((x1 - x0) / h).floor() as usize).max(1);
    let ny = (((y1 - y0) / h).floor() as usize).max(1);
    let ox = x0 + 0.5 * ((x1 - x0) - (nx - 1) as f64 * h);
    let oy = y0 + 0.5 * ((y1 - y0) - (ny - 1) as f64 * h);
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let u = Point::new(ox + i as f64 * h, oy + j as f64 * h);
            if w.contains(&u) {
                pts.push(u);
            }
        }
    }
    pts
}

fn f_values(p: &PointPattern, grid: &[f64]) -> Vec<f64> {
    let w = p.window();
    let index = CellGrid::new(p.points(), w.bounding_box());
    let lattice = test_lattice(w);
    border_corrected(
        lattice
            .iter()
            .map(|u| (index.nearest_distance(u, None), w.boundary_distance(u))),
        grid,
    )
}

fn g_values(p: &PointPattern, grid: &[f64]) -> Result<Vec<f64>> {
    require_points(p, 2)?;
    let w = p.window();
    let pts = p.points();
    let index = CellGrid::new(pts, w.bounding_box());
    Ok(border_corrected(
        pts.iter()
            .enumerate()
            .map(|(i, x)| (index.nearest_distance(x, Some(i)), w.boundary_distance(x))),
        grid,
    ))
}

fn j_values(p: &PointPattern, grid: &[f64]) -> Result<Vec<f64>> {
    let g = g_values(p, grid)?;
    let f = f_values(p, grid);
    Ok(f.iter()
        .zip(&g)
        .map(|(&f, &g)| if f < 1.0 { (1.0 - g) / (1.0 - f) } else { f64::NAN })
        .collect())
}

fn defined_only(grid: &[f64], values: Vec<f64>, statistic: Statistic) -> Result<SummaryCurve> {
    let (r, v): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(&r, v)| (r, v))
        .unzip();
    let dropped = grid.len() - r.len();
    let mut curve = SummaryCurve::new(r, v, statistic, CurveKind::Empirical)?;
    if curve.is_empty() && dropped > 0 {
        curve.warning = Some(format!("{statistic} undefined at every grid point"));
    }
    Ok(curve)
}

/// Border-corrected empty-space function on a lattice of spacing
/// `shorter side / 128`. Grid points with no admissible test point are dropped.
pub fn f_hat(p: &PointPattern, grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(grid)?;
    defined_only(grid, f_values(p, grid), Statistic::F)
}

/// Border-corrected nearest-neighbour distance distribution.
pub fn g_hat(p: &PointPattern, grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(grid)?;
    defined_only(grid, g_values(p, grid)?, Statistic::G)
}

/// `(1 − Ĝ)/(1 − F̂)`, kept only where both are defined and `F̂ < 1`. An
/// empty result carries a warning.
pub fn j_hat(p: &PointPattern, grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(grid)?;
    defined_only(grid, j_values(p, grid)?, Statistic::J)
}

/// Values of an empirical statistic at every grid point, NaN where undefined.
/// Used where curves from several patterns must share one grid.
pub fn statistic_values(
    p: &PointPattern,
    statistic: Statistic,
    grid: &[f64],
    pcf_bandwidth: Option<f64>,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    match statistic {
        Statistic::K => k_values(p, grid),
        Statistic::Pcf => {
            require_points(p, 2)?;
            pcf_values(p, grid, pcf_bandwidth.unwrap_or_else(|| default_pcf_bandwidth(p)))
        }
        Statistic::F => Ok(f_values(p, grid)),
        Statistic::G => g_values(p, grid),
        Statistic::J => j_values(p, grid),
    }
}
