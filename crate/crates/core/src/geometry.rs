//! Planar points, observation windows and point patterns.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Observation window: an axis-aligned rectangle or a disc.
///
/// Boundaries are closed, so points lying exactly on the edge are inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Window {
    Rect {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    Disc {
        center: Point,
        radius: f64,
    },
}

impl Window {
    pub fn rect(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let w = Window::Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn disc(center: Point, radius: f64) -> Result<Self> {
        let w = Window::Disc { center, radius };
        w.validate()?;
        Ok(w)
    }

    /// Unit square `[0,1]²`.
    pub fn unit_square() -> Self {
        Window::Rect {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    /// Square `[0, side]²`.
    pub fn square(side: f64) -> Result<Self> {
        Self::rect(0.0, side, 0.0, side)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => {
                if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
                    return Err(invalid("rectangle bounds must be finite"));
                }
                if xmax <= xmin || ymax <= ymin {
                    return Err(invalid(format!(
                        "rectangle needs xmax > xmin and ymax > ymin, got [{xmin},{xmax}]x[{ymin},{ymax}]"
                    )));
                }
            }
            Window::Disc { center, radius } => {
                if !center.is_finite() || !radius.is_finite() {
                    return Err(invalid("disc centre and radius must be finite"));
                }
                if radius <= 0.0 {
                    return Err(invalid(format!("disc radius must be positive, got {radius}")));
                }
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (xmax - xmin) * (ymax - ymin),
            Window::Disc { radius, .. } => PI * radius * radius,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax,
            Window::Disc { center, radius } => p.dist2(&center) <= radius * radius,
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Point::new(0.5 * (xmin + xmax), 0.5 * (ymin + ymax)),
            Window::Disc { center, .. } => center,
        }
    }

    /// Bounding box as `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (xmin, xmax, ymin, ymax),
            Window::Disc { center, radius } => (
                center.x - radius,
                center.x + radius,
                center.y - radius,
                center.y + radius,
            ),
        }
    }

    /// Side lengths of the bounding box.
    pub fn side_lengths(&self) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.bounding_box();
        (x1 - x0, y1 - y0)
    }

    /// Shorter side of the bounding box (the diameter for a disc).
    pub fn shorter_side(&self) -> f64 {
        let (lx, ly) = self.side_lengths();
        lx.min(ly)
    }

    /// Radius of the smallest disc centred at [`Window::center`] containing the window.
    pub fn circumradius(&self) -> f64 {
        match *self {
            Window::Rect { .. } => {
                let (lx, ly) = self.side_lengths();
                0.5 * lx.hypot(ly)
            }
            Window::Disc { radius, .. } => radius,
        }
    }

    /// The window grown by `margin` on all sides.
    pub fn expanded(&self, margin: f64) -> Window {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Window::Rect {
                xmin: xmin - margin,
                xmax: xmax + margin,
                ymin: ymin - margin,
                ymax: ymax + margin,
            },
            Window::Disc { center, radius } => Window::Disc {
                center,
                radius: radius + margin,
            },
        }
    }

    /// Distance from an interior point to the window boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (p.x - xmin).min(xmax - p.x).min(p.y - ymin).min(ymax - p.y),
            Window::Disc { center, radius } => radius - p.dist(&center),
        }
    }

    /// Area of `W ∩ (W + h)`; only defined for rectangles.
    pub fn shift_intersection_area(&self, h: Point) -> Result<f64> {
        match *self {
            Window::Rect { .. } => {
                let (lx, ly) = self.side_lengths();
                Ok((lx - h.x.abs()).max(0.0) * (ly - h.y.abs()).max(0.0))
            }
            Window::Disc { .. } => Err(Error::UnsupportedWindow(
                "translation edge correction requires a rectangular window",
            )),
        }
    }

    pub fn translated(&self, v: Point) -> Window {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Window::Rect {
                xmin: xmin + v.x,
                xmax: xmax + v.x,
                ymin: ymin + v.y,
                ymax: ymax + v.y,
            },
            Window::Disc { center, radius } => Window::Disc {
                center: center.add(&v),
                radius,
            },
        }
    }

    /// The image of the window under `p ↦ s·p`, `s > 0`.
    pub fn scaled(&self, s: f64) -> Window {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Window::Rect {
                xmin: xmin * s,
                xmax: xmax * s,
                ymin: ymin * s,
                ymax: ymax * s,
            },
            Window::Disc { center, radius } => Window::Disc {
                center: center.scale(s),
                radius: radius * s,
            },
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Window::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => write!(f, "rect:{xmin},{xmax},{ymin},{ymax}"),
            Window::Disc { center, radius } => write!(f, "disc:{},{},{radius}", center.x, center.y),
        }
    }
}

/// Parses `rect:xmin,xmax,ymin,ymax` or `disc:cx,cy,r`.
impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("window `{s}`: expected rect:... or disc:...")))?;
        let nums = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("window `{s}`: bad number `{t}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match (kind.trim(), nums.as_slice()) {
            ("rect", &[x0, x1, y0, y1]) => Window::rect(x0, x1, y0, y1),
            ("disc", &[cx, cy, r]) => Window::disc(Point::new(cx, cy), r),
            _ => Err(invalid(format!(
                "window `{s}`: expected rect:xmin,xmax,ymin,ymax or disc:cx,cy,r"
            ))),
        }
    }
}

/// A finite point pattern observed in a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point>,
    window: Window,
}

impl PointPattern {
    /// Builds a pattern, checking that every point is finite and inside the window.
    pub fn new(points: Vec<Point>, window: Window) -> Result<Self> {
        window.validate()?;
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() || !window.contains(p) {
                return Err(Error::PointOutsideWindow {
                    index,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        Ok(Self { points, window })
    }

    /// Keeps only the points falling in `window`.
    pub fn restricted(points: impl IntoIterator<Item = Point>, window: Window) -> Self {
        let points = points.into_iter().filter(|p| window.contains(p)).collect();
        Self { points, window }
    }

    pub fn empty(window: Window) -> Self {
        Self {
            points: Vec::new(),
            window,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n / |W|`.
    pub fn intensity(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn translated(&self, v: Point) -> Self {
        Self {
            points: self.points.iter().map(|p| p.add(&v)).collect(),
            window: self.window.translated(v),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| p.scale(s)).collect(),
            window: self.window.scaled(s),
        }
    }
}
