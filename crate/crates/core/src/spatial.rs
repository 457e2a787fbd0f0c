//! Uniform cell grid for nearest-neighbour queries in a window.

use crate::geometry::Point;

pub(crate) struct CellGrid<'a> {
    points: &'a [Point],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> CellGrid<'a> {
    /// Builds a grid over the bounding box `(xmin, xmax, ymin, ymax)` with
    /// roughly two points per cell.
    pub(crate) fn new(points: &'a [Point], bbox: (f64, f64, f64, f64)) -> Self {
        let (x0, x1, y0, y1) = bbox;
        let (lx, ly) = ((x1 - x0).max(f64::MIN_POSITIVE), (y1 - y0).max(f64::MIN_POSITIVE));
        let n = points.len().max(1) as f64;
        let cell = (2.0 * lx * ly / n).sqrt().max(lx.max(ly) / 1024.0);
        let nx = ((lx / cell).ceil() as usize).max(1);
        let ny = ((ly / cell).ceil() as usize).max(1);
        let mut grid = Self {
            points,
            x0,
            y0,
            cell,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            order: vec![0; points.len()],
        };
        let ids: Vec<usize> = points.iter().map(|p| grid.cell_of(p)).collect();
        for &c in &ids {
            grid.starts[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in ids.iter().enumerate() {
            grid.order[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    fn coords(&self, p: &Point) -> (usize, usize) {
        let cx = ((p.x - self.x0) / self.cell).floor();
        let cy = ((p.y - self.y0) / self.cell).floor();
        (
            (cx.max(0.0) as usize).min(self.nx - 1),
            (cy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    fn cell_of(&self, p: &Point) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.nx + cx
    }

    /// Distance from `q` to the nearest indexed point other than `exclude`.
    /// `q` must lie in the bounding box. Returns infinity when there is none.
    pub(crate) fn nearest_distance(&self, q: &Point, exclude: Option<usize>) -> f64 {
        let (cx, cy) = self.coords(q);
        let mut best2 = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let (cx, cy, ring_i) = (cx as isize, cy as isize, ring as isize);
            for gy in (cy - ring_i)..=(cy + ring_i) {
                if gy < 0 || gy >= self.ny as isize {
                    continue;
                }
                let on_edge_row = gy == cy - ring_i || gy == cy + ring_i;
                let step = if on_edge_row { 1 } else { (2 * ring_i).max(1) };
                let mut gx = cx - ring_i;
                while gx <= cx + ring_i {
                    if gx >= 0 && gx < self.nx as isize {
                        let c = gy as usize * self.nx + gx as usize;
                        for &i in &self.order[self.starts[c]..self.starts[c + 1]] {
                            if Some(i) != exclude {
                                best2 = best2.min(self.points[i].dist2(q));
                            }
                        }
                    }
                    gx += step;
                }
            }
            // anything in ring+1 is at least ring·cell away
            let reach = ring as f64 * self.cell;
            if best2.is_finite() && best2 <= reach * reach {
                break;
            }
        }
        best2.sqrt()
    }
}
