//! Conservative rasterisation of manifold polylines.
//!
//! Cells are indexed `(i, j)` with `i` the column from `x_min` and `j` the row
//! from `y_min`; a coordinate exactly on an interior cell edge belongs to the
//! cell above/right of it, the window's upper edges belong to the last cell.

use serde::Serialize;

use super::grow::ManifoldArc;
use crate::cover::CoverPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RasterGrid {
    pub width: usize,
    pub height: usize,
}

impl RasterGrid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("raster grid must be at least 1x1".into()));
        }
        Ok(RasterGrid { width, height })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) && x_min < x_max && y_min < y_max;
        if !ok {
            return Err(Error::InvalidInput("window needs finite bounds with min < max".into()));
        }
        Ok(Window { x_min, x_max, y_min, y_max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterSource {
    pub arcs: usize,
    pub arclengths: Vec<f64>,
    pub x_period: f64,
    pub y_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityRaster {
    pub grid: RasterGrid,
    pub window: Window,
    #[serde(skip)]
    occupancy: Vec<u64>,
    pub source: RasterSource,
    pub cell_width: f64,
    pub cell_height: f64,
    /// Larger of the two cell side lengths.
    pub cell_size: f64,
}

impl InstabilityRaster {
    pub fn empty(grid: RasterGrid, window: Window) -> Self {
        let cell_width = (window.x_max - window.x_min) / grid.width as f64;
        let cell_height = (window.y_max - window.y_min) / grid.height as f64;
        InstabilityRaster {
            grid,
            window,
            occupancy: vec![0; (grid.width * grid.height).div_ceil(64)],
            source: RasterSource { arcs: 0, arclengths: Vec::new(), x_period: 1.0, y_period: None },
            cell_width,
            cell_height,
            cell_size: cell_width.max(cell_height),
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.grid.width + i
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let k = self.index(i, j);
        self.occupancy[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        let k = self.index(i, j);
        self.occupancy[k / 64] |= 1 << (k % 64);
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.grid.width;
        (0..self.grid.width * self.grid.height)
            .filter(move |&k| self.occupancy[k / 64] >> (k % 64) & 1 == 1)
            .map(move |k| (k % w, k / w))
    }

    /// True if every cell set here is also set in `other`.
    pub fn is_subset_of(&self, other: &InstabilityRaster) -> bool {
        self.grid == other.grid && self.occupancy.iter().zip(&other.occupancy).all(|(a, b)| a & !b == 0)
    }

    /// Union with the four edge neighbours of every occupied cell.
    pub fn dilated(&self) -> InstabilityRaster {
        let mut out = self.clone();
        let (w, h) = (self.grid.width, self.grid.height);
        for (i, j) in self.occupied() {
            if i > 0 {
                out.set(i - 1, j);
            }
            if i + 1 < w {
                out.set(i + 1, j);
            }
            if j > 0 {
                out.set(i, j - 1);
            }
            if j + 1 < h {
                out.set(i, j + 1);
            }
        }
        out
    }

    /// Centre of cell `(i, j)` in window coordinates.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.window.x_min + (i as f64 + 0.5) * self.cell_width,
            self.window.y_min + (j as f64 + 0.5) * self.cell_height,
        )
    }

    /// Cell containing the point after reduction by the raster's periods, if
    /// it falls inside the window.
    pub fn cell_of(&self, w: CoverPoint) -> Option<(usize, usize)> {
        let x = wrap_into(w.x, self.window.x_min, self.window.x_max, Some(self.source.x_period));
        let y = wrap_into(w.y, self.window.y_min, self.window.y_max, self.source.y_period);
        let (x, y) = (x?, y?);
        let i = (((x - self.window.x_min) / self.cell_width).floor() as usize).min(self.grid.width - 1);
        let j = (((y - self.window.y_min) / self.cell_height).floor() as usize).min(self.grid.height - 1);
        Some((i, j))
    }

    /// Euclidean distance in cells from the cell of `w` to the nearest
    /// occupied cell.
    pub fn distance_in_cells(&self, w: CoverPoint) -> Option<f64> {
        let (i, j) = self.cell_of(w)?;
        self.occupied()
            .map(|(a, b)| {
                let dx = a as f64 - i as f64;
                let dy = b as f64 - j as f64;
                dx.hypot(dy)
            })
            .min_by(f64::total_cmp)
    }

    pub(crate) fn rows_top_down(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..self.grid.height).rev().map(move |j| (0..self.grid.width).map(|i| self.get(i, j)).collect())
    }

    fn draw_segment(&mut self, a: CoverPoint, b: CoverPoint) {
        let x_shifts =
            shifts(a.x.min(b.x), a.x.max(b.x), self.window.x_min, self.window.x_max, Some(self.source.x_period));
        let y_shifts = shifts(a.y.min(b.y), a.y.max(b.y), self.window.y_min, self.window.y_max, self.source.y_period);
        for &sx in &x_shifts {
            for &sy in &y_shifts {
                let p = (a.x + sx, a.y + sy);
                let q = (b.x + sx, b.y + sy);
                if let Some((p, q)) = clip(p, q, &self.window) {
                    self.trace(p, q);
                }
            }
        }
    }

    /// Grid traversal of a clipped segment, visiting every cell it touches.
    fn trace(&mut self, p: (f64, f64), q: (f64, f64)) {
        let (w, h) = (self.grid.width, self.grid.height);
        let x0 = (p.0 - self.window.x_min) / self.cell_width;
        let y0 = (p.1 - self.window.y_min) / self.cell_height;
        let x1 = (q.0 - self.window.x_min) / self.cell_width;
        let y1 = (q.1 - self.window.y_min) / self.cell_height;
        let cell = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        let (mut i, mut j) = (cell(x0, w), cell(y0, h));
        let (i1, j1) = (cell(x1, w), cell(y1, h));
        let (dx, dy) = (x1 - x0, y1 - y0);
        let step_i: isize = if dx > 0.0 { 1 } else { -1 };
        let step_j: isize = if dy > 0.0 { 1 } else { -1 };
        let mut t_x = if dx > 0.0 {
            (i as f64 + 1.0 - x0) / dx
        } else if dx < 0.0 {
            (x0 - i as f64) / -dx
        } else {
            f64::INFINITY
        };
        let mut t_y = if dy > 0.0 {
            (j as f64 + 1.0 - y0) / dy
        } else if dy < 0.0 {
            (y0 - j as f64) / -dy
        } else {
            f64::INFINITY
        };
        let dt_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
        let dt_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
        self.set(i, j);
        let mut guard = w + h + 4;
        while (i, j) != (i1, j1) && t_x.min(t_y) <= 1.0 && guard > 0 {
            guard -= 1;
            if t_x < t_y {
                let ni = i as isize + step_i;
                if ni < 0 || ni >= w as isize {
                    break;
                }
                i = ni as usize;
                t_x += dt_x;
            } else {
                let nj = j as isize + step_j;
                if nj < 0 || nj >= h as isize {
                    break;
                }
                j = nj as usize;
                t_y += dt_y;
            }
            self.set(i, j);
        }
        self.set(i1, j1);
    }
}

fn wrap_into(v: f64, lo: f64, hi: f64, period: Option<f64>) -> Option<f64> {
    match period {
        Some(p) => {
            let r = lo + (v - lo).rem_euclid(p);
            (r <= hi).then_some(r)
        }
        None => (lo..=hi).contains(&v).then_some(v),
    }
}

/// Translates `k·period` of the interval `[a, b]` that meet `[lo, hi]`.
fn shifts(a: f64, b: f64, lo: f64, hi: f64, period: Option<f64>) -> Vec<f64> {
    match period {
        None => vec![0.0],
        Some(p) => {
            let k0 = ((lo - b) / p).ceil() as i64;
            let k1 = ((hi - a) / p).floor() as i64;
            (k0..=k1).map(|k| k as f64 * p).collect()
        }
    }
}

/// Liang-Barsky clipping against the closed window.
fn clip(p: (f64, f64), q: (f64, f64), win: &Window) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (den, num) in [(-dx, p.0 - win.x_min), (dx, win.x_max - p.0), (-dy, p.1 - win.y_min), (dy, win.y_max - p.1)] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some(((p.0 + t0 * dx, p.1 + t0 * dy), (p.0 + t1 * dx, p.1 + t1 * dy)))
}

/// Rasterise all arcs with `x` taken modulo 1.
pub fn rasterize(arcs: &[ManifoldArc], grid: RasterGrid, window: Window) -> InstabilityRaster {
    rasterize_periodic(arcs, grid, window, None)
}

/// Rasterise with `x` modulo 1 and optionally `y` modulo `y_period` (the
/// torus picture of the standard map).
pub fn rasterize_periodic(
    arcs: &[ManifoldArc],
    grid: RasterGrid,
    window: Window,
    y_period: Option<f64>,
) -> InstabilityRaster {
    let mut r = InstabilityRaster::empty(grid, window);
    r.source = RasterSource {
        arcs: arcs.len(),
        arclengths: arcs.iter().map(|a| a.arclength).collect(),
        x_period: 1.0,
        y_period,
    };
    for arc in arcs {
        match arc.polyline.len() {
            0 => {}
            1 => r.draw_segment(arc.polyline[0], arc.polyline[0]),
            _ => {
                for s in arc.polyline.windows(2) {
                    r.draw_segment(s[0], s[1]);
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Stability;
    use crate::orbits::PeriodicOrbit;
    use crate::systems::{standard_map, StandardMapParams};
    use proptest::prelude::*;

    fn anchor() -> PeriodicOrbit {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap()
    }

    fn arc(points: &[(f64, f64)]) -> ManifoldArc {
        let pts = points.iter().map(|&(x, y)| CoverPoint { x, y }).collect();
        ManifoldArc::from_polyline(anchor(), Stability::Unstable, pts)
    }

    fn unit() -> (RasterGrid, Window) {
        (RasterGrid::new(10, 10).unwrap(), Window::new(0.0, 1.0, 0.0, 1.0).unwrap())
    }

    #[test]
    fn horizontal_segment_fills_one_row() {
        let (g, w) = unit();
        let r = rasterize(&[arc(&[(0.0, 0.5), (1.0, 0.5)])], g, w);
        assert_eq!(r.count(), 10);
        assert!((0..10).all(|i| r.get(i, 5)));
    }

    #[test]
    fn diagonal_touches_the_supercover() {
        let (g, w) = unit();
        let r = rasterize(&[arc(&[(0.05, 0.05), (0.95, 0.95)])], g, w);
        assert!((0..10).all(|i| r.get(i, i)));
    }

    #[test]
    fn outside_window_is_empty() {
        let (g, w) = unit();
        let r = rasterize(&[arc(&[(0.1, 2.0), (0.9, 3.0)])], g, w);
        assert_eq!(r.count(), 0);
    }

    #[test]
    fn x_wraps_with_period_one() {
        let (g, w) = unit();
        let a = rasterize(&[arc(&[(3.25, 0.15), (3.35, 0.15)])], g, w);
        let b = rasterize(&[arc(&[(0.25, 0.15), (0.35, 0.15)])], g, w);
        assert_eq!(a, InstabilityRaster { source: a.source.clone(), ..b });
    }

    #[test]
    fn y_period_folds_rows() {
        let (g, w) = unit();
        let r = rasterize_periodic(&[arc(&[(0.55, 4.55), (0.55, 4.56)])], g, w, Some(1.0));
        assert!(r.get(5, 5));
        assert_eq!(r.count(), 1);
    }

    #[test]
    fn dilation_grows_a_cross() {
        let (g, w) = unit();
        let r = rasterize(&[arc(&[(0.55, 0.55), (0.56, 0.56)])], g, w);
        assert_eq!(r.dilated().count(), 5);
    }

    proptest! {
        // Oracle: dense sampling along each segment only hits marked cells.
        #[test]
        fn sampled_points_are_covered(pts in prop::collection::vec((-0.5f64..2.5, -0.2f64..1.2), 2..8)) {
            let (g, w) = unit();
            let a = arc(&pts);
            let r = rasterize(std::slice::from_ref(&a), g, w);
            for s in a.polyline.windows(2) {
                for k in 0..=200 {
                    let t = k as f64 / 200.0;
                    let p = CoverPoint { x: s[0].x + t * (s[1].x - s[0].x), y: s[0].y + t * (s[1].y - s[0].y) };
                    if let Some((i, j)) = r.cell_of(p) {
                        // Points on a cell edge may be claimed by the neighbour.
                        let near = (i.saturating_sub(1)..=(i + 1).min(9))
                            .any(|ii| (j.saturating_sub(1)..=(j + 1).min(9)).any(|jj| r.get(ii, jj)));
                        prop_assert!(near);
                        let cx = (p.x - w.x_min).rem_euclid(1.0) * 10.0;
                        let cy = (p.y - w.y_min) * 10.0;
                        let interior = (cx - cx.round()).abs() > 1e-6 && (cy - cy.round()).abs() > 1e-6;
                        if interior {
                            prop_assert!(r.get(i, j), "cell {i},{j} missed");
                        }
                    }
                }
            }
        }

        #[test]
        fn prefixes_give_nested_rasters(pts in prop::collection::vec((-0.5f64..2.5, -0.2f64..1.2), 3..10), cut in 2usize..10) {
            let (g, w) = unit();
            let full = arc(&pts);
            let cut = cut.min(pts.len());
            let part = arc(&pts[..cut]);
            prop_assert!(rasterize(&[part], g, w).is_subset_of(&rasterize(&[full], g, w)));
        }
    }
}
