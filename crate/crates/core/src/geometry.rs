//! Rectangular simulation windows, the toroidal metric, and a uniform-grid
//! index for nearest-point queries.
//!
//! Every sampler in the crate produces points inside `[0, width) x [0, height)`.
//! On a [`Topology::Torus`] window the opposite edges are identified, so the
//! distance between two points is the shortest one over the nine translated
//! copies of the second point.

use rand::Rng;
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Torus,
    /// Euclidean metric; samplers fill a guard band around the window so that
    /// intensities stay exact inside it.
    PlaneWithGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub width: f64,
    pub height: f64,
    pub topology: Topology,
}

impl Window {
    pub fn torus(width: f64, height: f64) -> Result<Self> {
        Self::new(width, height, Topology::Torus)
    }

    pub fn new(width: f64, height: f64, topology: Topology) -> Result<Self> {
        let w = Self {
            width,
            height,
            topology,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(invalid(format!(
                "window width must be > 0, got {}",
                self.width
            )));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(invalid(format!(
                "window height must be > 0, got {}",
                self.height
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.width, 0.5 * self.height)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x < self.width && p.y >= 0.0 && p.y < self.height
    }

    /// Maps any point into `[0, width) x [0, height)` by periodic wrapping.
    pub fn wrap(&self, p: Point) -> Point {
        Point::new(wrap_coord(p.x, self.width), wrap_coord(p.y, self.height))
    }

    /// Distance under this window's metric.
    #[inline]
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        self.distance_sq(p, q).sqrt()
    }

    #[inline]
    pub fn distance_sq(&self, p: Point, q: Point) -> f64 {
        let mut dx = (p.x - q.x).abs();
        let mut dy = (p.y - q.y).abs();
        if self.topology == Topology::Torus {
            dx = dx.min(self.width - dx);
            dy = dy.min(self.height - dy);
        }
        dx * dx + dy * dy
    }
}

#[inline]
fn wrap_coord(v: f64, len: f64) -> f64 {
    let r = v.rem_euclid(len);
    // rem_euclid can round up to `len` for tiny negative inputs
    if r >= len {
        0.0
    } else {
        r
    }
}

/// Shortest distance between `p` and the nine periodic copies of `q`.
pub fn torus_distance(p: Point, q: Point, w: &Window) -> f64 {
    let mut dx = (p.x - q.x).abs();
    let mut dy = (p.y - q.y).abs();
    dx = dx.min(w.width - dx);
    dy = dy.min(w.height - dy);
    dx.hypot(dy)
}

/// Index of the nearest point and its distance. Exact ties are broken
/// uniformly at random with `rng`, which is only consumed when a tie occurs.
pub fn nearest_point<R: Rng + ?Sized>(
    points: &[Point],
    window: &Window,
    z: Point,
    rng: &mut R,
) -> Result<(usize, f64)> {
    let mut best = NearestAcc::default();
    for (i, &p) in points.iter().enumerate() {
        best.offer(i, window.distance_sq(p, z), rng);
    }
    best.finish()
}

#[derive(Debug)]
struct NearestAcc {
    index: usize,
    d2: f64,
    ties: u32,
}

impl Default for NearestAcc {
    fn default() -> Self {
        Self {
            index: usize::MAX,
            d2: f64::INFINITY,
            ties: 0,
        }
    }
}

impl NearestAcc {
    #[inline]
    fn offer<R: Rng + ?Sized>(&mut self, i: usize, d2: f64, rng: &mut R) {
        if d2 < self.d2 {
            self.index = i;
            self.d2 = d2;
            self.ties = 1;
        } else if d2 == self.d2 {
            // reservoir sampling over the tied set
            self.ties += 1;
            if rng.random_range(0..self.ties) == 0 {
                self.index = i;
            }
        }
    }

    fn finish(self) -> Result<(usize, f64)> {
        if self.index == usize::MAX {
            Err(Error::EmptyPattern)
        } else {
            Ok((self.index, self.d2.sqrt()))
        }
    }
}

/// Uniform bucket grid over a window. Cell side is chosen close to a target
/// length (typically `lambda^{-1/2}` for nearest-point queries, or the
/// interaction radius for hard-core thinning).
#[derive(Debug, Clone)]
pub struct GridIndex {
    window: Window,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    // CSR layout: points of cell c are order[start[c]..start[c + 1]]
    start: Vec<usize>,
    order: Vec<usize>,
}

impl GridIndex {
    pub fn build(points: &[Point], window: &Window, target_cell: f64) -> Self {
        let target = if target_cell.is_finite() && target_cell > 0.0 {
            target_cell
        } else {
            window.width.max(window.height)
        };
        let nx = ((window.width / target).floor() as usize).clamp(1, 4096);
        let ny = ((window.height / target).floor() as usize).clamp(1, 4096);
        let cell_w = window.width / nx as f64;
        let cell_h = window.height / ny as f64;

        let mut counts = vec![0usize; nx * ny + 1];
        let cells: Vec<usize> = points
            .iter()
            .map(|p| {
                let c = cell_of(*p, nx, ny, cell_w, cell_h);
                counts[c + 1] += 1;
                c
            })
            .collect();
        for c in 0..nx * ny {
            counts[c + 1] += counts[c];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut order = vec![0usize; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            window: *window,
            nx,
            ny,
            cell_w,
            cell_h,
            start,
            order,
        }
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.cell_w, self.cell_h)
    }

    fn cell_points(&self, cx: usize, cy: usize) -> &[usize] {
        let c = cy * self.nx + cx;
        &self.order[self.start[c]..self.start[c + 1]]
    }

    /// Calls `f(i)` for every point whose cell lies within `rings` cells of
    /// the cell containing `z` (Chebyshev distance, wrapped on a torus).
    /// Each cell is visited at most once.
    pub fn for_each_near(&self, z: Point, rings: usize, mut f: impl FnMut(usize)) {
        let torus = self.window.topology == Topology::Torus;
        let zc = self.window.wrap(z);
        let cx = ((zc.x / self.cell_w) as isize).min(self.nx as isize - 1);
        let cy = ((zc.y / self.cell_h) as isize).min(self.ny as isize - 1);
        let r = rings as isize;
        let (x0, x1) = axis_span(cx, r, self.nx, torus);
        let (y0, y1) = axis_span(cy, r, self.ny, torus);
        for yv in y0..=y1 {
            let y = yv.rem_euclid(self.ny as isize) as usize;
            for xv in x0..=x1 {
                let x = xv.rem_euclid(self.nx as isize) as usize;
                for &i in self.cell_points(x, y) {
                    f(i);
                }
            }
        }
    }

    /// Nearest point to `z` among `points` (the slice the index was built
    /// from). Ties are broken uniformly at random.
    pub fn nearest<R: Rng + ?Sized>(
        &self,
        points: &[Point],
        z: Point,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        if points.is_empty() {
            return Err(Error::EmptyPattern);
        }
        let w = &self.window;
        let zc = if w.topology == Topology::Torus {
            w.wrap(z)
        } else {
            z
        };
        let cx = (zc.x / self.cell_w).floor() as isize;
        let cy = (zc.y / self.cell_h).floor() as isize;
        let cell = self.cell_w.min(self.cell_h);
        let max_ring = self.nx.max(self.ny) as isize + 1;

        let mut best = NearestAcc::default();
        let mut k: isize = 0;
        loop {
            // once the ring spans the whole grid in either direction, the
            // wrapped ring would revisit cells; finish with a full scan
            if w.topology == Topology::Torus
                && (2 * k + 1 >= self.nx as isize || 2 * k + 1 >= self.ny as isize)
            {
                return nearest_point(points, w, z, rng);
            }
            if k > max_ring {
                break;
            }
            self.visit_ring(cx, cy, k, |i| {
                best.offer(i, w.distance_sq(points[i], z), rng)
            });
            // anything in ring k + 1 is at least k cells away
            let reach = k as f64 * cell;
            if best.d2 < reach * reach {
                break;
            }
            k += 1;
        }
        best.finish()
    }

    fn visit_ring(&self, cx: isize, cy: isize, k: isize, mut f: impl FnMut(usize)) {
        let torus = self.window.topology == Topology::Torus;
        let mut visit = |x: isize, y: isize| {
            let (x, y) = if torus {
                (
                    x.rem_euclid(self.nx as isize) as usize,
                    y.rem_euclid(self.ny as isize) as usize,
                )
            } else {
                if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                    return;
                }
                (x as usize, y as usize)
            };
            for &i in self.cell_points(x, y) {
                f(i);
            }
        };
        if k == 0 {
            visit(cx, cy);
            return;
        }
        for x in cx - k..=cx + k {
            visit(x, cy - k);
            visit(x, cy + k);
        }
        for y in cy - k + 1..cy + k {
            visit(cx - k, y);
            visit(cx + k, y);
        }
    }
}

/// Inclusive range of cell coordinates along one axis; values outside
/// `0..n` are wrapped by the caller (only possible on a torus).
fn axis_span(c: isize, r: isize, n: usize, torus: bool) -> (isize, isize) {
    let n_i = n as isize;
    if torus {
        if 2 * r + 1 >= n_i {
            (0, n_i - 1)
        } else {
            (c - r, c + r)
        }
    } else {
        ((c - r).max(0), (c + r).min(n_i - 1))
    }
}

#[inline]
fn cell_of(p: Point, nx: usize, ny: usize, cw: f64, ch: f64) -> usize {
    let x = ((p.x / cw) as usize).min(nx - 1);
    let y = ((p.y / ch) as usize).min(ny - 1);
    y * nx + x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> Window {
        Window::torus(100.0, 100.0).unwrap()
    }

    #[test]
    fn torus_distance_examples() {
        let w = square();
        assert_eq!(
            torus_distance(Point::new(0.0, 0.0), Point::new(0.0, 0.0), &w),
            0.0
        );
        assert!(
            (torus_distance(Point::new(1.0, 1.0), Point::new(99.0, 1.0), &w) - 2.0).abs() < 1e-12
        );
        let far = torus_distance(Point::new(0.0, 0.0), Point::new(50.0, 50.0), &w);
        assert!((far - 50.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((far - 70.711).abs() < 1e-3);
    }

    #[test]
    fn invalid_window_rejected() {
        assert!(Window::torus(0.0, 1.0).is_err());
        assert!(Window::torus(1.0, -2.0).is_err());
        assert!(Window::torus(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn wrap_stays_inside() {
        let w = square();
        for v in [-1e-18, -0.5, 100.0, 250.3, -399.9] {
            let p = w.wrap(Point::new(v, v));
            assert!(w.contains(p), "{v} -> {p:?}");
        }
    }

    #[test]
    fn nearest_point_examples() {
        let w = square();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = Point::new(0.0, 0.0);
        assert_eq!(
            nearest_point(&[Point::new(1.0, 0.0)], &w, z, &mut rng).unwrap(),
            (0, 1.0)
        );
        let pts = [Point::new(2.0, 0.0), Point::new(0.0, 3.0)];
        assert_eq!(nearest_point(&pts, &w, z, &mut rng).unwrap(), (0, 2.0));
        assert_eq!(
            nearest_point(&[], &w, z, &mut rng),
            Err(Error::EmptyPattern)
        );
    }

    #[test]
    fn exact_tie_is_fair() {
        let w = square();
        let pts = [Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let z = Point::new(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let idx = GridIndex::build(&pts, &w, 3.0);
        let draws = 10_000;
        let mut first = 0;
        let mut first_grid = 0;
        for _ in 0..draws {
            if nearest_point(&pts, &w, z, &mut rng).unwrap().0 == 0 {
                first += 1;
            }
            if idx.nearest(&pts, z, &mut rng).unwrap().0 == 0 {
                first_grid += 1;
            }
        }
        for c in [first, first_grid] {
            let f = c as f64 / draws as f64;
            assert!((f - 0.5).abs() < 0.02, "tie frequency {f}");
        }
    }

    #[test]
    fn grid_index_plane_matches_scan() {
        let w = Window::new(30.0, 20.0, Topology::PlaneWithGuard).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..50)
            .map(|_| Point::new(rng.random::<f64>() * 30.0, rng.random::<f64>() * 20.0))
            .collect();
        let idx = GridIndex::build(&pts, &w, 2.0);
        for _ in 0..200 {
            let z = Point::new(rng.random::<f64>() * 30.0, rng.random::<f64>() * 20.0);
            let a = idx.nearest(&pts, z, &mut rng).unwrap();
            let b = nearest_point(&pts, &w, z, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }
}
