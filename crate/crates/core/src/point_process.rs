//! Base-station point processes: Poisson, Matérn cluster, Matérn hard-core
//! (type II) and the randomly translated triangular lattice.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{GridIndex, Point, Topology, Window};
use crate::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessModel {
    Ppp {
        lambda: f64,
    },
    /// Parents at rate `parent_lambda`, Poisson(`mean_daughters`) daughters
    /// uniform in the disk of radius `cluster_radius` around each parent.
    Mcp {
        parent_lambda: f64,
        mean_daughters: f64,
        cluster_radius: f64,
    },
    /// Type-II hard-core thinning of a Poisson process of rate `base_lambda`.
    Mhp2 {
        base_lambda: f64,
        hard_core: f64,
    },
    TriLattice {
        lambda: f64,
    },
}

impl ProcessModel {
    /// Parameter set used throughout the simulations: all four models have
    /// intensity (close to) 0.1.
    pub const PPP_REFERENCE: Self = Self::Ppp { lambda: 0.1 };
    pub const MCP_REFERENCE: Self = Self::Mcp {
        parent_lambda: 0.01,
        mean_daughters: 10.0,
        cluster_radius: 5.0,
    };
    pub const MHP_REFERENCE: Self = Self::Mhp2 {
        base_lambda: 0.263,
        hard_core: 1.7,
    };
    pub const LATTICE_REFERENCE: Self = Self::TriLattice { lambda: 0.1 };

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match *self {
            Self::Ppp { lambda } | Self::TriLattice { lambda } => positive("lambda", lambda),
            Self::Mcp {
                parent_lambda,
                mean_daughters,
                cluster_radius,
            } => {
                positive("parent_lambda", parent_lambda)?;
                positive("mean_daughters", mean_daughters)?;
                positive("cluster_radius", cluster_radius)
            }
            Self::Mhp2 {
                base_lambda,
                hard_core,
            } => {
                positive("base_lambda", base_lambda)?;
                positive("hard_core", hard_core)
            }
        }
    }

    /// Short name used in CSV tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ppp { .. } => "ppp",
            Self::Mcp { .. } => "mcp",
            Self::Mhp2 { .. } => "mhp",
            Self::TriLattice { .. } => "lattice",
        }
    }

    /// Range over which points interact; the window must be at least twice
    /// this on every side.
    fn interaction_range(&self) -> f64 {
        match *self {
            Self::Mcp { cluster_radius, .. } => cluster_radius,
            Self::Mhp2 { hard_core, .. } => hard_core,
            _ => 0.0,
        }
    }

    pub fn check_window(&self, window: &Window) -> Result<()> {
        window.validate()?;
        let range = self.interaction_range();
        if window.width.min(window.height) < 2.0 * range {
            return Err(Error::WindowTooSmall {
                width: window.width,
                height: window.height,
                range,
            });
        }
        Ok(())
    }
}

/// Intensity (points per unit area) of the model.
pub fn intensity_of(model: &ProcessModel) -> f64 {
    match *model {
        ProcessModel::Ppp { lambda } | ProcessModel::TriLattice { lambda } => lambda,
        ProcessModel::Mcp {
            parent_lambda,
            mean_daughters,
            ..
        } => parent_lambda * mean_daughters,
        ProcessModel::Mhp2 {
            base_lambda,
            hard_core,
        } => {
            let disk = PI * hard_core * hard_core;
            -(-base_lambda * disk).exp_m1() / disk
        }
    }
}

/// Triangular-lattice spacing for density `lambda`.
pub fn lattice_spacing(lambda: f64) -> f64 {
    (2.0 / (3f64.sqrt() * lambda)).sqrt()
}

/// One realization of a model inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    pub points: Vec<Point>,
    pub window: Window,
    pub model: ProcessModel,
    /// Seed the pattern was drawn from, when it came from [`sample_seeded`].
    pub seed: Option<u64>,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest_point<R: Rng + ?Sized>(&self, z: Point, rng: &mut R) -> Result<(usize, f64)> {
        let lambda = (self.points.len() as f64 / self.window.area()).max(f64::MIN_POSITIVE);
        GridIndex::build(&self.points, &self.window, lambda.powf(-0.5)).nearest(
            &self.points,
            z,
            rng,
        )
    }

    /// Smallest pairwise distance under the window metric. `None` for fewer
    /// than two points.
    pub fn min_pair_distance(&self) -> Option<f64> {
        let n = self.points.len();
        if n < 2 {
            return None;
        }
        let cell = (self.window.area() / n as f64).sqrt();
        let idx = GridIndex::build(&self.points, &self.window, cell);
        let (cw, ch) = idx.cell_size();
        let mut best = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            idx.for_each_near(p, 1, |j| {
                if j != i {
                    best = best.min(self.window.distance(p, self.points[j]));
                }
            });
        }
        // the one-ring search is exact only below one cell width
        if best >= cw.min(ch) {
            for i in 0..n {
                for j in i + 1..n {
                    best = best.min(self.window.distance(self.points[i], self.points[j]));
                }
            }
        }
        Some(best)
    }
}

/// Scratch buffers reused across realizations.
#[derive(Debug, Default)]
pub struct SamplerScratch {
    base: Vec<Point>,
    marks: Vec<f64>,
    alive: Vec<bool>,
    cell_start: Vec<usize>,
    sorted: Vec<CellEntry>,
}

#[derive(Debug, Clone, Copy, Default)]
struct CellEntry {
    x: f64,
    y: f64,
    mark: f64,
    index: usize,
}

/// Draws one realization.
pub fn sample<R: Rng + ?Sized>(
    model: &ProcessModel,
    window: &Window,
    rng: &mut R,
) -> Result<PointPattern> {
    let mut points = Vec::new();
    sample_into(
        model,
        window,
        rng,
        &mut points,
        &mut SamplerScratch::default(),
    )?;
    Ok(PointPattern {
        points,
        window: *window,
        model: *model,
        seed: None,
    })
}

/// Draws one realization from stream 0 of `seed`.
pub fn sample_seeded(model: &ProcessModel, window: &Window, seed: u64) -> Result<PointPattern> {
    let mut rng = stream::stream(seed, 0);
    let mut p = sample(model, window, &mut rng)?;
    p.seed = Some(seed);
    Ok(p)
}

/// Allocation-free variant of [`sample`]: clears `out` and fills it.
pub fn sample_into<R: Rng + ?Sized>(
    model: &ProcessModel,
    window: &Window,
    rng: &mut R,
    out: &mut Vec<Point>,
    scratch: &mut SamplerScratch,
) -> Result<()> {
    model.validate()?;
    model.check_window(window)?;
    out.clear();
    match *model {
        ProcessModel::Ppp { lambda } => {
            uniform_poisson(lambda, window, 0.0, rng, out);
        }
        ProcessModel::Mcp {
            parent_lambda,
            mean_daughters,
            cluster_radius,
        } => sample_mcp(
            parent_lambda,
            mean_daughters,
            cluster_radius,
            window,
            rng,
            out,
            scratch,
        ),
        ProcessModel::Mhp2 {
            base_lambda,
            hard_core,
        } => sample_mhp2(base_lambda, hard_core, window, rng, out, scratch),
        ProcessModel::TriLattice { lambda } => sample_lattice(lambda, window, rng, out),
    }
    Ok(())
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    d.sample(rng) as usize
}

/// Poisson points on the window grown by `guard` on each side (coordinates
/// may then be negative).
fn uniform_poisson<R: Rng + ?Sized>(
    lambda: f64,
    window: &Window,
    guard: f64,
    rng: &mut R,
    out: &mut Vec<Point>,
) {
    let w = window.width + 2.0 * guard;
    let h = window.height + 2.0 * guard;
    let n = poisson_count(lambda * w * h, rng);
    out.reserve(n);
    for _ in 0..n {
        let x = rng.random::<f64>() * w - guard;
        let y = rng.random::<f64>() * h - guard;
        out.push(Point::new(x, y));
    }
}

fn sample_mcp<R: Rng + ?Sized>(
    parent_lambda: f64,
    mean_daughters: f64,
    radius: f64,
    window: &Window,
    rng: &mut R,
    out: &mut Vec<Point>,
    scratch: &mut SamplerScratch,
) {
    let torus = window.topology == Topology::Torus;
    let guard = if torus { 0.0 } else { radius };
    let parents = &mut scratch.base;
    parents.clear();
    uniform_poisson(parent_lambda, window, guard, rng, parents);
    for &c in parents.iter() {
        let k = poisson_count(mean_daughters, rng);
        for _ in 0..k {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let p = Point::new(c.x + r * phi.cos(), c.y + r * phi.sin());
            if torus {
                out.push(window.wrap(p));
            } else if window.contains(p) {
                out.push(p);
            }
        }
    }
}

fn sample_mhp2<R: Rng + ?Sized>(
    base_lambda: f64,
    hard_core: f64,
    window: &Window,
    rng: &mut R,
    out: &mut Vec<Point>,
    scratch: &mut SamplerScratch,
) {
    let torus = window.topology == Topology::Torus;
    let guard = if torus { 0.0 } else { hard_core };
    let base = &mut scratch.base;
    base.clear();
    uniform_poisson(base_lambda, window, guard, rng, base);
    let marks = &mut scratch.marks;
    marks.clear();
    marks.extend((0..base.len()).map(|_| rng.random::<f64>()));

    // index over the (possibly grown) sampling region, shifted to the origin
    let region = Window {
        width: window.width + 2.0 * guard,
        height: window.height + 2.0 * guard,
        topology: window.topology,
    };
    if !torus {
        for p in base.iter_mut() {
            p.x += guard;
            p.y += guard;
        }
    }
    hard_core_survivors(
        base,
        marks,
        &region,
        hard_core,
        (
            &mut scratch.alive,
            &mut scratch.cell_start,
            &mut scratch.sorted,
        ),
    );
    for (p, &keep) in base.iter().zip(scratch.alive.iter()) {
        if keep {
            let q = Point::new(p.x - guard, p.y - guard);
            if torus || window.contains(q) {
                out.push(q);
            }
        }
    }
}

type CellBuffers<'a> = (
    &'a mut Vec<bool>,
    &'a mut Vec<usize>,
    &'a mut Vec<CellEntry>,
);

/// Type II thinning: a point survives unless another point within `r`
/// (strictly) carries a smaller mark; mark ties go to the smaller index.
///
/// Points are bucketed into cells of side at least `r` and every close pair
/// is examined once, from a half stencil of neighbouring cells; on a torus
/// the wrapped neighbour cells carry an explicit period shift.
fn hard_core_survivors(
    points: &[Point],
    marks: &[f64],
    region: &Window,
    r: f64,
    bufs: CellBuffers<'_>,
) {
    let (alive, start, sorted) = bufs;
    let n = points.len();
    alive.clear();
    alive.resize(n, true);
    let nx = ((region.width / r).floor() as usize).max(1);
    let ny = ((region.height / r).floor() as usize).max(1);
    let (cw, ch) = (region.width / nx as f64, region.height / ny as f64);
    let cell = |p: Point| {
        let x = ((p.x / cw) as usize).min(nx - 1);
        let y = ((p.y / ch) as usize).min(ny - 1);
        y * nx + x
    };
    start.clear();
    start.resize(nx * ny + 1, 0);
    for &p in points {
        start[cell(p) + 1] += 1;
    }
    for c in 0..nx * ny {
        start[c + 1] += start[c];
    }
    sorted.clear();
    sorted.resize(n, CellEntry::default());
    let mut fill = start[..nx * ny].to_vec();
    for (i, &p) in points.iter().enumerate() {
        let c = cell(p);
        sorted[fill[c]] = CellEntry {
            x: p.x,
            y: p.y,
            mark: marks[i],
            index: i,
        };
        fill[c] += 1;
    }
    let torus = region.topology == Topology::Torus;
    let r2 = r * r;
    let mut check = |a: &CellEntry, b: &CellEntry, sx: f64, sy: f64| {
        let dx = a.x - b.x - sx;
        let dy = a.y - b.y - sy;
        if dx * dx + dy * dy < r2 {
            let b_loses = (b.mark, b.index) > (a.mark, a.index);
            alive[if b_loses { b.index } else { a.index }] = false;
        }
    };
    const HALF_STENCIL: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];
    for cy in 0..ny {
        for cx in 0..nx {
            let here = &sorted[start[cy * nx + cx]..start[cy * nx + cx + 1]];
            if here.is_empty() {
                continue;
            }
            for (k, a) in here.iter().enumerate() {
                for b in &here[k + 1..] {
                    check(a, b, 0.0, 0.0);
                }
            }
            for (ox, oy) in HALF_STENCIL {
                let (mut tx, mut ty) = (cx as isize + ox, cy as isize + oy);
                let (mut sx, mut sy) = (0.0, 0.0);
                if tx < 0 || tx >= nx as isize || ty >= ny as isize {
                    if !torus {
                        continue;
                    }
                    if tx < 0 {
                        tx += nx as isize;
                        sx = -region.width;
                    } else if tx >= nx as isize {
                        tx -= nx as isize;
                        sx = region.width;
                    }
                    if ty >= ny as isize {
                        ty -= ny as isize;
                        sy = region.height;
                    }
                }
                let t = ty as usize * nx + tx as usize;
                for a in here {
                    for b in &sorted[start[t]..start[t + 1]] {
                        check(a, b, sx, sy);
                    }
                }
            }
        }
    }
}

fn sample_lattice<R: Rng + ?Sized>(
    lambda: f64,
    window: &Window,
    rng: &mut R,
    out: &mut Vec<Point>,
) {
    let s = lattice_spacing(lambda);
    let h = s * 3f64.sqrt() / 2.0;
    // uniform offset over the s x 2h period rectangle (two lattice points)
    let ox = rng.random::<f64>() * s;
    let oy = rng.random::<f64>() * 2.0 * h;
    let rows = (window.height / h).ceil() as i64 + 2;
    let cols = (window.width / s).ceil() as i64 + 2;
    for j in -2..rows {
        let y = oy + j as f64 * h;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * s } else { 0.0 };
        for i in -2..cols {
            let p = Point::new(ox + shift + i as f64 * s, y);
            if window.contains(p) {
                out.push(p);
            }
        }
    }
}

/// Empirical contact-distance CCDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactCurve {
    pub radii: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub reps: usize,
}

/// Contact distances from the window centre, one per independent realization.
/// All samplers are torus-stationary or randomly translated, so the centre is
/// a uniformly distributed probe relative to the pattern.
pub fn contact_distances(
    model: &ProcessModel,
    window: &Window,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    model.check_window(window)?;
    let probe = window.center();
    stream::replicate(
        seed,
        reps,
        || (Vec::new(), SamplerScratch::default()),
        |(pts, scratch), rng| {
            sample_into(model, window, rng, pts, scratch)?;
            let mut best = f64::INFINITY;
            for &p in pts.iter() {
                best = best.min(window.distance_sq(p, probe));
            }
            Ok(best.sqrt())
        },
    )
}

/// Fraction of realizations with no point within distance `x` of the probe,
/// for each `x` in `radii` (ascending). An empty realization counts as having
/// no point at any distance.
pub fn empirical_contact_ccdf(
    model: &ProcessModel,
    window: &Window,
    radii: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ContactCurve> {
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("radii must be sorted ascending"));
    }
    if reps == 0 {
        return Err(invalid("reps must be > 0"));
    }
    let mut xi = contact_distances(model, window, reps, seed)?;
    xi.sort_by(f64::total_cmp);
    let ccdf = radii
        .iter()
        .map(|&x| {
            let at_most = xi.partition_point(|&d| d <= x);
            (reps - at_most) as f64 / reps as f64
        })
        .collect();
    Ok(ContactCurve {
        radii: radii.to_vec(),
        ccdf,
        reps,
    })
}
