//! Monte Carlo SINR kernel and the estimators built on it.
//!
//! Each replicate draws a fresh pattern, serves the probe from its nearest
//! point and sums the faded power of every other point as interference.
//! Replicates are therefore i.i.d. and binomial intervals apply directly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, Window};
use crate::point_process::{sample_into, ProcessModel, SamplerScratch};
use crate::propagation::{
    small_t_coefficient, FadingModel, FadingSampler, PathLossKind, PathLossModel,
};
use crate::stats::{wilson, MeanVar, Z95};
use crate::stream::{self, SeededStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub process: ProcessModel,
    pub path_loss: PathLossModel,
    pub fading: FadingModel,
    /// Noise power `W`.
    pub noise_w: f64,
    pub window: Window,
    pub seed: u64,
    /// Probe locations per pattern. Values above 1 are faster but yield
    /// correlated samples, so binomial intervals no longer hold.
    #[serde(default = "one")]
    pub probes_per_pattern: u32,
}

fn one() -> u32 {
    1
}

impl Scenario {
    /// Square 100 x 100 torus, non-singular `alpha = 4`, no noise.
    pub fn reference(process: ProcessModel, fading: FadingModel, seed: u64) -> Self {
        Self {
            process,
            path_loss: PathLossModel {
                kind: PathLossKind::NonSingular,
                alpha: 4.0,
            },
            fading,
            noise_w: 0.0,
            window: Window::torus(100.0, 100.0).expect("valid window"),
            seed,
            probes_per_pattern: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        self.process.check_window(&self.window)?;
        self.path_loss.validate()?;
        self.fading.validate()?;
        if !(self.noise_w >= 0.0 && self.noise_w.is_finite()) {
            return Err(invalid(format!(
                "noise power must be finite and >= 0, got {}",
                self.noise_w
            )));
        }
        if self.probes_per_pattern == 0 {
            return Err(invalid("probes_per_pattern must be >= 1"));
        }
        Ok(())
    }
}

/// Noise power giving mean SNR `snr_db` at unit distance: `1 / (2W)` for
/// non-singular loss, `1 / W` for singular loss.
pub fn noise_for_snr_db(snr_db: f64, kind: PathLossKind) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    match kind {
        PathLossKind::NonSingular => 1.0 / (2.0 * snr),
        PathLossKind::Singular => 1.0 / snr,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrSample {
    /// Contact distance to the serving point.
    pub xi: f64,
    pub h_serving: f64,
    pub interference: f64,
    /// `+inf` when neither interference nor noise is present.
    pub sinr: f64,
}

/// SINR at `probe` for a given pattern, drawing fresh fading for every point.
pub fn sinr_from_pattern<R: Rng + ?Sized>(
    points: &[Point],
    window: &Window,
    probe: Point,
    path_loss: &PathLossModel,
    fading: &FadingSampler,
    noise_w: f64,
    rng: &mut R,
) -> Result<SinrSample> {
    let mut d2 = Vec::with_capacity(points.len());
    evaluate(
        points, window, probe, path_loss, fading, noise_w, rng, &mut d2,
    )
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn evaluate<R: Rng + ?Sized>(
    points: &[Point],
    window: &Window,
    probe: Point,
    path_loss: &PathLossModel,
    fading: &FadingSampler,
    noise_w: f64,
    rng: &mut R,
    d2: &mut Vec<f64>,
) -> Result<SinrSample> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    d2.clear();
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    let mut ties = 0u32;
    for (i, &p) in points.iter().enumerate() {
        let v = window.distance_sq(p, probe);
        if v < best_d2 {
            best_d2 = v;
            best = i;
            ties = 1;
        } else if v == best_d2 {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
        d2.push(v);
    }
    let mut h_serving = 0.0;
    let mut interference = 0.0;
    for (i, &v) in d2.iter().enumerate() {
        let h = fading.sample(rng);
        if i == best {
            h_serving = h;
        } else {
            interference += h * path_loss.gain_sq(v);
        }
    }
    let signal = h_serving * path_loss.gain_sq(best_d2);
    let denom = noise_w + interference;
    let sinr = if denom > 0.0 {
        signal / denom
    } else {
        f64::INFINITY
    };
    Ok(SinrSample {
        xi: best_d2.sqrt(),
        h_serving,
        interference,
        sinr,
    })
}

/// Reusable per-worker state for drawing SINR samples.
#[derive(Debug)]
pub struct SinrKernel {
    scenario: Scenario,
    fading: FadingSampler,
    points: Vec<Point>,
    d2: Vec<f64>,
    scratch: SamplerScratch,
}

impl SinrKernel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario: *scenario,
            fading: FadingSampler::new(&scenario.fading)?,
            points: Vec::new(),
            d2: Vec::new(),
            scratch: SamplerScratch::default(),
        })
    }

    /// One sample from a fresh realization, probed at the window centre
    /// (uniform relative to the pattern, as every sampler is stationary on
    /// the torus or randomly translated).
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<SinrSample> {
        let s = &self.scenario;
        sample_into(
            &s.process,
            &s.window,
            rng,
            &mut self.points,
            &mut self.scratch,
        )?;
        evaluate(
            &self.points,
            &s.window,
            s.window.center(),
            &s.path_loss,
            &self.fading,
            s.noise_w,
            rng,
            &mut self.d2,
        )
    }

    /// `probes_per_pattern` samples from one realization, at uniform probe
    /// locations. Samples from the same pattern are correlated.
    pub fn draw_many<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        out: &mut Vec<SinrSample>,
    ) -> Result<()> {
        let s = self.scenario;
        if s.probes_per_pattern <= 1 {
            out.push(self.draw(rng)?);
            return Ok(());
        }
        sample_into(
            &s.process,
            &s.window,
            rng,
            &mut self.points,
            &mut self.scratch,
        )?;
        for _ in 0..s.probes_per_pattern {
            let probe = Point::new(
                rng.random::<f64>() * s.window.width,
                rng.random::<f64>() * s.window.height,
            );
            out.push(evaluate(
                &self.points,
                &s.window,
                probe,
                &s.path_loss,
                &self.fading,
                s.noise_w,
                rng,
                &mut self.d2,
            )?);
        }
        Ok(())
    }
}

/// One SINR sample from a fresh realization of the scenario.
pub fn sample_sinr<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<SinrSample> {
    SinrKernel::new(s)?.draw(rng)
}

/// `n` samples of a scenario, reproducible from its seed and independent of
/// the worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrBatch {
    pub scenario: Scenario,
    pub samples: Vec<SinrSample>,
}

pub fn simulate(s: &Scenario, n: usize) -> Result<SinrBatch> {
    SinrKernel::new(s)?;
    if n == 0 {
        return Err(invalid("replicate count must be > 0"));
    }
    let samples = if s.probes_per_pattern <= 1 {
        stream::replicate(
            s.seed,
            n,
            || SinrKernel::new(s).expect("validated"),
            |k, rng: &mut SeededStream| k.draw(rng),
        )?
    } else {
        let per = s.probes_per_pattern as usize;
        let groups = n.div_ceil(per);
        let nested = stream::replicate(
            s.seed,
            groups,
            || SinrKernel::new(s).expect("validated"),
            |k, rng: &mut SeededStream| {
                let mut v = Vec::with_capacity(per);
                k.draw_many(rng, &mut v)?;
                Ok(v)
            },
        )?;
        let mut flat: Vec<SinrSample> = nested.into_iter().flatten().collect();
        flat.truncate(n);
        flat
    };
    Ok(SinrBatch {
        scenario: *s,
        samples,
    })
}

/// Success probability on a threshold grid, with 95% Wilson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub theta_db: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// Replicates behind each estimate; 0 for analytic curves.
    pub n: usize,
}

impl SuccessCurve {
    /// Exact curve from a closed-form success function of linear `theta`.
    pub fn analytic(theta_db: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let p: Vec<f64> = theta_db.iter().map(|&t| f(db_to_linear(t))).collect();
        Self {
            theta_db: theta_db.to_vec(),
            p_hat: p.clone(),
            ci_lo: p.clone(),
            ci_hi: p,
            n: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.theta_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_db.is_empty()
    }

    /// Number of successes behind `p_hat[i]`.
    pub fn successes(&self, i: usize) -> usize {
        (self.p_hat[i] * self.n as f64).round() as usize
    }

    pub fn outage_count(&self, i: usize) -> usize {
        self.n - self.successes(i)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Evenly spaced grid `lo, lo + step, ..., hi` in dB.
pub fn theta_grid_db(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| lo + i as f64 * step).collect()
}

/// Default grid: -40 dB to +20 dB in 1 dB steps.
pub fn default_theta_grid() -> Vec<f64> {
    theta_grid_db(-40.0, 20.0, 1.0)
}

impl SinrBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sorted SINR values.
    pub fn sorted_sinr(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.samples.iter().map(|s| s.sinr).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// All thresholds share the same samples, so the curve is exactly
    /// non-increasing in `theta`.
    pub fn success_curve(&self, theta_db: &[f64]) -> SuccessCurve {
        success_curve_from_sorted(&self.sorted_sinr(), theta_db)
    }

    /// Monte Carlo estimate of `kappa = E[a l(xi)^-m (I + W)^m]`.
    pub fn kappa(&self) -> Result<KappaEstimate> {
        let s = &self.scenario;
        let c = small_t_coefficient(&s.fading)?;
        let acc: MeanVar = self
            .samples
            .iter()
            .map(|x| kappa_term(c.a, c.m, &s.path_loss, x.xi, x.interference + s.noise_w))
            .collect();
        Ok(KappaEstimate {
            kappa: acc.mean(),
            stderr: acc.stderr(),
            n: acc.n,
            m: c.m,
        })
    }
}

pub(crate) fn kappa_term(a: f64, m: f64, pl: &PathLossModel, xi: f64, load: f64) -> f64 {
    let base = pl.inverse_gain_sq(xi * xi) * load;
    if m == 1.0 {
        a * base
    } else if m == 2.0 {
        a * base * base
    } else {
        a * base.powf(m)
    }
}

pub fn success_curve_from_sorted(sorted_sinr: &[f64], theta_db: &[f64]) -> SuccessCurve {
    let n = sorted_sinr.len();
    let mut curve = SuccessCurve {
        theta_db: theta_db.to_vec(),
        p_hat: Vec::with_capacity(theta_db.len()),
        ci_lo: Vec::with_capacity(theta_db.len()),
        ci_hi: Vec::with_capacity(theta_db.len()),
        n,
    };
    for &t in theta_db {
        let theta = db_to_linear(t);
        let fails = sorted_sinr.partition_point(|&v| v <= theta);
        let k = n - fails;
        let (lo, hi) = wilson(k, n, Z95);
        curve.p_hat.push(k as f64 / n as f64);
        curve.ci_lo.push(lo);
        curve.ci_hi.push(hi);
    }
    curve
}

/// Success curve of a scenario from `n` fresh replicates.
pub fn estimate_success_curve(s: &Scenario, theta_db: &[f64], n: usize) -> Result<SuccessCurve> {
    Ok(simulate(s, n)?.success_curve(theta_db))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub stderr: f64,
    pub n: usize,
    pub m: f64,
}

/// `kappa` with its Monte Carlo standard error.
pub fn estimate_kappa(s: &Scenario, n: usize) -> Result<KappaEstimate> {
    // fail fast before simulating
    small_t_coefficient(&s.fading)?;
    simulate(s, n)?.kappa()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Samples that landed in the contact-distance bin.
    pub count: usize,
}

/// Minimum number of in-bin samples for a conditional moment.
pub const MIN_BIN_SAMPLES: usize = 100;

impl SinrBatch {
    /// `E[I^order | lo <= xi < hi]`.
    pub fn interference_moment(&self, order: u32, xi_bin: (f64, f64)) -> Result<MomentEstimate> {
        if order == 0 || order > 4 {
            return Err(invalid(format!(
                "moment order must be in 1..=4, got {order}"
            )));
        }
        let (lo, hi) = xi_bin;
        if !(lo < hi) {
            return Err(invalid(format!("empty contact-distance bin [{lo}, {hi})")));
        }
        let acc: MeanVar = self
            .samples
            .iter()
            .filter(|s| s.xi >= lo && s.xi < hi)
            .map(|s| s.interference.powi(order as i32))
            .collect();
        if acc.n < MIN_BIN_SAMPLES {
            return Err(Error::BinStarved {
                got: acc.n,
                needed: MIN_BIN_SAMPLES,
            });
        }
        Ok(MomentEstimate {
            value: acc.mean(),
            stderr: acc.stderr(),
            count: acc.n,
        })
    }

    /// Empirical `P(I > level)` for each level (ascending).
    pub fn interference_tail(&self, levels: &[f64]) -> Result<TailCurve> {
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("levels must be sorted ascending"));
        }
        let mut v: Vec<f64> = self.samples.iter().map(|s| s.interference).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let ccdf = levels
            .iter()
            .map(|&l| (n - v.partition_point(|&x| x <= l)) as f64 / n as f64)
            .collect();
        Ok(TailCurve {
            levels: levels.to_vec(),
            ccdf,
            reps: n,
        })
    }
}

/// Conditional interference moment from `reps` fresh replicates.
pub fn interference_moment(
    s: &Scenario,
    order: u32,
    xi_bin: (f64, f64),
    reps: usize,
) -> Result<MomentEstimate> {
    simulate(s, reps)?.interference_moment(order, xi_bin)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub levels: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub reps: usize,
}

pub fn interference_tail_ccdf(s: &Scenario, levels: &[f64], reps: usize) -> Result<TailCurve> {
    simulate(s, reps)?.interference_tail(levels)
}
