//! Deployment gain, asymptotic deployment gain (two estimators), outage
//! slope fits, and the rate and mean-SINR approximations built on the ADG.

use serde::Serialize;

use crate::analytic_ppp::{
    invert_curve, invert_ppp_rayleigh, kappa_ppp_general, kappa_ppp_rayleigh, ppp_success_rayleigh,
    PppKappaConfig,
};
use crate::error::{invalid, Error, Result};
use crate::point_process::{intensity_of, ProcessModel};
use crate::propagation::{small_t_coefficient, FadingModel, PathLossKind};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::sinr_mc::{
    estimate_kappa, linear_to_db, simulate, KappaEstimate, MomentEstimate, Scenario, SinrBatch,
    SuccessCurve,
};
use crate::stats::{linear_fit, MeanVar, Z95};

/// Reference curve a deployment gain is measured against.
#[derive(Debug, Clone, Copy)]
pub enum Baseline<'a> {
    /// Closed-form Poisson curve (Rayleigh, singular path loss, no noise).
    PppRayleigh { alpha: f64 },
    /// Any estimated or tabulated curve.
    Curve(&'a SuccessCurve),
}

impl Baseline<'_> {
    /// `theta` at which the baseline reaches `p_t`.
    pub fn invert(&self, p_t: f64) -> Result<f64> {
        match self {
            Baseline::PppRayleigh { alpha } => invert_ppp_rayleigh(p_t, *alpha),
            Baseline::Curve(c) => invert_curve(c, p_t),
        }
    }
}

/// `P_c^-1(p_t) / P_ref^-1(p_t)`, a linear ratio.
pub fn deployment_gain(curve: &SuccessCurve, baseline: Baseline<'_>, p_t: f64) -> Result<f64> {
    Ok(invert_curve(curve, p_t)? / baseline.invert(p_t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdgMethod {
    KappaRatio,
    HorizontalShift,
}

impl AdgMethod {
    pub fn label(&self) -> &'static str {
        match self {
            AdgMethod::KappaRatio => "kappa_ratio",
            AdgMethod::HorizontalShift => "horizontal_shift",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdgEstimate {
    /// Linear ratio.
    pub g_hat: f64,
    pub method: AdgMethod,
    pub stderr: f64,
    /// Only for the kappa-ratio method.
    pub kappa: Option<f64>,
    pub kappa_ppp: Option<f64>,
    pub m: f64,
}

impl AdgEstimate {
    pub fn g_hat_db(&self) -> f64 {
        linear_to_db(self.g_hat)
    }
}

/// `(kappa_ppp / kappa)^(1/m)` with a delta-method standard error from the
/// two independent estimates.
pub fn adg_from_kappa(kappa: &KappaEstimate, kappa_ppp: &KappaEstimate) -> Result<AdgEstimate> {
    if kappa.m != kappa_ppp.m {
        return Err(invalid(format!(
            "fading orders differ: {} vs {}",
            kappa.m, kappa_ppp.m
        )));
    }
    if !(kappa.kappa > 0.0 && kappa_ppp.kappa > 0.0) {
        return Err(invalid("kappa values must be positive"));
    }
    let m = kappa.m;
    let g_hat = (kappa_ppp.kappa / kappa.kappa).powf(1.0 / m);
    let rel2 = (kappa.stderr / kappa.kappa).powi(2) + (kappa_ppp.stderr / kappa_ppp.kappa).powi(2);
    Ok(AdgEstimate {
        g_hat,
        method: AdgMethod::KappaRatio,
        stderr: g_hat * rel2.sqrt() / m,
        kappa: Some(kappa.kappa),
        kappa_ppp: Some(kappa_ppp.kappa),
        m,
    })
}

/// Seed offset for the Poisson reference run, so that it never shares a
/// stream with the scenario it is compared against.
const REFERENCE_SEED_SALT: u64 = 0x5eed_0f_9e37_79b9;

/// `kappa` of a Poisson network of intensity `ref_lambda` under the
/// scenario's path loss, fading and noise. Exact when the closed form
/// applies, otherwise Monte Carlo with `n` replicates.
pub fn ppp_kappa_for(s: &Scenario, ref_lambda: f64, n: usize) -> Result<KappaEstimate> {
    let coef = small_t_coefficient(&s.fading)?;
    if matches!(s.fading, FadingModel::Rayleigh)
        && s.path_loss.kind == PathLossKind::Singular
        && s.noise_w == 0.0
    {
        return Ok(KappaEstimate {
            kappa: kappa_ppp_rayleigh(s.path_loss.alpha)?,
            stderr: 0.0,
            n: 0,
            m: coef.m,
        });
    }
    kappa_ppp_general(&PppKappaConfig {
        lambda: ref_lambda,
        path_loss: s.path_loss,
        fading: s.fading,
        noise_w: s.noise_w,
        region_side: s.window.width.min(s.window.height),
        n,
        seed: s.seed ^ REFERENCE_SEED_SALT,
    })
}

/// Kappa-ratio ADG of a scenario against a Poisson network of intensity
/// `ref_lambda`, each side from `n` replicates.
pub fn adg_kappa_ratio(s: &Scenario, ref_lambda: f64, n: usize) -> Result<AdgEstimate> {
    let kappa = estimate_kappa(s, n)?;
    adg_from_kappa(&kappa, &ppp_kappa_for(s, ref_lambda, n)?)
}

/// Default target window for the horizontal-shift estimator.
pub const DEFAULT_P_WINDOW: (f64, f64) = (0.99, 0.9999);

/// Number of target probabilities sampled across the window.
const SHIFT_POINTS: usize = 9;

fn inverse_bounds(curve: &SuccessCurve, p_t: f64) -> Option<f64> {
    if curve.n == 0 {
        return Some(0.0);
    }
    let lower = SuccessCurve {
        p_hat: curve.ci_lo.clone(),
        ..curve.clone()
    };
    let upper = SuccessCurve {
        p_hat: curve.ci_hi.clone(),
        ..curve.clone()
    };
    let lo = invert_curve(&lower, p_t).ok()?;
    let hi = invert_curve(&upper, p_t).ok()?;
    // half-width of the 95% band in log theta, as a standard error
    Some((hi / lo).ln().abs() / (2.0 * Z95))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// ADG as the median deployment gain over target probabilities spread
/// log-uniformly in outage across `p_window`.
///
/// The standard error combines the spread of the gains over the window with
/// the width of the confidence bands of both curves at the targets.
pub fn adg_horizontal_shift(
    curve: &SuccessCurve,
    baseline: Baseline<'_>,
    p_window: (f64, f64),
    m: f64,
) -> Result<AdgEstimate> {
    let (lo, hi) = p_window;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(invalid(format!(
            "target window must satisfy 0 < lo < hi < 1, got [{lo}, {hi}]"
        )));
    }
    let (q_lo, q_hi) = ((1.0 - lo).ln(), (1.0 - hi).ln());
    let mut log_gains = Vec::with_capacity(SHIFT_POINTS);
    let mut band_se = Vec::with_capacity(SHIFT_POINTS);
    for k in 0..SHIFT_POINTS {
        let q = q_lo + (q_hi - q_lo) * k as f64 / (SHIFT_POINTS - 1) as f64;
        let p_t = 1.0 - q.exp();
        log_gains.push(deployment_gain(curve, baseline, p_t)?.ln());
        let ref_se = match baseline {
            Baseline::Curve(c) => inverse_bounds(c, p_t),
            Baseline::PppRayleigh { .. } => Some(0.0),
        };
        if let (Some(a), Some(b)) = (inverse_bounds(curve, p_t), ref_se) {
            band_se.push(a.hypot(b));
        }
    }
    let centre = median(&mut log_gains.clone());
    let mut dev: Vec<f64> = log_gains.iter().map(|g| (g - centre).abs()).collect();
    // median absolute deviation, scaled to a normal standard deviation
    let spread = 1.4826 * median(&mut dev);
    let band = if band_se.is_empty() {
        0.0
    } else {
        median(&mut band_se)
    };
    let g_hat = centre.exp();
    Ok(AdgEstimate {
        g_hat,
        method: AdgMethod::HorizontalShift,
        stderr: g_hat * spread.hypot(band),
        kappa: None,
        kappa_ppp: None,
        m,
    })
}

/// Minimum grid points for [`outage_slope`].
pub const MIN_SLOPE_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    /// dB of outage per decade of `theta`.
    pub db_per_decade: f64,
    pub stderr: f64,
    pub points: usize,
    pub r2: f64,
}

/// Slope of `10 log10(1 - p)` against `theta` in dB over `theta_db_range`,
/// in dB per decade.
///
/// Ordinary least squares over the grid points with at least one observed
/// outage.
pub fn outage_slope(curve: &SuccessCurve, theta_db_range: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = theta_db_range;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..curve.len() {
        let t = curve.theta_db[i];
        if t < lo || t > hi {
            continue;
        }
        let outage = 1.0 - curve.p_hat[i];
        let observed = curve.n == 0 || curve.outage_count(i) > 0;
        if outage > 0.0 && observed {
            x.push(t);
            y.push(linear_to_db(outage));
        }
    }
    if x.len() < MIN_SLOPE_POINTS {
        return Err(Error::InsufficientPoints {
            got: x.len(),
            needed: MIN_SLOPE_POINTS,
        });
    }
    let fit =
        linear_fit(&x, &y, &vec![1.0; x.len()]).ok_or_else(|| invalid("degenerate slope fit"))?;
    Ok(SlopeFit {
        db_per_decade: 10.0 * fit.slope,
        stderr: 10.0 * fit.slope_stderr,
        points: x.len(),
        r2: fit.r2,
    })
}

fn moment_of(values: impl Iterator<Item = f64>) -> MomentEstimate {
    let acc: MeanVar = values.collect();
    MomentEstimate {
        value: acc.mean(),
        stderr: acc.stderr(),
        count: acc.n,
    }
}

/// `E ln(1 + SINR)` in nats over an existing batch.
pub fn ergodic_rate_of(batch: &SinrBatch) -> MomentEstimate {
    moment_of(batch.samples.iter().map(|s| s.sinr.ln_1p()))
}

/// `E ln(1 + SINR)` in nats from `n` fresh replicates.
pub fn ergodic_rate_mc(s: &Scenario, n: usize) -> Result<MomentEstimate> {
    Ok(ergodic_rate_of(&simulate(s, n)?))
}

/// Rate of the simulated Poisson curve shifted by `g_hat`:
/// `int_0^inf P_c^PPP((e^x - 1) / g_hat) dx = E ln(1 + g_hat SINR_PPP)`.
pub fn ergodic_rate_shifted(reference: &SinrBatch, g_hat: f64) -> Result<MomentEstimate> {
    if !(g_hat > 0.0 && g_hat.is_finite()) {
        return Err(invalid(format!("gain must be finite and > 0, got {g_hat}")));
    }
    Ok(moment_of(
        reference.samples.iter().map(|s| (g_hat * s.sinr).ln_1p()),
    ))
}

/// `int_0^inf P_c^PPP((e^x - 1) / g_hat) dx` on the closed-form Poisson
/// curve, to relative tolerance `1e-6`.
pub fn ergodic_rate_from_adg(g_hat: f64, alpha: f64) -> Result<f64> {
    if !(g_hat > 0.0 && g_hat.is_finite()) {
        return Err(invalid(format!("gain must be finite and > 0, got {g_hat}")));
    }
    kappa_ppp_rayleigh(alpha)?;
    let mut err = None;
    let v = integrate_to_infinity(
        |x| {
            let theta = x.exp_m1() / g_hat;
            if theta <= 0.0 {
                return 1.0;
            }
            if !theta.is_finite() {
                return 0.0;
            }
            ppp_success_rayleigh(theta, alpha).unwrap_or_else(|e| {
                err.get_or_insert(e);
                0.0
            })
        },
        0.0,
        Tolerance::relative(1e-8),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn check_mean_finite(s: &Scenario) -> Result<()> {
    if s.path_loss.kind == PathLossKind::Singular {
        Err(Error::SingularMeanDiverges)
    } else {
        Ok(())
    }
}

/// Mean SINR over an existing batch; diverges under singular path loss.
pub fn mean_sinr_of(batch: &SinrBatch) -> Result<MomentEstimate> {
    check_mean_finite(&batch.scenario)?;
    Ok(moment_of(batch.samples.iter().map(|s| s.sinr)))
}

/// Mean SINR from `n` fresh replicates; diverges under singular path loss.
pub fn mean_sinr_mc(s: &Scenario, n: usize) -> Result<MomentEstimate> {
    check_mean_finite(s)?;
    mean_sinr_of(&simulate(s, n)?)
}

/// ADG approximation of a process's mean SINR from the Poisson one.
pub fn mean_sinr_from_adg(g_hat: f64, mean_ppp: f64) -> f64 {
    g_hat * mean_ppp
}

/// Poisson network with the scenario's intensity, channel and window, on a
/// seed disjoint from the scenario's.
pub fn reference_scenario(s: &Scenario) -> Scenario {
    Scenario {
        process: ProcessModel::Ppp {
            lambda: intensity_of(&s.process),
        },
        seed: s.seed ^ REFERENCE_SEED_SALT,
        ..*s
    }
}
