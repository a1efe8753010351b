//! Poisson reference: closed-form success probability under Rayleigh fading,
//! `kappa` for the Poisson network, and inversion of success curves.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::propagation::{
    small_t_coefficient, FadingModel, FadingSampler, PathLossKind, PathLossModel,
};
use crate::quadrature::{integrate, Tolerance};
use crate::sinr_mc::{db_to_linear, kappa_term, linear_to_db, KappaEstimate, SuccessCurve};
use crate::stats::{isotonic_non_increasing, MeanVar};
use crate::stream;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 2.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "path-loss exponent must be > 2, got {alpha}"
        )))
    }
}

/// `theta^delta * int_{theta^-delta}^inf du / (1 + u^(1/delta))`, `delta = 2/alpha`.
///
/// The substitution `u = c w^-p` with `p = 4 / (alpha - 2)` turns the slowly
/// decaying tail into a smooth integrand on `(0, 1]` that vanishes linearly
/// at zero.
fn interference_ratio(theta: f64, alpha: f64) -> Result<f64> {
    let delta = 2.0 / alpha;
    let c = theta.powf(-delta);
    let p = 4.0 / (alpha - 2.0);
    let q = p * alpha / 2.0;
    let c_pow = c.powf(alpha / 2.0);
    let tail = integrate(
        |w| {
            if w <= 0.0 {
                0.0
            } else {
                c * p * w / (w.powf(q) + c_pow)
            }
        },
        0.0,
        1.0,
        Tolerance::relative(1e-12),
    )?;
    Ok(theta.powf(delta) * tail)
}

/// Success probability of the Poisson network with Rayleigh fading, singular
/// path loss and no noise.
pub fn ppp_success_rayleigh(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta > 0.0) || theta.is_infinite() {
        return Err(invalid(format!(
            "theta must be finite and > 0, got {theta}"
        )));
    }
    Ok(1.0 / (1.0 + interference_ratio(theta, alpha)?))
}

/// `1 - ppp_success_rayleigh`, without cancellation for small `theta`.
pub fn ppp_outage_rayleigh(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta > 0.0) || theta.is_infinite() {
        return Err(invalid(format!(
            "theta must be finite and > 0, got {theta}"
        )));
    }
    let x = interference_ratio(theta, alpha)?;
    Ok(x / (1.0 + x))
}

/// `lim (1 - P_c(theta)) / theta = 2 / (alpha - 2)` for the Rayleigh case.
pub fn kappa_ppp_rayleigh(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 / (alpha - 2.0))
}

/// Analytic Rayleigh/singular curve on a dB grid.
pub fn ppp_success_curve(theta_db: &[f64], alpha: f64) -> Result<SuccessCurve> {
    check_alpha(alpha)?;
    let p = theta_db
        .iter()
        .map(|&t| ppp_success_rayleigh(db_to_linear(t), alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuccessCurve {
        theta_db: theta_db.to_vec(),
        p_hat: p.clone(),
        ci_lo: p.clone(),
        ci_hi: p,
        n: 0,
    })
}

/// Settings for [`kappa_ppp_general`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PppKappaConfig {
    pub lambda: f64,
    pub path_loss: PathLossModel,
    pub fading: FadingModel,
    pub noise_w: f64,
    /// Side of the square (centred on the receiver) holding interferers;
    /// matches the simulation window so both routes see the same truncation.
    pub region_side: f64,
    pub n: usize,
    pub seed: u64,
}

/// `kappa` for a Poisson network of intensity `lambda`, for any fading with
/// a polynomial CDF order at zero.
///
/// The contact distance is drawn from its exact law
/// (`lambda pi r^2 ~ Exp(1)`); given `r`, the interferers form a Poisson
/// process outside the disk of radius `r`, sampled on the truncation square.
pub fn kappa_ppp_general(cfg: &PppKappaConfig) -> Result<KappaEstimate> {
    cfg.path_loss.validate()?;
    let coef = small_t_coefficient(&cfg.fading)?;
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(invalid(format!("lambda must be > 0, got {}", cfg.lambda)));
    }
    if !(cfg.region_side > 0.0) || cfg.n == 0 || !(cfg.noise_w >= 0.0) {
        return Err(invalid(
            "region side, sample count and noise must be positive",
        ));
    }
    let fading = FadingSampler::new(&cfg.fading)?;
    let half = 0.5 * cfg.region_side;
    let mean_count = cfg.lambda * cfg.region_side * cfg.region_side;
    let count = Poisson::new(mean_count).map_err(|e| invalid(e.to_string()))?;
    let terms = stream::replicate(
        cfg.seed,
        cfg.n,
        || (),
        |_, rng| {
            let e: f64 = Exp1.sample(rng);
            let r2 = e / (cfg.lambda * std::f64::consts::PI);
            let k = count.sample(rng) as usize;
            let mut interference = 0.0;
            for _ in 0..k {
                let x = (rng.random::<f64>() - 0.5) * 2.0 * half;
                let y = (rng.random::<f64>() - 0.5) * 2.0 * half;
                let d2 = x * x + y * y;
                let h = fading.sample(rng);
                if d2 > r2 {
                    interference += h * cfg.path_loss.gain_sq(d2);
                }
            }
            Ok::<_, Error>(kappa_term(
                coef.a,
                coef.m,
                &cfg.path_loss,
                r2.sqrt(),
                interference + cfg.noise_w,
            ))
        },
    )?;
    let acc: MeanVar = terms.into_iter().collect();
    Ok(KappaEstimate {
        kappa: acc.mean(),
        stderr: acc.stderr(),
        n: acc.n,
        m: coef.m,
    })
}

/// Solves `f(theta) = p_t` for a non-increasing success function by
/// bisection in `log theta` over `[lo, hi]`, to relative tolerance `1e-12`.
pub fn invert_analytic(f: impl Fn(f64) -> Result<f64>, p_t: f64, lo: f64, hi: f64) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(p_t < f_lo && p_t > f_hi) {
        return Err(Error::OutOfRange {
            target: p_t,
            lo: f_hi,
            hi: f_lo,
        });
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if f(mid.exp())? > p_t {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// `theta` at which the Rayleigh/singular Poisson curve reaches `p_t`.
pub fn invert_ppp_rayleigh(p_t: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    invert_analytic(|t| ppp_success_rayleigh(t, alpha), p_t, 1e-12, 1e12)
}

/// `theta` at which an empirical curve reaches `p_t`.
///
/// The curve is first made non-increasing by isotonic regression, then
/// interpolated linearly in `(theta_db, p)`, i.e. in `log theta`. On an exact
/// plateau at `p_t` the plateau midpoint is returned.
pub fn invert_curve(curve: &SuccessCurve, p_t: f64) -> Result<f64> {
    if curve.is_empty() {
        return Err(invalid("empty success curve"));
    }
    let w = vec![1.0; curve.len()];
    let p = isotonic_non_increasing(&curve.p_hat, &w);
    let (max, min) = (p[0], p[p.len() - 1]);
    if !(p_t < max && p_t > min) {
        return Err(Error::OutOfRange {
            target: p_t,
            lo: min,
            hi: max,
        });
    }
    let j = p
        .iter()
        .position(|&v| v < p_t)
        .expect("p_t above the minimum");
    let i = j - 1;
    let t = &curve.theta_db;
    let db = if p[i] == p_t {
        let k = p[..=i]
            .iter()
            .position(|&v| v == p_t)
            .expect("plateau start");
        0.5 * (t[k] + t[i])
    } else {
        let f = (p[i] - p_t) / (p[i] - p[j]);
        t[i] + f * (t[j] - t[i])
    };
    Ok(db_to_linear(db))
}

/// Where the success probability is well defined for the Rayleigh closed form.
pub fn closed_form_applies(fading: &FadingModel, path_loss: &PathLossModel, noise_w: f64) -> bool {
    (matches!(fading, FadingModel::Rayleigh)
        || matches!(fading, FadingModel::Nakagami { m } if *m == 1.0))
        && path_loss.kind == PathLossKind::Singular
        && noise_w == 0.0
}

/// dB helper re-exported for callers of the inversion routines.
pub fn theta_to_db(theta: f64) -> f64 {
    linear_to_db(theta)
}
