//! Path loss and fading.
//!
//! Fading is a power gain `h`. Nakagami-m fading is `gamma(m, 1/m)` (unit
//! mean; `m = 1` is Rayleigh). Log-normal shadowing is `10^(X/10)` with
//! `X ~ N(0, sigma^2)` in dB and is deliberately left unnormalized, so its
//! mean is `exp((ln 10 / 10)^2 sigma^2 / 2)`. Composite fading is the product
//! of independent Nakagami and log-normal factors.

use std::f64::consts::{LN_10, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Natural-log scale of one decibel: `ln(10) / 10`.
pub const DB_SCALE: f64 = LN_10 / 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathLossKind {
    /// `(1 + d^alpha)^-1`
    NonSingular,
    /// `d^-alpha`
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub kind: PathLossKind,
    pub alpha: f64,
}

impl PathLossModel {
    pub fn new(kind: PathLossKind, alpha: f64) -> Result<Self> {
        let m = Self { kind, alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(invalid(format!(
                "path-loss exponent must be > 2, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `d^alpha` from a squared distance, with a fast path for even integer
    /// exponents.
    #[inline]
    pub(crate) fn dist_pow(&self, d2: f64) -> f64 {
        if self.alpha == 4.0 {
            d2 * d2
        } else {
            d2.powf(0.5 * self.alpha)
        }
    }

    /// Gain from a squared distance; `+inf` for singular loss at zero.
    #[inline]
    pub(crate) fn gain_sq(&self, d2: f64) -> f64 {
        match self.kind {
            PathLossKind::NonSingular => 1.0 / (1.0 + self.dist_pow(d2)),
            PathLossKind::Singular => 1.0 / self.dist_pow(d2),
        }
    }

    /// `1 / l(d)` from a squared distance.
    #[inline]
    pub(crate) fn inverse_gain_sq(&self, d2: f64) -> f64 {
        match self.kind {
            PathLossKind::NonSingular => 1.0 + self.dist_pow(d2),
            PathLossKind::Singular => self.dist_pow(d2),
        }
    }
}

/// Path-loss gain at distance `d`.
pub fn path_loss(model: &PathLossModel, d: f64) -> Result<f64> {
    model.validate()?;
    if !(d >= 0.0) {
        return Err(invalid(format!("distance must be >= 0, got {d}")));
    }
    if model.kind == PathLossKind::Singular && d == 0.0 {
        return Err(Error::SingularAtZero);
    }
    Ok(model.gain_sq(d * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FadingModel {
    Rayleigh,
    Nakagami { m: f64 },
    LogNormal { sigma_db: f64 },
    Composite { m: f64, sigma_db: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match *self {
            Self::Rayleigh => Ok(()),
            Self::Nakagami { m } => check("m", m),
            Self::LogNormal { sigma_db } => check("sigma", sigma_db),
            Self::Composite { m, sigma_db } => {
                check("m", m)?;
                check("sigma", sigma_db)
            }
        }
    }

    /// Nakagami parameter of the small-scale part, if any.
    pub fn nakagami_m(&self) -> Option<f64> {
        match *self {
            Self::Rayleigh => Some(1.0),
            Self::Nakagami { m } | Self::Composite { m, .. } => Some(m),
            Self::LogNormal { .. } => None,
        }
    }

    /// Shadowing spread in dB, if any.
    pub fn sigma_db(&self) -> Option<f64> {
        match *self {
            Self::LogNormal { sigma_db } | Self::Composite { sigma_db, .. } => Some(sigma_db),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Rayleigh => "rayleigh".to_string(),
            Self::Nakagami { m } => format!("nakagami(m={m})"),
            Self::LogNormal { sigma_db } => format!("lognormal(sigma={sigma_db})"),
            Self::Composite { m, sigma_db } => format!("composite(m={m};sigma={sigma_db})"),
        }
    }

    pub fn mean(&self) -> f64 {
        self.sigma_db().map_or(1.0, lognormal_mean)
    }
}

/// Mean of the unnormalized shadowing factor `10^(X/10)`.
pub fn lognormal_mean(sigma_db: f64) -> f64 {
    (0.5 * (DB_SCALE * sigma_db).powi(2)).exp()
}

/// Prepared sampler; building the gamma distribution once keeps the inner
/// interference loop cheap.
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler {
    small_scale: SmallScale,
    // X / 10 * ln 10 = shadow_scale * Z, Z ~ N(0, 1)
    shadow_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum SmallScale {
    None,
    Exp,
    Gamma(Gamma<f64>),
}

impl FadingSampler {
    pub fn new(model: &FadingModel) -> Result<Self> {
        model.validate()?;
        let small_scale = match model.nakagami_m() {
            None => SmallScale::None,
            Some(m) if m == 1.0 => SmallScale::Exp,
            Some(m) => SmallScale::Gamma(
                Gamma::new(m, 1.0 / m).map_err(|e| invalid(format!("gamma({m}): {e}")))?,
            ),
        };
        Ok(Self {
            small_scale,
            shadow_scale: model.sigma_db().map(|s| DB_SCALE * s),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h = match &self.small_scale {
            SmallScale::None => 1.0,
            SmallScale::Exp => Exp1.sample(rng),
            SmallScale::Gamma(g) => g.sample(rng),
        };
        match self.shadow_scale {
            None => h,
            Some(s) => {
                let z: f64 = StandardNormal.sample(rng);
                h * (s * z).exp()
            }
        }
    }
}

/// One fading draw.
pub fn sample_fading<R: Rng + ?Sized>(model: &FadingModel, rng: &mut R) -> Result<f64> {
    Ok(FadingSampler::new(model)?.sample(rng))
}

fn nakagami_cdf(m: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if m == 1.0 {
        -(-t).exp_m1()
    } else {
        gamma_lr(m, m * t)
    }
}

fn lognormal_cdf(sigma_db: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    0.5 * erfc(-10.0 * t.log10() / (sigma_db * SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Relative tolerance for the composite-fading integrals.
pub const FADING_QUAD_TOL: f64 = 1e-6;

/// CDF of the fading power at `t`.
///
/// Composite fading integrates the Nakagami CDF against the shadowing law in
/// the dB domain (a log grid in the shadowing factor). The span is +-8 sigma
/// around zero, stretched on the low side by the `m`-tilt that dominates for
/// small `t`.
pub fn fading_cdf(model: &FadingModel, t: f64) -> Result<f64> {
    model.validate()?;
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    match *model {
        FadingModel::Rayleigh => Ok(nakagami_cdf(1.0, t)),
        FadingModel::Nakagami { m } => Ok(nakagami_cdf(m, t)),
        FadingModel::LogNormal { sigma_db } => Ok(lognormal_cdf(sigma_db, t)),
        FadingModel::Composite { m, sigma_db } => {
            let tilt = m * DB_SCALE * sigma_db;
            // z is X / sigma
            let f =
                |z: f64| std_normal_pdf(z) * nakagami_cdf(m, t * (-DB_SCALE * sigma_db * z).exp());
            let v = integrate(
                f,
                -8.0 - tilt,
                8.0,
                Tolerance::relative(FADING_QUAD_TOL).with_abs(1e-300),
            )?;
            Ok(v.clamp(0.0, 1.0))
        }
    }
}

/// `F_h(t) ~ a t^m` as `t -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallTCoefficient {
    pub a: f64,
    pub m: f64,
}

/// Polynomial order and leading coefficient of the fading CDF at zero.
///
/// Nakagami-m gives `a = m^(m-1) / Gamma(m)`. Composite fading multiplies
/// that by `E[shadow^-m]`, evaluated here by quadrature over the shadowing
/// density. Pure log-normal shadowing decays faster than any power.
pub fn small_t_coefficient(model: &FadingModel) -> Result<SmallTCoefficient> {
    model.validate()?;
    let nakagami_a = |m: f64| m.powf(m - 1.0) / gamma(m);
    match *model {
        FadingModel::Rayleigh => Ok(SmallTCoefficient { a: 1.0, m: 1.0 }),
        FadingModel::Nakagami { m } => Ok(SmallTCoefficient {
            a: nakagami_a(m),
            m,
        }),
        FadingModel::LogNormal { .. } => Err(Error::NoPolynomialDecay),
        FadingModel::Composite { m, sigma_db } => {
            // E[10^(-m X / 10)] with X = sigma z; the integrand is a Gaussian
            // in z centred at -m sigma ln10/10
            let k = m * DB_SCALE * sigma_db;
            let f = |z: f64| std_normal_pdf(z) * (-k * z).exp();
            let inv_moment = integrate(
                f,
                -k - 10.0,
                -k + 10.0,
                Tolerance::relative(FADING_QUAD_TOL * 1e-2),
            )?;
            Ok(SmallTCoefficient {
                a: nakagami_a(m) * inv_moment,
                m,
            })
        }
    }
}
