//! Globally adaptive 15-point Gauss–Kronrod quadrature.

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1] (symmetric), QUADPACK qk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Integration controls. Converges when the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_segments: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_segments: 2000,
        }
    }

    pub const fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut segs = vec![gk15(&mut f, a, b)];
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(value);
        }
        if segs.len() >= tol.max_segments || !value.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                tolerance: tol.rel,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        let scale = s.a.abs().max(s.b.abs()).max(f64::MIN_POSITIVE);
        if mid <= s.a || mid >= s.b || s.b - s.a < 64.0 * f64::EPSILON * scale {
            // interval can no longer be resolved in floating point
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                tolerance: tol.rel,
            });
        }
        segs.push(gk15(&mut f, s.a, mid));
        segs.push(gk15(&mut f, mid, s.b));
    }
}

/// Integrates `f` over `[a, inf)` with the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, tol: Tolerance) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let x = a + t / u;
            let v = f(x) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
