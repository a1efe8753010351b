//! Small statistical helpers shared by the estimators and tests.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `n` trials.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanVar {
    pub n: usize,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for MeanVar {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // small-x form converges faster
        let c = (2.0 * std::f64::consts::PI).sqrt() / x;
        let q = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let s: f64 = (0..20).map(|k| q.powi((2 * k + 1) * (2 * k + 1))).sum();
        (1.0 - c * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k: i32| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF, with the
/// asymptotic p-value (Stephens' small-sample correction).
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let n_f = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n_f - f).max(f - i as f64 / n_f);
    }
    let sn = n_f.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
        n,
    }
}

/// Least-squares fit of a non-increasing sequence (pool adjacent violators).
pub fn isotonic_non_increasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len());
    // blocks of (weighted mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        blocks.push((v, wt, 1));
        while blocks.len() > 1 {
            let (v2, w2, l2) = blocks[blocks.len() - 1];
            let (v1, w1, l1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let wt = w1 + w2;
            let mean = if wt > 0.0 {
                (v1 * w1 + v2 * w2) / wt
            } else {
                0.5 * (v1 + v2)
            };
            blocks.push((mean, wt, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, l)| std::iter::repeat_n(v, l))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
}

/// Weighted least squares `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (n as f64 - 2.0).max(1.0);
    let slope_stderr = (ss_res / dof / sxx).sqrt();
    Some(LineFit {
        slope,
        intercept,
        r2,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_brackets_and_handles_edges() {
        let (lo, hi) = wilson(50, 100, Z95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson(100, 100, Z95);
        assert!(lo > 0.96 && hi == 1.0);
        let (lo, _) = wilson(0, 100, Z95);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn kolmogorov_sf_reference_values() {
        // standard table values
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        assert!((kolmogorov_sf(0.5) - 0.9639).abs() < 1e-3);
        // both branches agree at the switch point
        let a = kolmogorov_sf(1.18 - 1e-9);
        let b = kolmogorov_sf(1.18 + 1e-9);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).p_value > 0.99);
        assert!(ks_one_sample(&xs, |x| (x * x).clamp(0.0, 1.0)).p_value < 1e-6);
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&x, &y, &[1.0; 4]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
        let mv: MeanVar = xs.iter().copied().collect();
        assert!((mv.mean() - 11.0).abs() < 1e-12);
        assert!((mv.variance() - 93.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn isotonic_output_is_non_increasing(y in proptest::collection::vec(-10.0f64..10.0, 1..60)) {
            let w = vec![1.0; y.len()];
            let fit = isotonic_non_increasing(&y, &w);
            prop_assert_eq!(fit.len(), y.len());
            prop_assert!(fit.windows(2).all(|p| p[1] <= p[0] + 1e-12));
            // pooling preserves the total
            let s0: f64 = y.iter().sum();
            let s1: f64 = fit.iter().sum();
            prop_assert!((s0 - s1).abs() < 1e-9);
        }

        #[test]
        fn isotonic_keeps_sorted_input(mut y in proptest::collection::vec(-10.0f64..10.0, 1..60)) {
            y.sort_by(|a, b| b.total_cmp(a));
            let fit = isotonic_non_increasing(&y, &vec![1.0; y.len()]);
            prop_assert_eq!(fit, y);
        }
    }
}
