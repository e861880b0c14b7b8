//! Small statistical toolkit for the studies: Kolmogorov–Smirnov tests,
//! medians with order-statistic errors and weighted log-log rate fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value for a KS distance `d` with effective size `n`
/// (Stephens' finite-size correction).
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let s = n.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter("KS test needs two nonempty samples".into()));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if x.is_empty() {
        return Err(Error::Parameter("KS test needs a nonempty sample".into()));
    }
    let s = sorted(x);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, v) in s.iter().enumerate() {
        let f = cdf(*v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// KS normality test after standardizing with the sample mean and deviation.
pub fn ks_normality(x: &[f64]) -> Result<KsResult> {
    let m = mean(x);
    let sd = variance(x).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Parameter("normality test needs a nondegenerate sample".into()));
    }
    let z: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
    ks_one_sample(&z, normal_cdf)
}

pub fn mean(x: &[f64]) -> f64 {
    let mut acc = crate::real::CompensatedSum::new();
    for v in x {
        acc.add(*v);
    }
    acc.value() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    let mut acc = crate::real::CompensatedSum::new();
    for v in x {
        acc.add((v - m) * (v - m));
    }
    acc.value() / (x.len() - 1) as f64
}

/// Mean with standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    (mean(x), (variance(x) / x.len() as f64).sqrt())
}

/// Sample median with a standard error from the distribution-free 95%
/// order-statistic interval (half-width / 1.96).
pub fn median_se(x: &[f64]) -> (f64, f64) {
    let s = sorted(x);
    let n = s.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let med = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    let half = 1.96 * (n as f64).sqrt() / 2.0;
    let lo = ((n as f64 / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((n as f64 / 2.0 + half).ceil() as usize).min(n - 1);
    (med, (s[hi] - s[lo]) / (2.0 * 1.96))
}

/// Result of a log-log fit `log err = intercept + slope·log ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub n_points: usize,
}

/// Weighted least squares on `(log ε, log err)` with weights from the
/// delta method, `Var(log err) ≈ (se/err)²`, and a normal 95% interval.
///
/// Only points with `err > 3·se` enter; at least three are required. When
/// every `se` is zero the fit is unweighted and the interval degenerates.
pub fn fit_loglog_rate(eps: &[f64], err: &[f64], se: &[f64]) -> Result<RateFit> {
    if eps.len() != err.len() || eps.len() != se.len() {
        return Err(Error::Parameter("rate fit inputs differ in length".into()));
    }
    let pts: Vec<(f64, f64, f64)> = (0..eps.len())
        .filter(|&i| eps[i] > 0.0 && err[i] > 3.0 * se[i] && err[i] > 0.0)
        .map(|i| (eps[i].ln(), err[i].ln(), se[i] / err[i]))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSignal(format!(
            "{} of {} grid points have error above 3 SE",
            pts.len(),
            eps.len()
        )));
    }
    let unweighted = pts.iter().all(|p| p.2 == 0.0);
    if !unweighted && pts.iter().any(|p| p.2 == 0.0) {
        return Err(Error::Parameter("rate fit mixes exact and noisy points".into()));
    }
    let w = |p: &(f64, f64, f64)| if unweighted { 1.0 } else { 1.0 / (p.2 * p.2) };
    let sw: f64 = pts.iter().map(w).sum();
    let xm = pts.iter().map(|p| w(p) * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| w(p) * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| w(p) * (p.0 - xm) * (p.0 - xm)).sum();
    let sxy: f64 = pts.iter().map(|p| w(p) * (p.0 - xm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Parameter("rate fit needs distinct eps values".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let slope_se = if unweighted { 0.0 } else { (1.0 / sxx).sqrt() };
    let z = 1.959_963_984_540_054;
    Ok(RateFit {
        slope,
        intercept,
        slope_se,
        ci_low: slope - z * slope_se,
        ci_high: slope + z * slope_se,
        level: 0.95,
        n_points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn exact_power_laws() {
        let eps = [0.2, 0.1, 0.05];
        for &p in &[1.0, 0.75] {
            let err: Vec<f64> = eps.iter().map(|e: &f64| 3.0 * e.powf(p)).collect();
            let fit = fit_loglog_rate(&eps, &err, &[0.0; 3]).unwrap();
            assert_abs_diff_eq!(fit.slope, p, epsilon = 1e-12);
            assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn weak_signal_is_reported() {
        let r = fit_loglog_rate(&[0.2, 0.1, 0.05], &[0.1, 0.01, 0.001], &[0.01, 0.01, 0.01]);
        assert!(matches!(r, Err(Error::InsufficientSignal(_))));
    }

    #[test]
    fn interval_coverage_on_synthetic_data() {
        let eps = [0.2, 0.1, 0.05];
        let mut rng = stream(17, Purpose::Aux, 0);
        let mut covered = 0;
        for _ in 0..100 {
            let mut err = Vec::new();
            let mut se = Vec::new();
            for e in eps {
                let truth = 2.0 * f64::powf(e, 0.5);
                let z: f64 = StandardNormal.sample(&mut rng);
                err.push(truth * (1.0 + 0.05 * z));
                se.push(0.05 * truth);
            }
            let fit = fit_loglog_rate(&eps, &err, &se).unwrap();
            if fit.ci_low <= 0.5 && 0.5 <= fit.ci_high {
                covered += 1;
            }
        }
        assert!(covered >= 90, "coverage {covered}/100");
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.010
        assert_abs_diff_eq!(kolmogorov_q(1.3581), 0.05, epsilon = 5e-4);
        assert_abs_diff_eq!(kolmogorov_q(1.6276), 0.01, epsilon = 2e-4);
        assert_abs_diff_eq!(normal_cdf(1.959963984540054), 0.975, epsilon = 1e-12);
    }

    #[test]
    fn ks_examples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
        let b = [4.0, 5.0];
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
        let mut rng = stream(3, Purpose::Aux, 0);
        let x: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_normality(&x).unwrap().p_value > 0.01);
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert!(ks_normality(&y).unwrap().p_value < 1e-6);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_se(&[3.0, 1.0, 2.0]).0, 2.0);
        assert_eq!(median_se(&[4.0, 1.0, 2.0, 3.0]).0, 2.5);
        let (_, se) = median_se(&(0..100).map(f64::from).collect::<Vec<_>>());
        assert!(se > 0.0);
    }
}
