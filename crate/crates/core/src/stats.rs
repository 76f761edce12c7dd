//! Goodness-of-fit tests used by the verification harness: chi-square against
//! a discrete law and Kolmogorov-Smirnov against a continuous CDF (asymptotic
//! p-values; sample sizes of 30 or more).

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::Error;
use crate::Result;

/// Outcome of a goodness-of-fit test.
#[derive(Clone, Copy, Debug)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against cell probabilities.
///
/// Cells with expected count below 5 are pooled (smallest expected first)
/// until every remaining cell clears the threshold; degrees of freedom are
/// `cells - 1` after pooling.
pub fn chi_square(observed: &[u64], expected_probs: &[f64]) -> Result<GofTest> {
    if observed.len() != expected_probs.len() || observed.is_empty() {
        return Err(Error::Validation("observed/expected length mismatch".into()));
    }
    let n: u64 = observed.iter().sum();
    if n < 30 {
        return Err(Error::Validation(format!("need at least 30 observations, got {n}")));
    }
    let psum: f64 = expected_probs.iter().sum();
    if expected_probs.iter().any(|&p| p < 0.0) || psum <= 0.0 {
        return Err(Error::Validation("expected probabilities must be nonnegative".into()));
    }
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| (o as f64, n as f64 * p / psum))
        .collect();
    // Pool under-filled cells, smallest expected count first.
    cells.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    while cells.len() > 1 && cells[0].1 < 5.0 {
        let (o0, e0) = cells.remove(0);
        cells[0].0 += o0;
        cells[0].1 += e0;
        // Keep the pool position consistent with its new expected count.
        cells.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    }
    if cells.len() < 2 {
        return Err(Error::Validation("fewer than two cells after pooling".into()));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = (cells.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(df).expect("positive df").cdf(statistic);
    Ok(GofTest { statistic, p_value })
}

/// One-sample Kolmogorov-Smirnov test against the continuous CDF `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GofTest> {
    let n = samples.len();
    if n < 30 {
        return Err(Error::Validation(format!("need at least 30 samples, got {n}")));
    }
    let mut transformed: Vec<f64> = samples.iter().map(|&x| cdf(x)).collect();
    if transformed.iter().any(|u| !u.is_finite() || *u < -1e-12 || *u > 1.0 + 1e-12) {
        return Err(Error::Validation("cdf values must lie in [0,1]".into()));
    }
    transformed.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &u) in transformed.iter().enumerate() {
        d = d.max(u - i as f64 / nf).max((i + 1) as f64 / nf - u);
    }
    // Stephens' small-sample adjustment of the asymptotic law.
    let effective = nf.sqrt() + 0.12 + 0.11 / nf.sqrt();
    Ok(GofTest { statistic: d, p_value: kolmogorov_sf(effective * d) })
}

/// KS test against the exponential law with the given (known) mean.
pub fn ks_exponential(samples: &[f64], mean: f64) -> Result<GofTest> {
    if !(mean > 0.0) {
        return Err(Error::Validation(format!("mean {mean} must be positive")));
    }
    if samples.iter().any(|&x| x < 0.0) {
        return Err(Error::Validation("exponential samples must be nonnegative".into()));
    }
    ks_test(samples, |x| 1.0 - (-x / mean).exp())
}

/// KS test against the law with CDF `exp(-t^(-alpha))` on `t > 0`.
pub fn ks_frechet(samples: &[f64], alpha: f64) -> Result<GofTest> {
    if !(alpha > 0.0) {
        return Err(Error::Validation(format!("alpha {alpha} must be positive")));
    }
    if samples.iter().any(|&x| x <= 0.0) {
        return Err(Error::Validation("samples must be positive".into()));
    }
    ks_test(samples, |x| (-x.powf(-alpha)).exp())
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<GofTest> {
    if a.len() < 30 || b.len() < 30 {
        return Err(Error::Validation("need at least 30 samples per side".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut d = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok(GofTest { statistic: d, p_value: kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d) })
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..200 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_exp;
    use crate::RandomSource;
    use rand::Rng;

    #[test]
    fn chi_square_exact_match_gives_p_one() {
        let observed = [250u64, 250, 250, 250];
        let expected = [0.25, 0.25, 0.25, 0.25];
        let t = chi_square(&observed, &expected).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_detects_bias() {
        let observed = [900u64, 100];
        let expected = [0.5, 0.5];
        let t = chi_square(&observed, &expected).unwrap();
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn chi_square_pools_small_cells() {
        let observed = [50u64, 48, 2, 1, 0];
        let expected = [0.48, 0.48, 0.02, 0.01, 0.01];
        let t = chi_square(&observed, &expected).unwrap();
        assert!(t.p_value > 0.01);
    }

    #[test]
    fn ks_exponential_null_calibration() {
        // Under the null (true mean known), p-values are uniform: the
        // rejection rate at level 0.05 is 0.05 +/- 0.01 over 1000 runs.
        let mut rng = RandomSource::new(10).rng();
        let mut rejections = 0;
        let runs = 1000;
        for _ in 0..runs {
            let samples: Vec<f64> = (0..200).map(|_| sample_exp(3.0, &mut rng)).collect();
            let t = ks_exponential(&samples, 3.0).unwrap();
            if t.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = f64::from(rejections) / f64::from(runs);
        assert!((rate - 0.05).abs() <= 0.01, "rejection rate {rate}");
    }

    #[test]
    fn chi_square_null_calibration() {
        let mut rng = RandomSource::new(11).rng();
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut rejections = 0;
        let runs = 1000;
        for _ in 0..runs {
            let mut counts = [0u64; 4];
            for _ in 0..500 {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        counts[k] += 1;
                        break;
                    }
                }
            }
            if chi_square(&counts, &probs).unwrap().p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = f64::from(rejections) / f64::from(runs);
        assert!((rate - 0.05).abs() <= 0.02, "rejection rate {rate}");
    }

    #[test]
    fn ks_rejects_wrong_mean() {
        let mut rng = RandomSource::new(12).rng();
        let samples: Vec<f64> = (0..2000).map(|_| sample_exp(1.0, &mut rng)).collect();
        let t = ks_exponential(&samples, 2.0).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn ks_two_sample_same_law() {
        let mut rng = RandomSource::new(13).rng();
        let a: Vec<f64> = (0..5000).map(|_| sample_exp(1.0, &mut rng)).collect();
        let b: Vec<f64> = (0..5000).map(|_| sample_exp(1.0, &mut rng)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        let c: Vec<f64> = (0..5000).map(|_| sample_exp(1.3, &mut rng)).collect();
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-4);
    }
}
