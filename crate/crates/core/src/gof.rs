//! Goodness-of-fit tests used to validate samplers against analytic
//! distributions.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum expected count per chi-square bin; sparser neighbours are merged.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square) or sample size (KS).
    pub dof: usize,
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous distribution
/// function, with Stephens' finite-sample correction for the p-value.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> GofTest {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    GofTest {
        statistic,
        p_value: kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic),
        dof: sorted.len(),
    }
}

/// Pearson chi-square test of `samples` binned by `edges` against the bin
/// probabilities `probs` (`edges.len() == probs.len() + 1`).
pub fn chi_square_binned(samples: &[f64], edges: &[f64], probs: &[f64]) -> Result<GofTest> {
    if edges.len() != probs.len() + 1 || probs.is_empty() {
        return Err(Error::InvalidParameter(
            "chi-square needs one more edge than bin probabilities".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let mut counts = vec![0usize; probs.len()];
    for &x in samples {
        if !(lo..hi).contains(&x) {
            return Err(Error::InvalidParameter(format!("sample {x} outside [{lo}, {hi})")));
        }
        let bin = edges.partition_point(|&e| e <= x) - 1;
        counts[bin] += 1;
    }

    let n = samples.len() as f64;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        pending.0 += c as f64;
        pending.1 += p * n;
        if pending.1 >= MIN_EXPECTED {
            merged.push(pending);
            pending = (0.0, 0.0);
        }
    }
    match merged.last_mut() {
        Some(last) => {
            last.0 += pending.0;
            last.1 += pending.1;
        }
        None => merged.push(pending),
    }
    if merged.len() < 2 {
        return Err(Error::InvalidParameter("too few populated bins for chi-square".into()));
    }
    let statistic: f64 = merged.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(GofTest {
        statistic,
        p_value: 1.0 - dist.cdf(statistic),
        dof,
    })
}

/// Chi-square test on `bins` equal-width bins over `[-1, 1)`, with bin
/// probabilities taken from differences of `cdf`.
pub fn chi_square_uniform_bins(
    samples: &[f64],
    bins: usize,
    cdf: impl Fn(f64) -> f64,
) -> Result<GofTest> {
    let edges: Vec<f64> = (0..=bins)
        .map(|i| -1.0 + 2.0 * i as f64 / bins as f64)
        .collect();
    let probs: Vec<f64> = edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect();
    chi_square_binned(samples, &edges, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use rand::Rng;

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ~ 0.049, Q(1.63) ~ 0.010, Q(1.95) ~ 0.001
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 1e-3);
        assert!((kolmogorov_survival(1.949) - 0.001).abs() < 1e-4);
    }

    #[test]
    fn ks_accepts_and_rejects() {
        let mut rng = seeded_rng(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        assert!(ks_test(&xs, |x| (x + 1.0) / 2.0).p_value > 1e-3);
        let squeezed: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        assert!(ks_test(&squeezed, |x| (x + 1.0) / 2.0).p_value < 1e-6);
    }

    #[test]
    fn chi_square_accepts_and_rejects() {
        let mut rng = seeded_rng(2);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let ok = chi_square_uniform_bins(&xs, 40, |x| (x + 1.0) / 2.0).unwrap();
        assert_eq!(ok.dof, 39);
        assert!(ok.p_value > 1e-3);
        let skew: Vec<f64> = xs.iter().map(|x| if *x > 0.9 { -x } else { *x }).collect();
        assert!(chi_square_uniform_bins(&skew, 40, |x| (x + 1.0) / 2.0).unwrap().p_value < 1e-6);
    }

    #[test]
    fn chi_square_merges_sparse_bins() {
        let xs = vec![-0.5; 1000];
        let edges = [-1.0, -0.9, 0.0, 1.0];
        // the 2-count first bin folds into the second, leaving two bins
        let test = chi_square_binned(&xs, &edges, &[0.002, 0.5, 0.498]).unwrap();
        assert_eq!(test.dof, 1);
        let single = chi_square_binned(&xs, &edges, &[0.001, 0.998, 0.001]);
        assert!(single.is_err());
        assert!(chi_square_binned(&[2.0], &edges, &[0.2, 0.4, 0.4]).is_err());
        assert!(chi_square_binned(&[], &edges, &[0.2, 0.4, 0.4]).is_err());
    }
}
