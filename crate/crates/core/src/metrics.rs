//! Divergences between densities and between sample sets, plus the
//! closed-form worst-case bounds for triangle-kernel DAAS.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::kernels::DaasSampler;
use crate::model::{FbmModel, DENSITY_FLOOR};
use crate::refine::wrap;

/// Starting resolution of refined quadratures.
pub const DEFAULT_QUADRATURE_POINTS: usize = 20_000;
/// Refinement stops once successive estimates differ by less than this.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;
/// Cap on grid doublings during refinement.
pub const MAX_DOUBLINGS: u32 = 5;
/// Minimum grid accepted by the fixed-resolution quadratures.
pub const MIN_QUADRATURE_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceMethod {
    Quadrature,
    MonteCarlo,
    Empirical,
}

impl fmt::Display for DivergenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte-carlo",
            Self::Empirical => "empirical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub estimate: f64,
    /// Zero for deterministic estimates.
    pub std_error: f64,
    pub method: DivergenceMethod,
}

impl DivergenceReport {
    fn exact(estimate: f64, method: DivergenceMethod) -> Self {
        Self {
            estimate,
            std_error: 0.0,
            method,
        }
    }

    /// `method,estimate,std_error`
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.method, self.estimate, self.std_error)
    }
}

/// Worst-case total variation between a density of order `N` and its
/// triangle-kernel DAAS approximation on `K` points.
pub fn tv_bound(order: usize, k: usize) -> f64 {
    let n = order as f64;
    let k = k as f64;
    PI * PI * n * (n + 1.0) * (2.0 * n + 1.0) / (12.0 * k * k)
}

/// Worst-case Wasserstein-1 distance, twice [`tv_bound`].
pub fn w1_bound(order: usize, k: usize) -> f64 {
    2.0 * tv_bound(order, k)
}

fn check_points(grid_points: usize) -> Result<()> {
    if grid_points < MIN_QUADRATURE_POINTS {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least {MIN_QUADRATURE_POINTS} points, got {grid_points}"
        )));
    }
    Ok(())
}

fn sample_grid(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let h = 2.0 / n as f64;
    (0..n).map(|i| f(-1.0 + i as f64 * h)).collect()
}

/// `1/2 integral |p - q|` from values at `x_i = -1 + 2i/n`, using the
/// trapezoid rule for periodic integrands.
pub fn tv_from_grids(p: &[f64], q: &[f64]) -> f64 {
    let h = 2.0 / p.len() as f64;
    0.5 * h * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `integral |P - Q|` where `P - Q` is the running trapezoid integral of the
/// density difference on the periodic grid.
pub fn w1_from_grids(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len();
    let h = 2.0 / n as f64;
    let diff = |i: usize| p[i % n] - q[i % n];
    let mut running = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        running += 0.5 * h * (diff(i) + diff(i + 1));
        // trapezoid weight 1 at interior nodes; the end nodes pair up to one
        // full weight, and the running integral starts at zero
        let weight = if i + 1 == n { 0.5 } else { 1.0 };
        total += weight * running.abs();
    }
    h * total
}

/// Total variation by periodic trapezoid quadrature at `grid_points` nodes.
pub fn tv_quadrature(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    grid_points: usize,
) -> Result<DivergenceReport> {
    check_points(grid_points)?;
    Ok(DivergenceReport::exact(
        tv_from_grids(&sample_grid(&p, grid_points), &sample_grid(&q, grid_points)),
        DivergenceMethod::Quadrature,
    ))
}

/// One-dimensional Wasserstein-1 distance `integral |P - Q|` by quadrature.
pub fn w1_quadrature(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    grid_points: usize,
) -> Result<DivergenceReport> {
    check_points(grid_points)?;
    Ok(DivergenceReport::exact(
        w1_from_grids(&sample_grid(&p, grid_points), &sample_grid(&q, grid_points)),
        DivergenceMethod::Quadrature,
    ))
}

/// Repeats `estimate(n)` with doubling `n` until two successive values agree
/// within [`QUADRATURE_TOLERANCE`] or the doubling cap is reached.
fn refine(start: usize, mut estimate: impl FnMut(usize) -> f64) -> f64 {
    let mut n = start;
    let mut current = estimate(n);
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let next = estimate(n);
        let settled = (next - current).abs() < QUADRATURE_TOLERANCE;
        current = next;
        if settled {
            break;
        }
    }
    current
}

/// Total variation with grid refinement from [`DEFAULT_QUADRATURE_POINTS`].
pub fn tv_quadrature_refined(p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> DivergenceReport {
    let value = refine(DEFAULT_QUADRATURE_POINTS, |n| {
        tv_from_grids(&sample_grid(&p, n), &sample_grid(&q, n))
    });
    DivergenceReport::exact(value, DivergenceMethod::Quadrature)
}

/// Wasserstein-1 with grid refinement from [`DEFAULT_QUADRATURE_POINTS`].
pub fn w1_quadrature_refined(p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> DivergenceReport {
    let value = refine(DEFAULT_QUADRATURE_POINTS, |n| {
        w1_from_grids(&sample_grid(&p, n), &sample_grid(&q, n))
    });
    DivergenceReport::exact(value, DivergenceMethod::Quadrature)
}

/// Total variation and Wasserstein-1 between a model and the compound
/// density of a DAAS sampler. The quadrature grid is a multiple of `K`, so
/// every kernel breakpoint is a node, and the model is evaluated by FFT.
pub fn model_vs_compound(model: &FbmModel, sampler: &DaasSampler) -> (DivergenceReport, DivergenceReport) {
    let k = sampler.pmf().len();
    let start = DEFAULT_QUADRATURE_POINTS.div_ceil(k) * k;
    let grids = |n: usize| {
        let p = model
            .grid_unclamped(n)
            .expect("quadrature grid exceeds the minimum grid size");
        let q = sample_grid(|x| sampler.density(x), n);
        (p, q)
    };
    let tv = refine(start, |n| {
        let (p, q) = grids(n);
        tv_from_grids(&p, &q)
    });
    let w1 = refine(start, |n| {
        let (p, q) = grids(n);
        w1_from_grids(&p, &q)
    });
    (
        DivergenceReport::exact(tv, DivergenceMethod::Quadrature),
        DivergenceReport::exact(w1, DivergenceMethod::Quadrature),
    )
}

/// Monte Carlo estimate of `KL(p || q)` from samples of `p`, with `q`
/// floored at [`DENSITY_FLOOR`].
pub fn kl_monte_carlo(
    p_samples: &[f64],
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
) -> Result<DivergenceReport> {
    if p_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = p_samples.len() as f64;
    let terms: Vec<f64> = p_samples
        .iter()
        .map(|&x| (p(x).max(DENSITY_FLOOR) / q(x).max(DENSITY_FLOOR)).ln())
        .collect();
    let mean = terms.iter().sum::<f64>() / n;
    let var = if terms.len() > 1 {
        terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(DivergenceReport {
        estimate: mean,
        std_error: (var / n).sqrt(),
        method: DivergenceMethod::MonteCarlo,
    })
}

/// `KL(p || q)` by periodic trapezoid quadrature.
pub fn kl_quadrature(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    grid_points: usize,
) -> Result<DivergenceReport> {
    check_points(grid_points)?;
    let h = 2.0 / grid_points as f64;
    let value: f64 = (0..grid_points)
        .map(|i| {
            let x = -1.0 + i as f64 * h;
            let px = p(x);
            if px <= 0.0 {
                0.0
            } else {
                px * (px / q(x).max(DENSITY_FLOOR)).ln()
            }
        })
        .sum::<f64>()
        * h;
    Ok(DivergenceReport::exact(value, DivergenceMethod::Quadrature))
}

/// Wasserstein-1 distance between two empirical distributions on the
/// interval `[-1, 1)`, after wrapping both sample sets onto it.
///
/// Equal sizes average the gaps between matched order statistics; unequal
/// sizes integrate the gap between the two empirical distribution functions.
pub fn empirical_w1(xs: &[f64], ys: &[f64]) -> Result<DivergenceReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySamples);
    }
    let sorted = |v: &[f64]| {
        let mut s: Vec<f64> = v.iter().map(|&x| wrap(x)).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let (a, b) = (sorted(xs), sorted(ys));
    let estimate = if a.len() == b.len() {
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
    } else {
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0usize, 0usize);
        let mut total = 0.0;
        let mut last = a[0].min(b[0]);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            total += (i as f64 / na - j as f64 / nb).abs() * (next - last);
            while i < a.len() && a[i] == next {
                i += 1;
            }
            while j < b.len() && b[j] == next {
                j += 1;
            }
            last = next;
        }
        total
    };
    Ok(DivergenceReport::exact(estimate, DivergenceMethod::Empirical))
}
