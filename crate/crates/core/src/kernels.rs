//! B-spline interpolating densities and the DAAS sampler built on them.
//!
//! The degree-`D` kernel is the density of a sum of `D + 1` independent
//! uniforms on `[-1/2, 1/2)`. Placing a kernel scaled to the grid step at
//! every grid point and mixing with the ancestor weights gives the compound
//! density
//!
//! ```text
//! q(x) = sum_k (K/2) w_D((K/2)(x - x_k)) p[k]
//! ```
//!
//! with kernels wrapped around the circle. For `D = 1` this is exactly the
//! piecewise linear interpolant of the density through the grid values.

use rand::Rng;

use crate::ancestor::{AliasTable, AncestorPmf};
use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::model::{EvalCounter, FbmModel};
use crate::refine::wrap;
use crate::streams::for_each_chunk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    degree: u32,
}

impl KernelSpec {
    pub const UNIFORM: KernelSpec = KernelSpec { degree: 0 };
    pub const TRIANGLE: KernelSpec = KernelSpec { degree: 1 };
    pub const QUADRATIC: KernelSpec = KernelSpec { degree: 2 };

    pub fn new(degree: u32) -> Result<Self> {
        match degree {
            0..=2 => Ok(Self { degree }),
            _ => Err(Error::UnsupportedDegree(degree)),
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Half-width of the support, `(D + 1) / 2`.
    pub fn radius(&self) -> f64 {
        (self.degree + 1) as f64 / 2.0
    }

    pub fn variance(&self) -> f64 {
        (self.degree + 1) as f64 / 12.0
    }

    pub fn pdf(&self, u: f64) -> f64 {
        match self.degree {
            0 => {
                if (-0.5..0.5).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            1 => (1.0 - u.abs()).max(0.0),
            _ => {
                let a = u.abs();
                if a <= 0.5 {
                    0.75 - u * u
                } else if a <= 1.5 {
                    0.5 * (1.5 - a) * (1.5 - a)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        let r = self.radius();
        if u <= -r {
            return 0.0;
        }
        if u >= r {
            return 1.0;
        }
        match self.degree {
            0 => u + 0.5,
            1 if u < 0.0 => 0.5 * (u + 1.0) * (u + 1.0),
            1 => 1.0 - 0.5 * (1.0 - u) * (1.0 - u),
            _ if u < -0.5 => (u + 1.5).powi(3) / 6.0,
            _ if u < 0.5 => 0.5 + 0.75 * u - u * u * u / 3.0,
            _ => 1.0 - (1.5 - u).powi(3) / 6.0,
        }
    }

    /// Sum of `D + 1` uniforms on `[-1/2, 1/2)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (0..=self.degree).map(|_| rng.random::<f64>() - 0.5).sum()
    }
}

/// Fractional grid coordinate `(x + 1) K / 2` of a circle point.
fn grid_coordinate(x: f64, k: usize) -> f64 {
    (x + 1.0) * k as f64 / 2.0
}

/// Compound density `q(x)`; only kernels whose support covers `x` are visited.
pub fn compound_pdf(pmf: &AncestorPmf, kernel: KernelSpec, x: f64) -> f64 {
    let k = pmf.len();
    let probs = pmf.probs();
    let t = grid_coordinate(x, k);
    let r = kernel.radius();
    // Integer j indexes kernel copies on the unrolled line; copy j sits at
    // grid cell j mod K, one period over for every multiple of K.
    let first = (t - r).ceil() as i64;
    let last = (t + r).floor() as i64;
    let total: f64 = (first..=last)
        .map(|j| kernel.pdf(t - j as f64) * probs[j.rem_euclid(k as i64) as usize])
        .sum();
    total * k as f64 / 2.0
}

/// Compound distribution function `Q(x) = integral of q over [-1, x]`.
pub fn compound_cdf(pmf: &AncestorPmf, kernel: KernelSpec, x: f64) -> f64 {
    let k = pmf.len();
    let probs = pmf.probs();
    let t = grid_coordinate(x.clamp(-1.0, 1.0), k);
    let r = kernel.radius();
    let first = (-r).floor() as i64;
    let last = (t + r).ceil() as i64;
    (first..=last)
        .map(|j| {
            let j_f = j as f64;
            (kernel.cdf(t - j_f) - kernel.cdf(-j_f)) * probs[j.rem_euclid(k as i64) as usize]
        })
        .sum()
}

/// Ancestor, alias table and kernel ready for repeated draws.
#[derive(Debug, Clone)]
pub struct DaasSampler {
    pmf: AncestorPmf,
    table: AliasTable,
    kernel: KernelSpec,
}

impl DaasSampler {
    /// Builds the ancestor with one grid evaluation of `K` points.
    pub fn new(
        model: &FbmModel,
        k: usize,
        kernel: KernelSpec,
        counter: &mut EvalCounter,
    ) -> Result<Self> {
        let pmf = AncestorPmf::from_model(model, k, counter)?;
        Ok(Self::from_pmf(pmf, kernel))
    }

    pub fn from_pmf(pmf: AncestorPmf, kernel: KernelSpec) -> Self {
        let table = AliasTable::new(&pmf);
        Self { pmf, table, kernel }
    }

    pub fn pmf(&self) -> &AncestorPmf {
        &self.pmf
    }

    pub fn table(&self) -> &AliasTable {
        &self.table
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// Places a draw from the ancestor cell `cell` at kernel offset `offset`
    /// (in grid units) and wraps it onto the circle.
    #[inline]
    pub fn place(&self, cell: usize, offset: f64) -> f64 {
        wrap(-1.0 + self.pmf.step() * (cell as f64 + offset))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let cell = self.table.sample(rng);
        self.place(cell, self.kernel.sample(rng))
    }

    /// Fills a batch of `count` samples; costs no model evaluations.
    pub fn sample_batch<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        let mut samples = vec![0.0; count];
        for_each_chunk(&mut samples, rng, |chunk_rng, chunk| {
            for x in chunk.iter_mut() {
                *x = self.sample(chunk_rng);
            }
        });
        samples
    }

    pub fn density(&self, x: f64) -> f64 {
        compound_pdf(&self.pmf, self.kernel, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        compound_cdf(&self.pmf, self.kernel, x)
    }
}

/// Discretized approximate ancestral sampling of `count` points. The ledger
/// grows by exactly `K` density evaluations regardless of `count`.
pub fn daas_sample<R: Rng + ?Sized>(
    model: &FbmModel,
    k: usize,
    kernel: KernelSpec,
    count: usize,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut spent = EvalCounter::new();
    let sampler = DaasSampler::new(model, k, kernel, &mut spent)?;
    *counter += spent;
    Ok(SampleBatch {
        samples: sampler.sample_batch(count, rng),
        evals: spent,
        ..SampleBatch::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof;
    use crate::model::grid_point;
    use crate::seeded_rng;
    use proptest::prelude::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n)
            .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(KernelSpec::new(3), Err(Error::UnsupportedDegree(3)));
    }

    #[test]
    fn kernel_values() {
        assert_eq!(KernelSpec::TRIANGLE.pdf(0.0), 1.0);
        assert_eq!(KernelSpec::TRIANGLE.pdf(0.5), 0.5);
        assert_eq!(KernelSpec::QUADRATIC.pdf(0.0), 0.75);
        assert_eq!(KernelSpec::QUADRATIC.pdf(1.0), 0.125);
        assert_eq!(KernelSpec::UNIFORM.pdf(-0.5), 1.0);
        assert_eq!(KernelSpec::UNIFORM.pdf(0.5), 0.0);
    }

    #[test]
    fn kernels_are_normalized_symmetric_densities() {
        for d in 0..=2 {
            let kernel = KernelSpec::new(d).unwrap();
            let r = kernel.radius();
            // split at the breakpoints so Simpson is exact on each polynomial piece
            let mut mass = 0.0;
            let mut a = -r;
            while a < r - 1e-12 {
                mass += simpson(|u| kernel.pdf(u), a + 1e-13, a + 0.5 - 1e-13, 2);
                a += 0.5;
            }
            assert!((mass - 1.0).abs() < 1e-9, "D={d} mass={mass}");
            for i in 0..50 {
                let u = 0.037 * i as f64;
                if d > 0 || u.abs() < 0.5 {
                    assert_eq!(kernel.pdf(u), kernel.pdf(-u));
                }
                let fd = (kernel.cdf(u + 1e-7) - kernel.cdf(u - 1e-7)) / 2e-7;
                if (u * 2.0 - (u * 2.0).round()).abs() > 1e-3 {
                    assert!((fd - kernel.pdf(u)).abs() < 1e-6, "D={d} u={u}");
                }
            }
            assert!(kernel.pdf(r + 1e-9) == 0.0 && kernel.pdf(-r - 1e-9) == 0.0);
        }
    }

    #[test]
    fn kernel_draws() {
        let mut rng = seeded_rng(17);
        for _ in 0..10_000 {
            let u = KernelSpec::UNIFORM.sample(&mut rng);
            assert!((-0.5..0.5).contains(&u));
        }
        let n = 1_000_000;
        let mean = (0..n).map(|_| KernelSpec::TRIANGLE.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (1.0f64 / 6.0).sqrt() / (n as f64).sqrt(), "{mean}");

        let kernel = KernelSpec::QUADRATIC;
        let draws: Vec<f64> = (0..n).map(|_| kernel.sample(&mut rng) / 3.0).collect();
        let edges: Vec<f64> = (0..=30).map(|i| -0.5 + i as f64 / 30.0).collect();
        let probs: Vec<f64> = edges
            .windows(2)
            .map(|w| kernel.cdf(3.0 * w[1]) - kernel.cdf(3.0 * w[0]))
            .collect();
        let test = gof::chi_square_binned(&draws, &edges, &probs).unwrap();
        assert!(test.p_value > 1e-3, "{test:?}");
    }

    #[test]
    fn compound_of_uniform_is_uniform() {
        let mut counter = EvalCounter::new();
        let pmf = AncestorPmf::from_model(&FbmModel::uniform(), 5, &mut counter).unwrap();
        for d in 0..=2 {
            let kernel = KernelSpec::new(d).unwrap();
            for i in 0..100 {
                let x = -1.0 + 0.02 * i as f64;
                assert!((compound_pdf(&pmf, kernel, x) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triangle_compound_hand_value() {
        let model = FbmModel::from_real(&[1.0, 1.0]).unwrap();
        let pmf = AncestorPmf::from_model(&model, 4, &mut EvalCounter::new()).unwrap();
        assert!((compound_pdf(&pmf, KernelSpec::TRIANGLE, -0.75) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangle_compound_interpolates_knots() {
        let mut rng = seeded_rng(31);
        for order in [1usize, 6, 25] {
            let model = FbmModel::random(order, &mut rng);
            for k in [2 * order + 1, 4 * order, 97] {
                let pmf = AncestorPmf::from_model(&model, k, &mut EvalCounter::new()).unwrap();
                for j in 0..k {
                    let x = grid_point(j, k);
                    let q = compound_pdf(&pmf, KernelSpec::TRIANGLE, x);
                    assert!((q - model.density(x)).abs() < 1e-12, "N={order} K={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn compound_cdf_matches_quadrature() {
        let model = FbmModel::random(5, &mut seeded_rng(3));
        let pmf = AncestorPmf::from_model(&model, 16, &mut EvalCounter::new()).unwrap();
        for d in 0..=2 {
            let kernel = KernelSpec::new(d).unwrap();
            assert!(compound_cdf(&pmf, kernel, -1.0).abs() < 1e-14);
            assert!((compound_cdf(&pmf, kernel, 1.0) - 1.0).abs() < 1e-12);
            for x in [-0.9, -0.31, 0.0, 0.44, 0.97] {
                // q is polynomial of degree <= 2 between multiples of 1/32, where
                // two-panel Simpson is exact
                let mut want = 0.0;
                let mut a: f64 = -1.0;
                while a < x {
                    let b = (a + 1.0 / 32.0).min(x);
                    want += simpson(|t| compound_pdf(&pmf, kernel, t), a + 1e-14, b - 1e-14, 2);
                    a = b;
                }
                assert!((compound_cdf(&pmf, kernel, x) - want).abs() < 1e-10, "D={d} x={x}");
            }
        }
    }

    #[test]
    fn daas_counts_only_grid_evaluations() {
        let mut rng = seeded_rng(10);
        let model = FbmModel::random(10, &mut rng);
        let mut counter = EvalCounter::new();
        let batch = daas_sample(&model, 50, KernelSpec::TRIANGLE, 1_000_000, &mut rng, &mut counter)
            .unwrap();
        assert_eq!(counter.pdf_evals, 50);
        assert_eq!(counter.model_evals(), 50);
        assert_eq!(batch.evals.model_evals(), 50);
        assert!(batch.samples.iter().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn daas_rejects_bad_parameters() {
        let model = FbmModel::random(3, &mut seeded_rng(1));
        let mut counter = EvalCounter::new();
        let mut rng = seeded_rng(1);
        assert!(daas_sample(&model, 6, KernelSpec::TRIANGLE, 10, &mut rng, &mut counter).is_err());
        assert!(daas_sample(&model, 7, KernelSpec::TRIANGLE, 0, &mut rng, &mut counter).is_err());
        assert_eq!(counter.pdf_evals, 0);
    }

    #[test]
    fn daas_of_uniform_passes_ks() {
        let mut rng = seeded_rng(77);
        let batch = daas_sample(
            &FbmModel::uniform(),
            5,
            KernelSpec::TRIANGLE,
            10_000,
            &mut rng,
            &mut EvalCounter::new(),
        )
        .unwrap();
        let ks = gof::ks_test(&batch.samples, |x| (x + 1.0) / 2.0);
        assert!(ks.p_value > 1e-3, "{ks:?}");
    }

    #[test]
    fn daas_matches_compound_density() {
        let mut rng = seeded_rng(5);
        let model = FbmModel::random(10, &mut rng);
        let sampler = DaasSampler::new(&model, 50, KernelSpec::TRIANGLE, &mut EvalCounter::new())
            .unwrap();
        let samples = sampler.sample_batch(100_000, &mut rng);
        let test = gof::chi_square_uniform_bins(&samples, 50, |x| sampler.cdf(x)).unwrap();
        assert!(test.p_value > 1e-3, "{test:?}");
    }

    #[test]
    fn wrapped_extremes_stay_on_circle() {
        let model = FbmModel::random(4, &mut seeded_rng(8));
        let sampler = DaasSampler::new(&model, 9, KernelSpec::QUADRATIC, &mut EvalCounter::new())
            .unwrap();
        for cell in [0, 8] {
            for offset in [-1.5, -1.4999999, -0.5, 0.0, 0.4999999, 1.4999999, 1.5] {
                let x = sampler.place(cell, offset);
                assert!((-1.0..1.0).contains(&x), "cell={cell} offset={offset} x={x}");
            }
        }
    }

    #[test]
    fn daas_is_deterministic() {
        let model = FbmModel::random(6, &mut seeded_rng(2));
        let draw = || {
            daas_sample(&model, 20, KernelSpec::QUADRATIC, 10_000, &mut seeded_rng(3),
                        &mut EvalCounter::new()).unwrap().samples
        };
        assert_eq!(draw(), draw());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn compound_density_normalizes(seed in any::<u64>(), order in 1usize..20,
                                       wide in any::<bool>(), degree in 0u32..3) {
            let model = FbmModel::random(order, &mut seeded_rng(seed));
            let k = if wide { 4 * order } else { 2 * order + 1 };
            let pmf = AncestorPmf::from_model(&model, k, &mut EvalCounter::new()).unwrap();
            let kernel = KernelSpec::new(degree).unwrap();
            // midpoint rule on a grid aligned with every kernel breakpoint
            let cells = 2 * k * 200;
            let h = 2.0 / cells as f64;
            let mass: f64 = (0..cells)
                .map(|i| compound_pdf(&pmf, kernel, -1.0 + (i as f64 + 0.5) * h) * h)
                .sum();
            prop_assert!((mass - 1.0).abs() < 1e-6, "mass={}", mass);
        }

        #[test]
        fn triangle_compound_is_piecewise_linear(seed in any::<u64>(), order in 1usize..30,
                                                 extra in 0usize..40, frac in 0.0f64..1.0,
                                                 cell in any::<prop::sample::Index>()) {
            let model = FbmModel::random(order, &mut seeded_rng(seed));
            let k = 2 * order + 1 + extra;
            let pmf = AncestorPmf::from_model(&model, k, &mut EvalCounter::new()).unwrap();
            let j = cell.index(k);
            let left = grid_point(j, k);
            let x = left + frac * 2.0 / k as f64;
            prop_assume!(x < 1.0);
            let right_value = model.density(if j + 1 == k { -1.0 } else { grid_point(j + 1, k) });
            let want = (1.0 - frac) * model.density(left) + frac * right_value;
            prop_assert!((compound_pdf(&pmf, KernelSpec::TRIANGLE, x) - want).abs() < 1e-12);
        }
    }
}
