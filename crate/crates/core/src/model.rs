//! The Fourier basis density model on the circle `[-1, 1)`.
//!
//! The density is a truncated Fourier series whose coefficients are the
//! autocorrelation of a free complex amplitude sequence `a_0..a_N`:
//!
//! ```text
//! c_n  = sum_{k=0}^{N-n} a_k conj(a_{k+n})
//! p(x) = 1/2 + sum_{n=1}^{N} Re{ (c_n / c_0) exp(i pi n x) }
//! ```
//!
//! which makes `p(x) = |A(x)|^2 / (2 c_0)` for `A(x) = sum_k a_k exp(-i pi k x)`,
//! so the density is non-negative for every choice of amplitudes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Lower clamp applied to densities that appear in a denominator or a logarithm.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Grids at or below this size are evaluated term by term instead of by FFT.
pub const FFT_CROSSOVER: usize = 32;

/// Ledger of model evaluations spent by a sampling run.
///
/// A score evaluation shares the coefficient pass with the density but is
/// billed as [`EvalCounter::SCORE_COST`] model evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EvalCounter {
    pub pdf_evals: u64,
    pub score_evals: u64,
}

impl EvalCounter {
    pub const SCORE_COST: u64 = 2;

    pub fn new() -> Self {
        Self::default()
    }

    /// Total model evaluations: density evaluations plus the score surcharge.
    pub fn model_evals(&self) -> u64 {
        self.pdf_evals + Self::SCORE_COST * self.score_evals
    }

    /// Evaluations recorded since `earlier` was captured from the same ledger.
    pub fn since(&self, earlier: &EvalCounter) -> EvalCounter {
        EvalCounter {
            pdf_evals: self.pdf_evals - earlier.pdf_evals,
            score_evals: self.score_evals - earlier.score_evals,
        }
    }
}

impl Add for EvalCounter {
    type Output = EvalCounter;

    fn add(self, rhs: EvalCounter) -> EvalCounter {
        EvalCounter {
            pdf_evals: self.pdf_evals + rhs.pdf_evals,
            score_evals: self.score_evals + rhs.score_evals,
        }
    }
}

impl AddAssign for EvalCounter {
    fn add_assign(&mut self, rhs: EvalCounter) {
        self.pdf_evals += rhs.pdf_evals;
        self.score_evals += rhs.score_evals;
    }
}

/// Closed-form bounds on the first and second derivative of any density of
/// order `N`, obtained from `|c_n| <= c_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBounds {
    pub first: f64,
    pub second: f64,
}

pub fn derivative_bounds(order: usize) -> DerivativeBounds {
    let n = order as f64;
    DerivativeBounds {
        first: PI * n * (n + 1.0) / 2.0,
        second: PI * PI * n * (n + 1.0) * (2.0 * n + 1.0) / 6.0,
    }
}

/// Maps a circle coordinate in `(-1, 1)` onto the real line as `s * atanh(x) + t`.
pub fn to_real_line(x: f64, scale: f64, offset: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::OutsideDomain(x));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidScale(scale));
    }
    Ok(scale * x.atanh() + offset)
}

/// Autocorrelation `c_n = sum_k a_k conj(a_{k+n})` for `n = 0..=N`.
pub fn autocorrelation(amplitudes: &[Complex64]) -> Vec<Complex64> {
    let len = amplitudes.len();
    (0..len)
        .map(|n| {
            amplitudes[..len - n]
                .iter()
                .zip(&amplitudes[n..])
                .map(|(a, b)| a * b.conj())
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbmModel {
    amplitudes: Vec<Complex64>,
    coefficients: Vec<Complex64>,
    /// `c_n / c_0` for `n = 1..=N`, stored at index `n - 1`.
    ratios: Vec<Complex64>,
    scale: f64,
    offset: f64,
}

impl FbmModel {
    pub fn new(amplitudes: Vec<Complex64>, scale: f64, offset: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyAmplitudes);
        }
        if let Some(index) = amplitudes.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAmplitude { index });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidScale(scale));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter(format!("offset {offset} is not finite")));
        }
        let coefficients = autocorrelation(&amplitudes);
        let c0 = coefficients[0].re;
        if c0 <= 0.0 {
            return Err(Error::ZeroAmplitudes);
        }
        let ratios = coefficients[1..].iter().map(|c| c / c0).collect();
        Ok(Self {
            amplitudes,
            coefficients,
            ratios,
            scale,
            offset,
        })
    }

    /// Model with real amplitudes and the identity real-line transform.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            1.0,
            0.0,
        )
    }

    /// The uniform density `p(x) = 1/2`.
    pub fn uniform() -> Self {
        Self::from_real(&[1.0]).expect("a single unit amplitude is valid")
    }

    /// Draws `N + 1` amplitudes with independent standard normal real and
    /// imaginary parts.
    pub fn random<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Self {
        loop {
            let amplitudes: Vec<Complex64> = (0..=order)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            // All-zero draws have probability zero but are not representable.
            if let Ok(model) = Self::new(amplitudes, 1.0, 0.0) {
                return model;
            }
        }
    }

    /// Number of frequency terms `N`.
    pub fn order(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Fourier coefficients `c_0..c_N`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient for any integer frequency; negative frequencies follow
    /// from `c_{-n} = conj(c_n)` and frequencies beyond `N` are zero.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        let idx = n.unsigned_abs() as usize;
        match self.coefficients.get(idx) {
            Some(c) if n < 0 => c.conj(),
            Some(c) => *c,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Normalization constant `Z = 2 c_0`.
    pub fn normalizer(&self) -> f64 {
        2.0 * self.coefficients[0].re
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Smallest admissible discretization grid, `2N + 1`.
    pub fn min_grid_size(&self) -> usize {
        2 * self.order() + 1
    }

    pub fn check_grid(&self, k: usize) -> Result<()> {
        let min = self.min_grid_size();
        if k < min {
            return Err(Error::GridTooSmall {
                k,
                order: self.order(),
                min,
            });
        }
        Ok(())
    }

    /// `sum_n Re{ w_n(r_n) z^n }` over `n = 1..=N` with `z = exp(i pi x)`.
    fn series(&self, x: f64, weight: impl Fn(usize, Complex64) -> Complex64) -> f64 {
        let z = Complex64::cis(PI * x);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (i, r) in self.ratios.iter().enumerate() {
            zn *= z;
            acc += (weight(i + 1, *r) * zn).re;
        }
        acc
    }

    /// Density without the non-negativity clamp; may be a tiny negative
    /// number near a zero of the density.
    pub fn density_unclamped(&self, x: f64) -> f64 {
        0.5 + self.series(x, |_, r| r)
    }

    /// Density clamped at zero. Does not touch any ledger.
    pub fn density(&self, x: f64) -> f64 {
        self.density_unclamped(x).max(0.0)
    }

    pub fn pdf(&self, x: f64, counter: &mut EvalCounter) -> f64 {
        counter.pdf_evals += 1;
        self.density(x)
    }

    /// Term-wise derivative of the density of the given order.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.density_unclamped(x);
        }
        self.series(x, |n, r| r * Complex64::new(0.0, PI * n as f64).powu(order))
    }

    /// Density and first derivative from a single pass over the coefficients.
    pub fn density_and_slope(&self, x: f64) -> (f64, f64) {
        let z = Complex64::cis(PI * x);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut value = 0.5;
        let mut slope = 0.0;
        for (i, r) in self.ratios.iter().enumerate() {
            zn *= z;
            let term = r * zn;
            value += term.re;
            // Re{ i pi n t } = -pi n Im{t}
            slope -= PI * (i + 1) as f64 * term.im;
        }
        (value, slope)
    }

    /// Clamped density and score `p'(x) / max(p(x), floor)`, billed as one
    /// score evaluation.
    pub fn density_and_score(&self, x: f64, counter: &mut EvalCounter) -> (f64, f64) {
        counter.score_evals += 1;
        let (value, slope) = self.density_and_slope(x);
        (value.max(0.0), slope / value.max(DENSITY_FLOOR))
    }

    pub fn score(&self, x: f64, counter: &mut EvalCounter) -> f64 {
        self.density_and_score(x, counter).1
    }

    /// Cumulative distribution from the term-wise antiderivative of the density.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let z = Complex64::cis(PI * x);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = 0.5 * (x + 1.0);
        for (i, r) in self.ratios.iter().enumerate() {
            let n = i + 1;
            zn *= z;
            let at_start = if n % 2 == 0 { 1.0 } else { -1.0 };
            let integral = (zn - at_start) / Complex64::new(0.0, PI * n as f64);
            acc += (r * integral).re;
        }
        acc.clamp(0.0, 1.0)
    }

    /// Values of the `order`-th derivative (order 0 being the unclamped
    /// density) at `x_k = -1 + 2k/K`, via an inverse DFT of the
    /// Hermitian-extended coefficient vector.
    pub fn derivative_grid(&self, k: usize, order: u32) -> Result<Vec<f64>> {
        self.check_grid(k)?;
        if k <= FFT_CROSSOVER {
            return Ok((0..k)
                .map(|j| self.derivative(grid_point(j, k), order))
                .collect());
        }
        // exp(i pi n x_k) = (-1)^n exp(2 pi i n k / K)
        let mut buffer = vec![Complex64::new(0.0, 0.0); k];
        if order == 0 {
            buffer[0] = Complex64::new(0.5, 0.0);
        }
        for (i, r) in self.ratios.iter().enumerate() {
            let n = i + 1;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let w = r * Complex64::new(0.0, PI * n as f64).powu(order) * sign * 0.5;
            buffer[n] += w;
            buffer[k - n] += w.conj();
        }
        FftPlanner::<f64>::new()
            .plan_fft_inverse(k)
            .process(&mut buffer);
        Ok(buffer.into_iter().map(|v| v.re).collect())
    }

    /// Unclamped density on the grid `x_k = -1 + 2k/K`. Not billed.
    pub fn grid_unclamped(&self, k: usize) -> Result<Vec<f64>> {
        self.derivative_grid(k, 0)
    }

    /// Clamped density on the grid `x_k = -1 + 2k/K`; bills `K` evaluations.
    pub fn pdf_grid(&self, k: usize, counter: &mut EvalCounter) -> Result<Vec<f64>> {
        let mut values = self.grid_unclamped(k)?;
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        counter.pdf_evals += k as u64;
        Ok(values)
    }

    pub fn derivative_bounds(&self) -> DerivativeBounds {
        derivative_bounds(self.order())
    }

    /// Real-line image of `x` under this model's `(s, t)` transform.
    pub fn to_real_line(&self, x: f64) -> Result<f64> {
        to_real_line(x, self.scale, self.offset)
    }

    /// Flat text form: a header line `N s t` followed by `N + 1` lines
    /// `re(a_k) im(a_k)`, all with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {:.16e} {:.16e}", self.order(), self.scale, self.offset);
        for a in &self.amplitudes {
            let _ = writeln!(out, "{:.16e} {:.16e}", a.re, a.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line, header) = lines.next().ok_or(Error::ModelText {
            line: 1,
            reason: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::ModelText {
                line,
                reason: format!("expected `N s t`, found {} fields", fields.len()),
            });
        }
        let order: usize = parse_field(fields[0], line)?;
        let scale: f64 = parse_field(fields[1], line)?;
        let offset: f64 = parse_field(fields[2], line)?;

        let mut amplitudes = Vec::with_capacity(order + 1);
        for (line, body) in lines {
            let parts: Vec<&str> = body.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::ModelText {
                    line,
                    reason: "expected `re im`".into(),
                });
            }
            amplitudes.push(Complex64::new(
                parse_field(parts[0], line)?,
                parse_field(parts[1], line)?,
            ));
        }
        if amplitudes.len() != order + 1 {
            return Err(Error::ModelText {
                line: text.lines().count(),
                reason: format!("expected {} amplitudes, found {}", order + 1, amplitudes.len()),
            });
        }
        Self::new(amplitudes, scale, offset)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field.parse().map_err(|_| Error::ModelText {
        line,
        reason: format!("cannot parse `{field}`"),
    })
}

/// Grid coordinate `x_k = -1 + 2k/K`.
pub fn grid_point(k: usize, grid_size: usize) -> f64 {
    -1.0 + 2.0 * k as f64 / grid_size as f64
}
