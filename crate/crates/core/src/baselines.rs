//! Exact reference samplers: rejection from a uniform envelope and numerical
//! inversion of the distribution function.

use rand::Rng;

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::model::{EvalCounter, FbmModel};
use crate::streams::for_each_chunk;

/// Envelope constant `M = 1 + 2 sum_n |c_n| / c_0`.
///
/// Since `p(x) <= 1/2 + sum_n |c_n| / c_0`, `M` times the uniform density
/// `1/2` dominates the target everywhere.
pub fn envelope_constant(model: &FbmModel) -> f64 {
    let c0 = model.coefficients()[0].re;
    1.0 + 2.0 * model.coefficients()[1..].iter().map(|c| c.norm()).sum::<f64>() / c0
}

/// Draws `count` exact samples by rejection from the uniform envelope.
/// Every proposal bills one density evaluation; the proposal count is
/// recorded on the returned batch.
pub fn rejection_sample<R: Rng + ?Sized>(
    model: &FbmModel,
    count: usize,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let ceiling = envelope_constant(model) * 0.5;
    let mut samples = vec![0.0; count];
    let proposals: u64 = for_each_chunk(&mut samples, rng, |chunk_rng, chunk| {
        let mut proposals = 0u64;
        for slot in chunk.iter_mut() {
            *slot = loop {
                proposals += 1;
                let x = chunk_rng.random::<f64>() * 2.0 - 1.0;
                let u: f64 = chunk_rng.random();
                if u * ceiling <= model.density(x) {
                    break x;
                }
            };
        }
        proposals
    })
    .into_iter()
    .sum();

    let spent = EvalCounter {
        pdf_evals: proposals,
        score_evals: 0,
    };
    *counter += spent;
    Ok(SampleBatch {
        samples,
        evals: spent,
        proposals: Some(proposals),
        acceptance_rate: Some(count as f64 / proposals as f64),
        ..SampleBatch::default()
    })
}

/// Solves `cdf(x) = u` by bisection on `[-1, 1]` until the bracket is
/// narrower than `tol`; takes `ceil(log2(2 / tol))` halvings.
pub fn invert_cdf(model: &FbmModel, u: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if model.cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse-transform sampling through [`invert_cdf`].
pub fn inverse_transform_sample<R: Rng + ?Sized>(
    model: &FbmModel,
    count: usize,
    rng: &mut R,
    tol: f64,
) -> Result<SampleBatch> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut samples = vec![0.0; count];
    for_each_chunk(&mut samples, rng, |chunk_rng, chunk| {
        for slot in chunk.iter_mut() {
            *slot = invert_cdf(model, chunk_rng.random(), tol);
        }
    });
    Ok(SampleBatch::new(samples))
}
