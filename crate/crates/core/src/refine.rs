//! Langevin refinement of circle-valued samples.
//!
//! Both samplers move every point with the discretized Langevin update
//! `x <- wrap(x + eps_t * score(x) + sqrt(2 eps_t) * z)`. MALA additionally
//! accepts or rejects each move with a Metropolis–Hastings test whose
//! proposal density is evaluated in the local chart: the displacement between
//! two circle points is the minimal signed circular difference.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::model::{EvalCounter, FbmModel, DENSITY_FLOOR};
use crate::streams::for_each_chunk;

/// Step size used for ULA refinement unless configured otherwise.
pub const ULA_STEP: f64 = 1e-5;
/// Step size used for MALA refinement unless configured otherwise.
pub const MALA_STEP: f64 = 8e-5;

/// Maps any real onto `[-1, 1)` by `((x + 1) mod 2) - 1`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    if (-1.0..1.0).contains(&x) {
        return x;
    }
    let r = (x + 1.0).rem_euclid(2.0);
    // rem_euclid rounds tiny negative inputs up to the modulus itself
    if r >= 2.0 {
        -1.0
    } else {
        r - 1.0
    }
}

/// Signed difference `a - b` taken the short way around the circle, in `[-1, 1)`.
#[inline]
pub fn circular_difference(a: f64, b: f64) -> f64 {
    wrap(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `eps_t = eps_0 / (t + 1)`
    Decay,
}

impl std::str::FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "decay" => Ok(Self::Decay),
            other => Err(Error::InvalidParameter(format!(
                "unknown step schedule `{other}` (expected constant or decay)"
            ))),
        }
    }
}

impl std::fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Decay => "decay",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinConfig {
    step_size: f64,
    schedule: StepSchedule,
    steps: usize,
}

impl LangevinConfig {
    pub fn new(step_size: f64, schedule: StepSchedule, steps: usize) -> Result<Self> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        Ok(Self {
            step_size,
            schedule,
            steps,
        })
    }

    pub fn ula(steps: usize) -> Self {
        Self::new(ULA_STEP, StepSchedule::Constant, steps).expect("default step is positive")
    }

    pub fn mala(steps: usize) -> Self {
        Self::new(MALA_STEP, StepSchedule::Constant, steps).expect("default step is positive")
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Step size at iteration `t` (zero based).
    pub fn step_at(&self, t: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.step_size,
            StepSchedule::Decay => self.step_size / (t + 1) as f64,
        }
    }
}

/// Unadjusted Langevin refinement. Bills one score evaluation (two model
/// evaluations) per sample and step.
pub fn ula_refine<R: Rng + ?Sized>(
    model: &FbmModel,
    batch: &SampleBatch,
    config: &LangevinConfig,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> SampleBatch {
    let mut samples = batch.samples.clone();
    let spent: EvalCounter = for_each_chunk(&mut samples, rng, |chunk_rng, chunk| {
        let mut local = EvalCounter::new();
        for x in chunk.iter_mut() {
            for t in 0..config.steps {
                let eps = config.step_at(t);
                let score = model.score(*x, &mut local);
                let z: f64 = chunk_rng.sample(StandardNormal);
                *x = wrap(*x + eps * score + (2.0 * eps).sqrt() * z);
            }
        }
        local
    })
    .into_iter()
    .fold(EvalCounter::new(), |a, b| a + b);
    *counter += spent;
    SampleBatch {
        samples,
        seed: batch.seed,
        evals: batch.evals + spent,
        proposals: None,
        acceptance_rate: None,
    }
}

/// Log proposal density `log r(to | from)` up to a constant.
#[inline]
fn log_proposal(to: f64, from: f64, from_score: f64, eps: f64) -> f64 {
    let d = circular_difference(to, from + eps * from_score);
    -d * d / (4.0 * eps)
}

/// Metropolis-adjusted Langevin refinement. Each step scores both the current
/// state and the proposal, billing two score evaluations (four model
/// evaluations) per sample. The mean acceptance rate is recorded on the batch.
pub fn mala_refine<R: Rng + ?Sized>(
    model: &FbmModel,
    batch: &SampleBatch,
    config: &LangevinConfig,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> SampleBatch {
    let mut samples = batch.samples.clone();
    let (spent, accepted) = for_each_chunk(&mut samples, rng, |chunk_rng, chunk| {
        let mut local = EvalCounter::new();
        let mut accepted = 0u64;
        for x in chunk.iter_mut() {
            for t in 0..config.steps {
                let eps = config.step_at(t);
                let (p_here, s_here) = model.density_and_score(*x, &mut local);
                let z: f64 = chunk_rng.sample(StandardNormal);
                let proposal = wrap(*x + eps * s_here + (2.0 * eps).sqrt() * z);
                let (p_there, s_there) = model.density_and_score(proposal, &mut local);
                let log_alpha = p_there.max(DENSITY_FLOOR).ln() - p_here.max(DENSITY_FLOOR).ln()
                    + log_proposal(*x, proposal, s_there, eps)
                    - log_proposal(proposal, *x, s_here, eps);
                let u: f64 = chunk_rng.random();
                if log_alpha >= 0.0 || u < log_alpha.exp() {
                    *x = proposal;
                    accepted += 1;
                }
            }
        }
        (local, accepted)
    })
    .into_iter()
    .fold((EvalCounter::new(), 0u64), |(c, a), (c2, a2)| (c + c2, a + a2));
    *counter += spent;

    let moves = (samples.len() * config.steps) as u64;
    SampleBatch {
        samples,
        seed: batch.seed,
        evals: batch.evals + spent,
        proposals: None,
        acceptance_rate: (moves > 0).then(|| accepted as f64 / moves as f64),
    }
}
