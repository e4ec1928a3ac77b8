use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use daas_core::{
    daas_sample, empirical_w1, inverse_transform_sample, kl_monte_carlo, mala_refine,
    rejection_sample, seeded_rng, ula_refine, DaasSampler, EvalCounter, FbmModel, KernelSpec,
    LangevinConfig, Manifest, SampleBatch, SeededRng,
};

use crate::config::{ExperimentConfig, Method};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Convergence,
    Refinement,
    Cost,
}

impl Command {
    /// Runs the command and writes its CSV to `out`.
    pub fn run<W: Write>(self, config: &ExperimentConfig, out: &mut W) -> Result<()> {
        match self {
            Self::Sample => {
                let (manifests, batch) = sample(config)?;
                batch.write_csv(out, &manifests)?;
            }
            Self::Convergence => {
                let rows = convergence(config)?;
                writeln!(out, "{}", sweep_manifest(config))?;
                for r in rows {
                    writeln!(out, "{},{},{},{}", r.k, r.trial, r.degree, r.kl)?;
                }
            }
            Self::Refinement => {
                let rows = refinement(config)?;
                writeln!(out, "{}", sweep_manifest(config))?;
                for r in rows {
                    writeln!(out, "{},{},{}", r.steps, r.method, r.w1)?;
                }
            }
            Self::Cost => {
                let rows = cost(config)?;
                writeln!(out, "{}", sweep_manifest(config))?;
                for r in rows {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        r.method,
                        r.evals.model_evals(),
                        r.evals.pdf_evals,
                        r.evals.score_evals
                    )?;
                }
            }
        }
        Ok(())
    }
}

fn sweep_manifest(config: &ExperimentConfig) -> Manifest {
    Manifest::new()
        .with("seed", config.seed)
        .with("N", config.order)
        .with("S", config.samples)
        .with("trials", config.trials)
}

/// Reads the configured model file, or draws a random model from `rng`.
fn model_for(config: &ExperimentConfig, rng: &mut SeededRng) -> Result<FbmModel> {
    match &config.model {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read model {}: {e}", path.display()))
            })?;
            Ok(FbmModel::from_text(&text)?)
        }
        None => Ok(FbmModel::random(config.order, rng)),
    }
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Numerical(format!("{what} is not finite")))
    }
}

/// Draws one batch with the configured method. The first manifest line
/// describes the run, the second holds the evaluation ledger.
pub fn sample(config: &ExperimentConfig) -> Result<(Vec<Manifest>, SampleBatch)> {
    config.check_samples()?;
    let mut rng = seeded_rng(config.seed);
    let model = model_for(config, &mut rng)?;
    let k = config.grid_size(model.order());
    let kernel = config.kernel()?;
    let mut counter = EvalCounter::new();

    let mut batch = match config.method {
        Method::Rejection => rejection_sample(&model, config.samples, &mut rng, &mut counter)?,
        Method::Inverse => inverse_transform_sample(&model, config.samples, &mut rng, config.tol)?,
        Method::Daas | Method::DaasUla | Method::DaasMala => {
            let batch = daas_sample(&model, k, kernel, config.samples, &mut rng, &mut counter)?;
            match config.method {
                Method::DaasUla => {
                    let lc = LangevinConfig::new(config.eps_ula, config.schedule, config.steps)?;
                    ula_refine(&model, &batch, &lc, &mut rng, &mut counter)
                }
                Method::DaasMala => {
                    let lc = LangevinConfig::new(config.eps_mala, config.schedule, config.steps)?;
                    mala_refine(&model, &batch, &lc, &mut rng, &mut counter)
                }
                _ => batch,
            }
        }
    };
    batch.seed = Some(config.seed);
    if let Some(bad) = batch.samples.iter().find(|x| !(-1.0..1.0).contains(*x)) {
        return Err(CliError::Numerical(format!("sample {bad} left the domain")));
    }

    let run = Manifest::new()
        .with("seed", config.seed)
        .with("K", k)
        .with("D", config.degree)
        .with("S", config.samples)
        .with("N", model.order())
        .with("T", config.steps)
        .with("method", config.method);
    let ledger = batch.ledger_manifest();
    Ok((vec![run, ledger], batch))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub trial: usize,
    pub degree: u32,
    pub kl: f64,
}

/// Monte Carlo KL from each trial's model to its DAAS approximation, for
/// every grid size in the sweep and every kernel degree. Trial `i` uses seed
/// `seed + i`; one exact reference batch per trial is shared by all cells.
pub fn convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    config.check_samples()?;
    if config.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if config.k_sweep.is_empty() || config.k_sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("K_sweep must be non-empty and strictly increasing".into()));
    }
    let kernels = config.kernels()?;

    let per_trial: Vec<Vec<ConvergenceRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| convergence_trial(config, trial, &kernels))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ConvergenceRow> = per_trial.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.k, r.trial, r.degree));
    Ok(rows)
}

fn convergence_trial(
    config: &ExperimentConfig,
    trial: usize,
    kernels: &[KernelSpec],
) -> Result<Vec<ConvergenceRow>> {
    let mut rng = seeded_rng(config.seed.wrapping_add(trial as u64));
    let model = model_for(config, &mut rng)?;
    let mut counter = EvalCounter::new();
    let reference = rejection_sample(&model, config.reference_size(), &mut rng, &mut counter)?;
    let mut rows = Vec::with_capacity(config.k_sweep.len() * kernels.len());
    for &k in &config.k_sweep {
        for &kernel in kernels {
            let sampler = DaasSampler::new(&model, k, kernel, &mut counter)?;
            let kl = kl_monte_carlo(&reference.samples, |x| model.density(x), |x| {
                sampler.density(x)
            })?;
            rows.push(ConvergenceRow {
                k,
                trial,
                degree: kernel.degree(),
                kl: finite(kl.estimate, "KL estimate")?,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub steps: usize,
    /// `none`, `ula` or `mala`.
    pub method: &'static str,
    pub w1: f64,
}

/// Empirical W1 between an exact rejection reference and DAAS samples
/// refined for each `T` in the sweep. Every refinement starts from the same
/// DAAS batch. The unrefined `T = 0` row is always present.
///
/// `method=daas+ula` or `daas+mala` restricts the sweep to that refiner;
/// any other method runs both.
pub fn refinement(config: &ExperimentConfig) -> Result<Vec<RefinementRow>> {
    config.check_samples()?;
    if config.reference_size() < config.samples {
        return Err(CliError::Config(format!(
            "reference size {} is smaller than S={}",
            config.reference_size(),
            config.samples
        )));
    }
    let mut rng = seeded_rng(config.seed);
    let model = model_for(config, &mut rng)?;
    let k = config.grid_size(model.order());
    let mut counter = EvalCounter::new();
    let reference = rejection_sample(&model, config.reference_size(), &mut rng, &mut counter)?;
    let start = daas_sample(&model, k, config.kernel()?, config.samples, &mut rng, &mut counter)?;

    let refiners: &[&'static str] = match config.method {
        Method::DaasUla => &["ula"],
        Method::DaasMala => &["mala"],
        _ => &["ula", "mala"],
    };
    let mut steps: Vec<usize> = config.t_sweep.iter().copied().filter(|&t| t > 0).collect();
    steps.sort_unstable();
    steps.dedup();

    let mut rows = vec![RefinementRow {
        steps: 0,
        method: "none",
        w1: finite(empirical_w1(&start.samples, &reference.samples)?.estimate, "W1")?,
    }];
    for t in steps {
        for &method in refiners {
            let mut cell_rng = seeded_rng(rng.random());
            let refined = if method == "ula" {
                let lc = LangevinConfig::new(config.eps_ula, config.schedule, t)?;
                ula_refine(&model, &start, &lc, &mut cell_rng, &mut counter)
            } else {
                let lc = LangevinConfig::new(config.eps_mala, config.schedule, t)?;
                mala_refine(&model, &start, &lc, &mut cell_rng, &mut counter)
            };
            let w1 = empirical_w1(&refined.samples, &reference.samples)?.estimate;
            rows.push(RefinementRow {
                steps: t,
                method,
                w1: finite(w1, "W1")?,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    /// `rejection`, `triangular`, `ula` or `mala`.
    pub method: &'static str,
    pub evals: EvalCounter,
}

/// Runs every sampler on the configured model and reports its evaluation
/// ledger: rejection, triangular-kernel DAAS, and DAAS refined by `T` ULA or
/// MALA steps.
pub fn cost(config: &ExperimentConfig) -> Result<Vec<CostRow>> {
    config.check_samples()?;
    let mut rng = seeded_rng(config.seed);
    let model = model_for(config, &mut rng)?;
    let k = config.grid_size(model.order());

    let mut rejection = EvalCounter::new();
    rejection_sample(&model, config.samples, &mut rng, &mut rejection)?;

    let mut triangular = EvalCounter::new();
    let start = daas_sample(
        &model,
        k,
        KernelSpec::TRIANGLE,
        config.samples,
        &mut rng,
        &mut triangular,
    )?;

    let mut ula = triangular;
    let lc = LangevinConfig::new(config.eps_ula, config.schedule, config.steps)?;
    ula_refine(&model, &start, &lc, &mut rng, &mut ula);

    let mut mala = triangular;
    let lc = LangevinConfig::new(config.eps_mala, config.schedule, config.steps)?;
    mala_refine(&model, &start, &lc, &mut rng, &mut mala);

    Ok(vec![
        CostRow { method: "rejection", evals: rejection },
        CostRow { method: "triangular", evals: triangular },
        CostRow { method: "ula", evals: ula },
        CostRow { method: "mala", evals: mala },
    ])
}
