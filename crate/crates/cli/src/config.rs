//! Experiment configuration and its flat `key=value` text form.
//!
//! ```text
//! # comments start with '#'
//! seed=7
//! N=20
//! K_sweep=128,256,512
//! method=daas+mala
//! ```

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use daas_core::refine::{MALA_STEP, ULA_STEP};
use daas_core::{KernelSpec, StepSchedule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Daas,
    DaasUla,
    DaasMala,
    Rejection,
    Inverse,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "daas" => Self::Daas,
            "daas+ula" => Self::DaasUla,
            "daas+mala" => Self::DaasMala,
            "rejection" => Self::Rejection,
            "inverse" => Self::Inverse,
            other => {
                return Err(CliError::Config(format!(
                    "method `{other}` is not one of daas, daas+ula, daas+mala, rejection, inverse"
                )))
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Daas => "daas",
            Self::DaasUla => "daas+ula",
            Self::DaasMala => "daas+mala",
            Self::Rejection => "rejection",
            Self::Inverse => "inverse",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Frequency terms `N` of randomly drawn models.
    pub order: usize,
    /// Grid size; `None` means `4N` (at least `2N + 1`).
    pub k: Option<usize>,
    pub k_sweep: Vec<usize>,
    pub degree: u32,
    pub degrees: Vec<u32>,
    pub samples: usize,
    /// Size of the rejection reference batch; `None` means `samples`.
    pub reference: Option<usize>,
    pub steps: usize,
    pub t_sweep: Vec<usize>,
    pub eps_ula: f64,
    pub eps_mala: f64,
    pub schedule: StepSchedule,
    pub method: Method,
    pub trials: usize,
    pub tol: f64,
    /// Model file in the flat text format; overrides random models.
    pub model: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            order: 10,
            k: None,
            k_sweep: vec![128, 256, 512, 1024, 2048, 4096],
            degree: 1,
            degrees: vec![1],
            samples: 10_000,
            reference: None,
            steps: 0,
            t_sweep: vec![0, 1, 5, 20, 100, 500],
            eps_ula: ULA_STEP,
            eps_mala: MALA_STEP,
            schedule: StepSchedule::Constant,
            method: Method::Daas,
            trials: 1,
            tol: 1e-10,
            model: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse `{value}` for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| parse(key, v))
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Sets one field from its text key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "N" => self.order = parse(key, value)?,
            "K" => self.k = Some(parse(key, value)?),
            "K_sweep" => self.k_sweep = parse_list(key, value)?,
            "D" => self.degree = parse(key, value)?,
            "D_set" => self.degrees = parse_list(key, value)?,
            "S" => self.samples = parse(key, value)?,
            "reference" => self.reference = Some(parse(key, value)?),
            "T" => self.steps = parse(key, value)?,
            "T_sweep" => self.t_sweep = parse_list(key, value)?,
            "eps_ula" => self.eps_ula = parse(key, value)?,
            "eps_mala" => self.eps_mala = parse(key, value)?,
            "schedule" => {
                self.schedule = value
                    .trim()
                    .parse()
                    .map_err(|e: daas_core::Error| CliError::Config(e.to_string()))?
            }
            "method" => self.method = value.trim().parse()?,
            "trials" => self.trials = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "model" => self.model = Some(PathBuf::from(value.trim())),
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key=value", i + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "N={}", self.order);
        if let Some(k) = self.k {
            let _ = writeln!(out, "K={k}");
        }
        let _ = writeln!(out, "K_sweep={}", join(&self.k_sweep));
        let _ = writeln!(out, "D={}", self.degree);
        let _ = writeln!(out, "D_set={}", join(&self.degrees));
        let _ = writeln!(out, "S={}", self.samples);
        if let Some(r) = self.reference {
            let _ = writeln!(out, "reference={r}");
        }
        let _ = writeln!(out, "T={}", self.steps);
        let _ = writeln!(out, "T_sweep={}", join(&self.t_sweep));
        let _ = writeln!(out, "eps_ula={}", self.eps_ula);
        let _ = writeln!(out, "eps_mala={}", self.eps_mala);
        let _ = writeln!(out, "schedule={}", self.schedule);
        let _ = writeln!(out, "method={}", self.method);
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "tol={}", self.tol);
        if let Some(m) = &self.model {
            let _ = writeln!(out, "model={}", m.display());
        }
        out
    }

    /// Grid size for single-K commands.
    pub fn grid_size(&self, order: usize) -> usize {
        self.k.unwrap_or((4 * order).max(2 * order + 1))
    }

    pub fn reference_size(&self) -> usize {
        self.reference.unwrap_or(self.samples)
    }

    pub fn kernel(&self) -> Result<KernelSpec, CliError> {
        Ok(KernelSpec::new(self.degree)?)
    }

    pub fn kernels(&self) -> Result<Vec<KernelSpec>, CliError> {
        if self.degrees.is_empty() {
            return Err(CliError::Config("D_set must not be empty".into()));
        }
        self.degrees
            .iter()
            .map(|&d| KernelSpec::new(d).map_err(CliError::from))
            .collect()
    }

    pub fn check_samples(&self) -> Result<(), CliError> {
        if self.samples == 0 {
            return Err(CliError::Config("S must be at least 1".into()));
        }
        Ok(())
    }
}
