//! Sample batches and their CSV export.
//!
//! A batch is written one sample per line, preceded by `#`-prefixed manifest
//! lines of space-separated `key=value` pairs.

use std::fmt;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::model::EvalCounter;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleBatch {
    /// Circle coordinates in `[-1, 1)`.
    pub samples: Vec<f64>,
    /// Seed of the run that produced the batch, when known.
    pub seed: Option<u64>,
    /// Model evaluations spent producing the batch, including upstream stages.
    pub evals: EvalCounter,
    /// Proposals drawn by an accept/reject sampler.
    pub proposals: Option<u64>,
    /// Mean Metropolis acceptance rate of the last refinement stage.
    pub acceptance_rate: Option<f64>,
}

impl SampleBatch {
    pub fn new(samples: Vec<f64>) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ledger line describing the evaluations behind this batch.
    pub fn ledger_manifest(&self) -> Manifest {
        let mut m = Manifest::new()
            .with("pdf_evals", self.evals.pdf_evals)
            .with("score_evals", self.evals.score_evals)
            .with("model_evals", self.evals.model_evals());
        if let Some(p) = self.proposals {
            m = m.with("proposals", p);
        }
        if let Some(a) = self.acceptance_rate {
            m = m.with("acceptance_rate", a);
        }
        m
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, manifests: &[Manifest]) -> io::Result<()> {
        for m in manifests {
            writeln!(out, "{m}")?;
        }
        for x in &self.samples {
            writeln!(out, "{x}")?;
        }
        Ok(())
    }

    /// Reads samples back, skipping manifest and blank lines.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            samples.push(line.parse().map_err(|_| {
                Error::InvalidParameter(format!("line {}: `{line}` is not a number", i + 1))
            })?);
        }
        Ok(Self::new(samples))
    }
}

/// Ordered `key=value` pairs rendered as a `#` comment line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest(Vec<(String, String)>);

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.0.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::InvalidParameter(format!("`{line}` is not a manifest line")))?;
        body.split_whitespace()
            .map(|pair| {
                pair.split_once('=')
                    .map(|(k, v)| (k.to_owned(), v.to_owned()))
                    .ok_or_else(|| Error::InvalidParameter(format!("`{pair}` is not key=value")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Manifest)
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("#")?;
        for (k, v) in &self.0 {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
