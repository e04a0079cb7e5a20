//! The angle-sequence container and its plain-text reader.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Provenance carried alongside a measured sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct SequenceMeta {
    /// Hash of the configuration that produced the data, if known.
    pub config_hash: Option<String>,
    /// Inclusive range of per-pulse seeds, if the data came from simulation.
    pub seed_range: Option<(u64, u64)>,
}

/// Ordered polarization angles in degrees, each in [0, 90], at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSequence<T: Scalar> {
    values: Vec<T>,
    meta: SequenceMeta,
}

impl<T: Scalar> ThetaSequence<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        Self::with_meta(values, SequenceMeta::default())
    }

    pub fn with_meta(values: Vec<T>, meta: SequenceMeta) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(
                "an angle sequence needs at least two values".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v >= T::zero() && v <= T::of(90.0)) {
                return Err(Error::config(format!(
                    "angle {} at position {i} is outside [0, 90] degrees",
                    v.as_f64()
                )));
            }
        }
        Ok(Self { values, meta })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor requires at least two values
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    /// Widened copy for the statistics routines, which work in f64.
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

/// Reads a sequence from a file: one angle per line, `#` lines and blank
/// lines ignored, one optional header line before the data.
pub fn read_theta_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<ThetaSequence<T>> {
    let text = fs::read_to_string(path)?;
    parse_theta_csv(&text)
}

/// [`read_theta_csv`] on in-memory text.
pub fn parse_theta_csv<T: Scalar>(text: &str) -> Result<ThetaSequence<T>> {
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => {
                header_allowed = false;
                values.push(T::of(v));
            }
            Err(_) if header_allowed => header_allowed = false,
            Err(_) => {
                return Err(Error::config(format!(
                    "line {}: cannot parse '{line}' as an angle",
                    i + 1
                )));
            }
        }
    }
    ThetaSequence::new(values)
}
