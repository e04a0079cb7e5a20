//! Min-entropy estimation from the most common quantized symbol.

use super::histogram::histogram;
use super::sequence::ThetaSequence;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Most-common-value min-entropy estimate of a quantized angle sequence.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MinEntropyReport {
    pub bin_width_deg: f64,
    pub symbol_count: usize,
    /// Observed frequency of the most common symbol.
    pub most_common_frequency: f64,
    /// −log₂ of the observed most-common frequency.
    pub raw_bits: f64,
    /// −log₂ of the upper 99% confidence bound on that frequency; the
    /// conservative value to quote.
    pub adjusted_bits: f64,
    /// Ceiling log₂(symbol_count) of any estimate at this quantization.
    pub max_bits: f64,
    /// Caveat on comparing estimates across quantizations.
    pub note: String,
}

/// Most-common-value estimator: quantize to `bin_width_deg` bins, take the
/// most frequent symbol, and bound its probability from above at 99%
/// confidence (p̂ + 2.576·√(p̂(1−p̂)/(n−1)), capped at 1).
///
/// Needs at least 1000 samples and at least two symbols.
pub fn min_entropy_mcv<T: Scalar>(
    seq: &ThetaSequence<T>,
    bin_width_deg: f64,
) -> Result<MinEntropyReport> {
    if seq.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "min-entropy estimation needs >= 1000 samples, got {}",
            seq.len()
        )));
    }
    let counts = histogram(seq, bin_width_deg)?;
    let symbol_count = counts.len();
    if symbol_count < 2 {
        return Err(Error::config(
            "min-entropy needs at least two symbols; widen the range or narrow the bins",
        ));
    }
    let n = seq.len() as f64;
    let p_hat = *counts.iter().max().expect("non-empty histogram") as f64 / n;
    let p_upper = (p_hat + 2.576 * (p_hat * (1.0 - p_hat) / (n - 1.0)).sqrt()).min(1.0);
    Ok(MinEntropyReport {
        bin_width_deg,
        symbol_count,
        most_common_frequency: p_hat,
        raw_bits: -p_hat.log2(),
        adjusted_bits: -p_upper.log2(),
        max_bits: (symbol_count as f64).log2(),
        note: format!(
            "per-symbol estimate at {bin_width_deg} degree bins ({symbol_count} symbols, \
             ceiling {:.2} bits); estimates are only comparable between runs quantized \
             the same way, and finer binning raises the ceiling",
            (symbol_count as f64).log2()
        ),
    })
}
