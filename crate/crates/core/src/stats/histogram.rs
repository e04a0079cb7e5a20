//! Fixed-width binning of angle sequences over the [0°, 90°] range.

use super::sequence::ThetaSequence;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of bins for a width that must divide 90° evenly (1e-9 relative).
pub(crate) fn bins_for_width(bin_width_deg: f64) -> Result<usize> {
    if !(bin_width_deg > 0.0) || !bin_width_deg.is_finite() {
        return Err(Error::config("bin width must be finite and positive"));
    }
    let ratio = 90.0 / bin_width_deg;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio {
        return Err(Error::config(format!(
            "bin width {bin_width_deg} does not divide 90 degrees evenly"
        )));
    }
    Ok(n as usize)
}

/// Bin counts over [0°, 90°]; the upper edge falls in the last bin.
/// Counts always sum to the sequence length.
pub fn histogram<T: Scalar>(seq: &ThetaSequence<T>, bin_width_deg: f64) -> Result<Vec<u64>> {
    let n_bins = bins_for_width(bin_width_deg)?;
    let mut counts = vec![0u64; n_bins];
    for v in seq.values() {
        let idx = ((v.as_f64() / bin_width_deg) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}
