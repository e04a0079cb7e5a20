//! Ordinal-pattern (permutation) analysis: encoding, the per-(d, t) iid
//! test, and the threshold-count battery over many embedding delays.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sequence::ThetaSequence;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FACTORIAL: [usize; 8] = [1, 1, 2, 6, 24, 120, 720, 5040];

/// p-value thresholds tallied by [`pe_battery`].
pub const PE_THRESHOLDS: [f64; 3] = [0.1, 0.01, 0.001];

/// Embedding dimension and delay for ordinal patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct OrdinalConfig {
    d: usize,
    t: usize,
}

impl OrdinalConfig {
    /// Dimension d in [2, 7] (d! patterns must stay countable), delay t ≥ 1.
    pub fn new(d: usize, t: usize) -> Result<Self> {
        if !(2..=7).contains(&d) {
            return Err(Error::config("embedding dimension must be in [2, 7]"));
        }
        if t == 0 {
            return Err(Error::config("embedding delay must be >= 1"));
        }
        Ok(Self { d, t })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn delay(&self) -> usize {
        self.t
    }

    /// Number of distinct patterns, d!.
    pub fn pattern_count(&self) -> usize {
        FACTORIAL[self.d]
    }

    /// Indices spanned by one window: (d−1)·t + 1.
    fn span(&self) -> usize {
        (self.d - 1) * self.t + 1
    }
}

/// Lexicographic index of the rank pattern of the window starting at `start`.
/// Ties rank by temporal order, so the earlier element counts as smaller.
fn pattern_index<T: Scalar>(values: &[T], start: usize, cfg: &OrdinalConfig) -> usize {
    let (d, t) = (cfg.d, cfg.t);
    let mut rank = [0usize; 8];
    for j in 0..d {
        let xj = values[start + j * t];
        let mut r = 0;
        for k in 0..d {
            let xk = values[start + k * t];
            if xk < xj || (xk == xj && k < j) {
                r += 1;
            }
        }
        rank[j] = r;
    }
    let mut index = 0;
    for j in 0..d {
        let mut smaller_later = 0;
        for k in j + 1..d {
            if rank[k] < rank[j] {
                smaller_later += 1;
            }
        }
        index += smaller_later * FACTORIAL[d - 1 - j];
    }
    index
}

/// Pattern index of every (overlapping) window, in temporal order. The
/// monotone ramp maps to index 0 and the full reversal to d!−1.
pub fn ordinal_encode<T: Scalar>(
    seq: &ThetaSequence<T>,
    cfg: &OrdinalConfig,
) -> Result<Vec<usize>> {
    let values = seq.values();
    let span = cfg.span();
    if values.len() < span {
        return Err(Error::InsufficientData(format!(
            "sequence of {} is shorter than one window of span {span}",
            values.len()
        )));
    }
    Ok((0..=values.len() - span)
        .map(|i| pattern_index(values, i, cfg))
        .collect())
}

/// χ² iid test on the pattern counts of non-overlapping windows.
///
/// Windows start every d·t samples so no two share an element, which keeps
/// the counts an honest uniform multinomial under the iid null. Requires at
/// least 10·d! windows; below that the χ² calibration is not trusted.
pub fn pe_test<T: Scalar>(seq: &ThetaSequence<T>, cfg: &OrdinalConfig) -> Result<f64> {
    let values = seq.values();
    let span = cfg.span();
    let patterns = cfg.pattern_count();
    let stride = cfg.d * cfg.t;
    if values.len() < span {
        return Err(Error::InsufficientData("sequence shorter than one window".into()));
    }
    let m = (values.len() - span) / stride + 1;
    if m < 10 * patterns {
        return Err(Error::InsufficientData(format!(
            "{m} non-overlapping windows for {patterns} patterns; need {}",
            10 * patterns
        )));
    }
    let mut counts = vec![0u64; patterns];
    for w in 0..m {
        counts[pattern_index(values, w * stride, cfg)] += 1;
    }
    let expected = m as f64 / patterns as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dist = ChiSquared::new((patterns - 1) as f64)
        .map_err(|e| Error::domain(format!("chi-squared distribution: {e}")))?;
    Ok(dist.sf(statistic).clamp(0.0, 1.0))
}

/// One battery row: every delay tested at a fixed embedding dimension.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PeBatteryRow {
    pub d: usize,
    /// (delay, p-value) for every test with enough windows to run.
    pub p_values: Vec<(usize, f64)>,
    /// Delays skipped for falling below the validity floor.
    pub skipped: usize,
    /// Tests with p below each of [`PE_THRESHOLDS`].
    pub below_threshold: [usize; 3],
    /// Expected counts under the iid null: tests_run × threshold.
    pub expected_below: [f64; 3],
}

impl PeBatteryRow {
    pub fn tests_run(&self) -> usize {
        self.p_values.len()
    }
}

/// Threshold-count report of [`pe_battery`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PeTestReport {
    pub t_max: usize,
    pub rows: Vec<PeBatteryRow>,
}

/// Runs [`pe_test`] for every dimension in `d_set` and delay 1..=t_max,
/// tallying how many p-values fall below each threshold. Underpowered
/// (d, t) combinations are counted as skipped rather than tested.
pub fn pe_battery<T: Scalar>(
    seq: &ThetaSequence<T>,
    d_set: &[usize],
    t_max: usize,
) -> Result<PeTestReport> {
    if d_set.is_empty() {
        return Err(Error::config("battery needs at least one embedding dimension"));
    }
    if t_max == 0 {
        return Err(Error::config("battery needs t_max >= 1"));
    }
    let rows = d_set
        .iter()
        .map(|&d| {
            let outcomes: Vec<Option<(usize, f64)>> = (1..=t_max)
                .into_par_iter()
                .map(|t| {
                    let cfg = OrdinalConfig::new(d, t)?;
                    match pe_test(seq, &cfg) {
                        Ok(p) => Ok(Some((t, p))),
                        Err(Error::InsufficientData(_)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let p_values: Vec<(usize, f64)> = outcomes.iter().flatten().copied().collect();
            let skipped = t_max - p_values.len();
            let mut below_threshold = [0usize; 3];
            for &(_, p) in &p_values {
                for (slot, &thr) in PE_THRESHOLDS.iter().enumerate() {
                    if p < thr {
                        below_threshold[slot] += 1;
                    }
                }
            }
            let expected_below =
                PE_THRESHOLDS.map(|thr| p_values.len() as f64 * thr);
            Ok(PeBatteryRow {
                d,
                p_values,
                skipped,
                below_threshold,
                expected_below,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PeTestReport { t_max, rows })
}
