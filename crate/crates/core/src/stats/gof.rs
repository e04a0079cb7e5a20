//! Goodness-of-fit machinery: χ² with bin pooling and Kolmogorov-Smirnov
//! tests with the asymptotic p-value approximation.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Outcome of a χ² goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// χ² test of observed counts against a flat expectation.
pub fn chi2_uniform(counts: &[u64]) -> Result<GofResult> {
    let total: u64 = counts.iter().sum();
    let expected = vec![total as f64 / counts.len() as f64; counts.len()];
    chi2_against(counts, &expected, 5.0)
}

/// χ² test of observed counts against per-bin expected counts.
///
/// Expected counts are rescaled to the observed total, then adjacent bins are
/// pooled left to right until every cell expects at least `min_expected`
/// (a trailing short cell merges backward). Degrees of freedom are the pooled
/// cell count minus one.
pub fn chi2_against(counts: &[u64], expected: &[f64], min_expected: f64) -> Result<GofResult> {
    if counts.len() != expected.len() {
        return Err(Error::config("observed and expected lengths differ"));
    }
    if counts.len() < 2 {
        return Err(Error::InsufficientData("need at least two bins".into()));
    }
    if expected.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
        return Err(Error::config("expected counts must be finite and >= 0"));
    }
    let total_obs: u64 = counts.iter().sum();
    let total_exp: f64 = expected.iter().sum();
    if total_obs == 0 || !(total_exp > 0.0) {
        return Err(Error::InsufficientData("empty histogram".into()));
    }
    let scale = total_obs as f64 / total_exp;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (&o, &e) in counts.iter().zip(expected) {
        acc_obs += o as f64;
        acc_exp += e * scale;
        if acc_exp >= min_expected {
            cells.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc_obs;
                last.1 += acc_exp;
            }
            None => cells.push((acc_obs, acc_exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than two cells remain after pooling".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::domain(format!("chi-squared distribution: {e}")))?;
    Ok(GofResult {
        statistic,
        dof,
        p_value: dist.sf(statistic).clamp(0.0, 1.0),
    })
}

/// Survival function of the Kolmogorov distribution.
///
/// Two complementary expansions: the theta-function form below λ = 1.18 and
/// the alternating series above, following the usual numerical treatment.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        let t = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let sum = t * (1.0 + t.powi(8) * (1.0 + t.powi(16)));
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let term = (-2.0 * (j as f64 * lambda).powi(2)).exp();
            sum += sign * term;
            if term < 1e-16 {
                break;
            }
            sign = -sign;
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * d)
}

/// One-sample KS test of `samples` against the distribution function `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < 5 {
        return Err(Error::InsufficientData("KS test needs at least 5 samples".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("KS samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x).clamp(0.0, 1.0);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// Two-sample KS test; ties are consumed on both sides before the gap is
/// evaluated, so tied data cannot inflate the statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 5 || b.len() < 5 {
        return Err(Error::InsufficientData("KS test needs at least 5 samples per side".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::domain("KS samples must be finite"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finite values compare"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finite values compare"));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] == x {
            i += 1;
        }
        while j < sb.len() && sb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let effective = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, effective),
    })
}

/// KS test against an exponential distribution with the mean fitted from the
/// data. Fitting the scale first makes the test conservative (the quoted
/// p-value is an upper bound on evidence against exponentiality).
pub fn ks_exponential_fit(samples: &[f64]) -> Result<KsResult> {
    if samples.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::domain("exponential-fit samples must be >= 0"));
    }
    let mean = samples.iter().sum::<f64>() / samples.len().max(1) as f64;
    if !(mean > 0.0) {
        return Err(Error::InsufficientData("all-zero sample has no exponential fit".into()));
    }
    ks_one_sample(samples, |x| 1.0 - (-x / mean).exp())
}
