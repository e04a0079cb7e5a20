//! Dispersion of angles living on a periodic range.

use crate::error::{Error, Result};

/// Circular standard deviation, in the input's degree scale, of angles with
/// the given period (90° for folded polarization orientations: 0° and 90°
/// are the same physical reading there).
///
/// The values are mapped onto the unit circle, and √(−2 ln R) of the mean
/// resultant length R is scaled back to input degrees. Uniform data gives a
/// large value (infinite in the R → 0 limit); a tight cluster reproduces its
/// ordinary standard deviation.
pub fn circular_std_deg(values_deg: &[f64], period_deg: f64) -> Result<f64> {
    if values_deg.len() < 2 {
        return Err(Error::InsufficientData(
            "circular spread needs at least two angles".into(),
        ));
    }
    if !(period_deg > 0.0) || !period_deg.is_finite() {
        return Err(Error::config("period must be finite and positive"));
    }
    let to_circle = std::f64::consts::TAU / period_deg;
    let (mut c, mut s) = (0.0, 0.0);
    for &v in values_deg {
        if !v.is_finite() {
            return Err(Error::domain("angles must be finite"));
        }
        let a = v * to_circle;
        c += a.cos();
        s += a.sin();
    }
    let r = c.hypot(s) / values_deg.len() as f64;
    if r < 1e-12 {
        return Ok(f64::INFINITY);
    }
    Ok((-2.0 * r.ln()).sqrt() / to_circle)
}
