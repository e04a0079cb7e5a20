//! Gain kernel of the amplification problem.
//!
//! `pump_integral` accumulates pump intensity over a τ interval;
//! `kernel_h` is the two-point response
//! H(z, z′, τ, τ′) = e^{−Γ(τ−τ′)} · I₀(√(4(z−z′)·a(τ,τ′)))
//! through which a noise kick at (z′, τ′) reaches the field at (z, τ).

use crate::crystal::PumpConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::bessel_i0_scaled;

/// Accumulated pump intensity a(τ_hi, τ_lo) = gain_scale · ∫|e(τ)|² dτ.
///
/// Additive over adjacent intervals; requires `tau_lo <= tau_hi`.
pub fn pump_integral<T: Scalar>(pump: &PumpConfig<T>, tau_lo: T, tau_hi: T) -> Result<T> {
    if !(tau_lo <= tau_hi) {
        return Err(Error::domain(format!(
            "pump integral bounds reversed: {} > {}",
            tau_lo.as_f64(),
            tau_hi.as_f64()
        )));
    }
    Ok(pump.gain_scale() * pump.envelope().squared_integral(tau_lo, tau_hi))
}

/// Two-point gain kernel.
///
/// `a_value` must be the accumulated pump intensity between τ′ and τ.
/// Requires z ≥ z′, τ ≥ τ′ and a_value ≥ 0. The exponentially growing Bessel
/// factor and the damping factor are combined before exponentiation, so the
/// kernel stays finite as long as √(4·(z−z′)·a) − Γ·(τ−τ′) < 700.
pub fn kernel_h<T: Scalar>(z: T, z_prime: T, a_value: T, gamma: T, tau: T, tau_prime: T) -> Result<T> {
    if !(z >= z_prime) {
        return Err(Error::domain(format!(
            "kernel ordering violated: z = {} < z' = {}",
            z.as_f64(),
            z_prime.as_f64()
        )));
    }
    if !(tau >= tau_prime) {
        return Err(Error::domain(format!(
            "kernel ordering violated: tau = {} < tau' = {}",
            tau.as_f64(),
            tau_prime.as_f64()
        )));
    }
    if !(a_value >= T::zero()) {
        return Err(Error::domain("kernel needs a nonnegative pump integral"));
    }
    if !(gamma >= T::zero()) {
        return Err(Error::domain("kernel needs a nonnegative damping rate"));
    }
    let arg = (T::of(4.0) * (z - z_prime) * a_value).sqrt();
    let scaled = T::of(bessel_i0_scaled(arg.as_f64())?);
    let exponent = arg - gamma * (tau - tau_prime);
    if exponent.as_f64() > 700.0 {
        return Err(Error::domain(format!(
            "kernel overflow: growth exponent {} too large",
            exponent.as_f64()
        )));
    }
    Ok(exponent.exp() * scaled)
}
