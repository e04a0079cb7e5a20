//! Polarization measurement model: the two-channel energy readout, the
//! loss-balance calibration, and the digitizer window that decides which
//! pulses count as measured.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use statrs::function::erf::erfc;

use crate::engine::PulseSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Orientation (degrees) of the deterministic tilted-pump output used to fit
/// the channel balance: the in-plane projection of the body diagonal.
pub const CALIBRATION_TARGET_DEG: f64 = 35.3;

/// Acceptance window and additive noise of the energy digitizer.
///
/// Energies are in the same normalized units as [`PulseSample`]; in practice
/// the window is quoted relative to the mean pulse energy of the run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitizerConfig<T: Scalar> {
    floor: T,
    ceiling: T,
    additive_noise_sigma: T,
}

impl<T: Scalar> DigitizerConfig<T> {
    /// `ceiling` may be `+∞` (no clipping); `floor` must be finite and
    /// non-negative, and strictly below the ceiling.
    pub fn new(floor: T, ceiling: T, additive_noise_sigma: T) -> Result<Self> {
        if !(floor >= T::zero()) || floor.as_f64().is_infinite() {
            return Err(Error::config("digitizer floor must be finite and >= 0"));
        }
        if !(ceiling > floor) {
            return Err(Error::config("digitizer ceiling must exceed the floor"));
        }
        if !(additive_noise_sigma >= T::zero()) || additive_noise_sigma.as_f64().is_infinite() {
            return Err(Error::config("digitizer noise sigma must be finite and >= 0"));
        }
        Ok(Self {
            floor,
            ceiling,
            additive_noise_sigma,
        })
    }

    /// Pass-through device: no floor, no ceiling, no noise.
    pub fn unwindowed() -> Self {
        Self {
            floor: T::zero(),
            ceiling: T::of(f64::INFINITY),
            additive_noise_sigma: T::zero(),
        }
    }

    /// Default window relative to a mean pulse energy: floor at 2% of the
    /// mean, ceiling at 5 times the mean, noiseless readout.
    pub fn relative_to_mean(mean_energy: T) -> Result<Self> {
        if !(mean_energy > T::zero()) {
            return Err(Error::config("mean energy must be positive"));
        }
        Self::new(
            T::of(0.02) * mean_energy,
            T::of(5.0) * mean_energy,
            T::zero(),
        )
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    pub fn ceiling(&self) -> T {
        self.ceiling
    }

    pub fn additive_noise_sigma(&self) -> T {
        self.additive_noise_sigma
    }

    fn in_window(&self, e: T) -> bool {
        e >= self.floor && e <= self.ceiling
    }
}

/// Loss-balance correction between the two detection arms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration<T: Scalar> {
    eta: T,
}

impl<T: Scalar> Calibration<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta > T::zero()) || eta.as_f64().is_infinite() {
            return Err(Error::config("calibration factor must be finite and > 0"));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> T {
        self.eta
    }
}

/// One digitized pulse: possibly noisy channel energies plus the verdict on
/// whether both landed inside the acceptance window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitizerReading<T: Scalar> {
    pub e_h: T,
    pub e_v: T,
    pub measurable: bool,
}

/// Polarization angle (degrees, [0, 90]) from the two channel energies.
///
/// Piecewise: θ = atan√(e_h/(η·e_v)) when e_h ≤ η·e_v, otherwise the
/// complementary angle 90° − atan√(η·e_v/e_h). Both branches meet at 45°,
/// and the angle grows with the H-channel share of the energy.
pub fn theta_from_energies<T: Scalar>(e_h: T, e_v: T, eta: T) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(Error::config("calibration factor must be > 0"));
    }
    if !(e_h >= T::zero()) || !(e_v >= T::zero()) {
        return Err(Error::domain("channel energies must be >= 0"));
    }
    if e_h == T::zero() && e_v == T::zero() {
        return Err(Error::domain(
            "polarization angle is undefined when both channels read zero",
        ));
    }
    let deg = T::of(180.0) / T::pi();
    let balanced = eta * e_v;
    if e_h <= balanced {
        Ok((e_h / balanced).sqrt().atan() * deg)
    } else {
        Ok(T::of(90.0) - (balanced / e_h).sqrt().atan() * deg)
    }
}

/// Fits the channel balance η so the mean measured angle over a
/// deterministic-orientation run equals [`CALIBRATION_TARGET_DEG`].
pub fn calibrate_eta<T: Scalar>(samples: &[(T, T)]) -> Result<Calibration<T>> {
    calibrate_eta_to(samples, T::of(CALIBRATION_TARGET_DEG))
}

/// [`calibrate_eta`] with an explicit target angle in (0°, 90°).
///
/// The mean angle is strictly decreasing in η whenever any sample has energy
/// in both channels, so a bisection on log η over [1e-6, 1e6] either brackets
/// the root or proves there is none.
pub fn calibrate_eta_to<T: Scalar>(samples: &[(T, T)], target_deg: T) -> Result<Calibration<T>> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "calibration needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    if !(target_deg > T::zero() && target_deg < T::of(90.0)) {
        return Err(Error::config("calibration target must lie in (0, 90) degrees"));
    }
    let mean_theta = |eta: T| -> Result<T> {
        let mut acc = T::zero();
        for &(e_h, e_v) in samples {
            acc += theta_from_energies(e_h, e_v, eta)?;
        }
        Ok(acc / T::of(samples.len() as f64))
    };
    let mut lo = T::of(1e-6);
    let mut hi = T::of(1e6);
    let f_lo = mean_theta(lo)? - target_deg;
    let f_hi = mean_theta(hi)? - target_deg;
    if f_lo < T::zero() || f_hi > T::zero() {
        return Err(Error::domain(
            "no calibration factor in [1e-6, 1e6] reaches the target angle",
        ));
    }
    // Bisection on log η; the bracket ratio collapses below float resolution
    // long before the iteration cap.
    let geo_mid = |a: T, b: T| ((a.ln() + b.ln()) * T::of(0.5)).exp();
    let mut eta = geo_mid(lo, hi);
    for _ in 0..200 {
        let f_mid = mean_theta(eta)? - target_deg;
        if f_mid == T::zero() {
            break;
        } else if f_mid > T::zero() {
            lo = eta;
        } else {
            hi = eta;
        }
        let next = geo_mid(lo, hi);
        if next <= lo || next >= hi || next == eta {
            break;
        }
        eta = next;
    }
    let residual = (mean_theta(eta)? - target_deg).abs();
    if residual > T::of(0.01) {
        return Err(Error::domain(
            "calibration root-find did not converge to within 0.01 degrees",
        ));
    }
    Calibration::new(eta)
}

/// Pushes one pulse through the digitizer: adds Gaussian read noise to each
/// channel and checks both against the acceptance window. Deterministic for
/// a given seed.
pub fn apply_digitizer<T: Scalar>(
    sample: &PulseSample<T>,
    cfg: &DigitizerConfig<T>,
    seed: u64,
) -> DigitizerReading<T> {
    let (mut e_h, mut e_v) = sample.channel_energies();
    if cfg.additive_noise_sigma > T::zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        e_h += T::standard_normal(&mut rng) * cfg.additive_noise_sigma;
        e_v += T::standard_normal(&mut rng) * cfg.additive_noise_sigma;
    }
    DigitizerReading {
        e_h,
        e_v,
        measurable: cfg.in_window(e_h) && cfg.in_window(e_v),
    }
}

/// Probability that a pulse of total energy `e` at orientation `theta_rad`
/// passes the window, marginalized over the read noise.
fn pass_probability(e: f64, cos_sq: f64, sin_sq: f64, floor: f64, ceiling: f64, sigma: f64) -> f64 {
    let channel = |x: f64| -> f64 {
        if sigma == 0.0 {
            return if x >= floor && x <= ceiling { 1.0 } else { 0.0 };
        }
        let phi = |z: f64| 0.5 * erfc(-z / std::f64::consts::SQRT_2);
        let upper = if ceiling.is_infinite() {
            1.0
        } else {
            phi((ceiling - x) / sigma)
        };
        upper - phi((floor - x) / sigma)
    };
    channel(e * cos_sq) * channel(e * sin_sq)
}

/// Window-pass probability at one orientation for exponentially distributed
/// total energy with the given mean.
fn angle_weight(theta_rad: f64, floor: f64, ceiling: f64, sigma: f64, mu: f64) -> f64 {
    let c = theta_rad.cos();
    let s = theta_rad.sin();
    let (lo_frac, hi_frac) = {
        let a = c * c;
        let b = s * s;
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    };
    if sigma == 0.0 {
        // Both components inside the window iff E sits in an interval fixed
        // by the smaller and larger projection.
        let e_lo = if floor == 0.0 {
            0.0
        } else if lo_frac == 0.0 {
            return 0.0;
        } else {
            floor / lo_frac
        };
        let e_hi = if ceiling.is_infinite() {
            f64::INFINITY
        } else {
            ceiling / hi_frac
        };
        if e_hi <= e_lo {
            return 0.0;
        }
        let tail = |e: f64| if e.is_infinite() { 0.0 } else { (-e / mu).exp() };
        return tail(e_lo) - tail(e_hi);
    }
    // Noisy readout: midpoint rule over x = exp(-E/mu) on (0, 1); the
    // integrand is the product of the two channel pass probabilities.
    let n = 2048;
    let h = 1.0 / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let e = -mu * x.ln();
        sum += pass_probability(e, lo_frac, hi_frac, floor, ceiling, sigma);
    }
    sum * h
}

/// Expected probability density of the measured angle over `theta_grid_deg`
/// for uniformly oriented pulses with exponentially distributed total energy
/// of mean `energy_scale`, filtered by the digitizer window.
///
/// Normalized so the density integrates to one over the full 0°..90° range;
/// the grid must lie strictly inside that range.
pub fn expected_measured_density<T: Scalar>(
    theta_grid_deg: &[T],
    cfg: &DigitizerConfig<T>,
    energy_scale: T,
) -> Result<Vec<T>> {
    if theta_grid_deg.is_empty() {
        return Err(Error::config("angle grid must be non-empty"));
    }
    for &t in theta_grid_deg {
        if !(t > T::zero() && t < T::of(90.0)) {
            return Err(Error::config("angle grid must lie strictly inside (0, 90) degrees"));
        }
    }
    if !(energy_scale > T::zero()) || energy_scale.as_f64().is_infinite() {
        return Err(Error::config("energy scale must be finite and > 0"));
    }
    let floor = cfg.floor.as_f64();
    let ceiling = cfg.ceiling.as_f64();
    let sigma = cfg.additive_noise_sigma.as_f64();
    let mu = energy_scale.as_f64();
    let rad = std::f64::consts::PI / 180.0;

    // Normalization over the full range on a fixed internal grid.
    let n_norm = 1800;
    let dh = 90.0 / n_norm as f64;
    let mut z = 0.0;
    for i in 0..=n_norm {
        let w = angle_weight(i as f64 * dh * rad, floor, ceiling, sigma, mu);
        z += if i == 0 || i == n_norm { 0.5 * w } else { w };
    }
    z *= dh;
    if !(z > 0.0) {
        return Err(Error::domain(
            "digitizer window rejects essentially every pulse; density undefined",
        ));
    }
    Ok(theta_grid_deg
        .iter()
        .map(|&t| T::of(angle_weight(t.as_f64() * rad, floor, ceiling, sigma, mu) / z))
        .collect())
}
