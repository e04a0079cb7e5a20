//! Simulation of quantum-noise-seeded stimulated Raman scattering in diamond
//! and the polarization randomness it produces.
//!
//! Everything works in dimensionless units: time in units of the coherence
//! lifetime `1/Γ`, propagation distance in units of the crystal length, and
//! fields scaled so the vacuum-level phonon fluctuations have unit strength.
//! A single Stokes pulse is grown from noise by [`engine::SimConfig::simulate_pulse`],
//! reduced to two orthogonally polarized energies, and converted into a
//! polarization angle by [`measure`]. The [`stats`] module quantifies how
//! unpredictable a sequence of such angles is.
//!
//! Numeric code is generic over the floating-point type through [`Scalar`];
//! the type aliases at the crate root fix `f64`, which every shipped entry
//! point uses.

pub mod crystal;
pub mod engine;
pub mod error;
pub mod measure;
pub mod scalar;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Complex number type used throughout the field equations.
pub type Complex<T> = nalgebra::Complex<T>;

/// Default-precision complex amplitude.
pub type C64 = Complex<f64>;

/// Default-precision rank-two coupling tensor.
pub type Tensor3 = crystal::Tensor<f64>;

/// Default-precision gain description for a pump/crystal configuration.
pub type GainMatrix64 = crystal::GainMatrix<f64>;

/// Default-precision simulation configuration.
pub type SimConfig64 = engine::SimConfig<f64>;

/// Default-precision single-pulse result.
pub type PulseSample64 = engine::PulseSample<f64>;
