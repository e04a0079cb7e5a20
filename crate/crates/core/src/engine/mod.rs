//! Stochastic amplification engine.
//!
//! Two independent solvers grow a Stokes pulse out of Langevin noise: a
//! finite-difference march of the coupled field/vibration equations
//! ([`propagate_fd`], any pump geometry) and a Green's-function quadrature
//! ([`analytic_realization`], isotropic configuration only). Both consume the
//! same [`NoiseRealization`], so they can be cross-checked realization by
//! realization.
//!
//! Units: τ in 1/Γ with Γ = 1 by default, z in units of the crystal length,
//! fields scaled so a noise cell has variance 2Γ/(ρ·dz·dτ). Pump strength
//! enters only through the dimensionless total gain
//! `G = pump_integral(0, window) · length`.

mod analytic;
mod dump;
mod fd;
mod kernel;
mod run;
mod sample;

pub use analytic::{
    analytic_realization, analytic_realization_with, ensemble_intensity,
    spontaneous_channel_energy, AnalyticSolver, EnsembleIntensity,
};
pub use dump::{read_field_dump, write_field_dump};
pub use fd::{propagate_fd, propagate_fd_with, FdOptions};
pub use kernel::{kernel_h, pump_integral};
pub use run::{defaults, SimConfig, Solver};
pub use sample::realization_to_sample;

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::crystal::PumpConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Complex;

/// Discretization of the (z, τ) integration domain.
///
/// Field samples live on the (n_z+1)×(n_tau+1) grid points; vibration modes
/// and noise cells live on the n_z×n_tau cell centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimGrid<T: Scalar> {
    n_z: usize,
    n_tau: usize,
    length: T,
    window: T,
}

impl<T: Scalar> SimGrid<T> {
    pub fn new(n_z: usize, n_tau: usize, length: T, window: T) -> Result<Self> {
        if n_z < 2 || n_tau < 2 {
            return Err(Error::config(format!(
                "grid must have at least 2 steps per axis, got {n_z}x{n_tau}"
            )));
        }
        if !(length > T::zero()) || !(window > T::zero()) {
            return Err(Error::config("grid extents must be positive"));
        }
        Ok(Self {
            n_z,
            n_tau,
            length,
            window,
        })
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn window(&self) -> T {
        self.window
    }

    pub fn dz(&self) -> T {
        self.length / T::of(self.n_z as f64)
    }

    pub fn dtau(&self) -> T {
        self.window / T::of(self.n_tau as f64)
    }
}

/// One frozen draw of the Langevin forcing: independent complex circular
/// Gaussians on every (mode, z-cell, τ-cell), with per-cell variance
/// 2Γ/(ρ·dz·dτ), plus unit-variance draws for the initial vibration state.
#[derive(Clone, Debug)]
pub struct NoiseRealization<T: Scalar> {
    samples: Vec<Complex<T>>,
    initial: Vec<Complex<T>>,
    n_z: usize,
    n_tau: usize,
    gamma: T,
    rho: T,
    seed: u64,
}

impl<T: Scalar> NoiseRealization<T> {
    fn index(&self, mode: usize, j: usize, k: usize) -> usize {
        (mode * self.n_z + j) * self.n_tau + k
    }

    /// Forcing sample for `mode` at z-cell `j`, τ-cell `k`.
    #[inline]
    pub fn sample(&self, mode: usize, j: usize, k: usize) -> Complex<T> {
        self.samples[self.index(mode, j, k)]
    }

    /// Unit-variance draw used for the initial vibration of `mode` at z-cell
    /// `j`; solvers scale it to the configured initial-state variance.
    #[inline]
    pub fn initial_draw(&self, mode: usize, j: usize) -> Complex<T> {
        self.initial[mode * self.n_z + j]
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    /// Per-cell variance 2Γ/(ρ·dz·dτ) implied by the grid.
    pub fn cell_variance(&self, grid: &SimGrid<T>) -> T {
        T::of(2.0) * self.gamma / (self.rho * grid.dz() * grid.dtau())
    }

    /// Builds a realization from explicit sample arrays (mode-major, then z,
    /// then τ). Intended for linearity and single-cell probes in tests and
    /// for the cross-solver noise remapping.
    pub fn from_parts(
        grid: &SimGrid<T>,
        gamma: T,
        rho: T,
        seed: u64,
        samples: Vec<Complex<T>>,
        initial: Vec<Complex<T>>,
    ) -> Result<Self> {
        if samples.len() != 3 * grid.n_z * grid.n_tau || initial.len() != 3 * grid.n_z {
            return Err(Error::config("noise array lengths do not match the grid"));
        }
        if !(gamma > T::zero()) || !(rho > T::zero()) {
            return Err(Error::config("gamma and rho must be positive"));
        }
        Ok(Self {
            samples,
            initial,
            n_z: grid.n_z,
            n_tau: grid.n_tau,
            gamma,
            rho,
            seed,
        })
    }

    /// Applies an orthogonal mixing matrix across the three mode channels of
    /// every cell (and of the initial draws). An orthogonal remap preserves
    /// the noise statistics exactly, which makes it a common-random-numbers
    /// bridge between solvers with different internal channel conventions.
    pub fn remapped(&self, u: &Matrix3<T>) -> Result<Self> {
        if (u.transpose() * u - Matrix3::identity()).norm() > T::of(1e-9) {
            return Err(Error::config("mode remapping must be orthogonal"));
        }
        let mut out = self.clone();
        let cells = self.n_z * self.n_tau;
        for c in 0..cells {
            let v = [self.samples[c], self.samples[cells + c], self.samples[2 * cells + c]];
            for r in 0..3 {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (col, vc) in v.iter().enumerate() {
                    acc += *vc * u[(r, col)];
                }
                out.samples[r * cells + c] = acc;
            }
        }
        for c in 0..self.n_z {
            let v = [
                self.initial[c],
                self.initial[self.n_z + c],
                self.initial[2 * self.n_z + c],
            ];
            for r in 0..3 {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (col, vc) in v.iter().enumerate() {
                    acc += *vc * u[(r, col)];
                }
                out.initial[r * self.n_z + c] = acc;
            }
        }
        Ok(out)
    }
}

/// Draws the full Langevin forcing for one pulse. Deterministic per seed.
pub fn sample_noise<T: Scalar>(
    grid: &SimGrid<T>,
    gamma: T,
    rho: T,
    seed: u64,
) -> Result<NoiseRealization<T>> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::config("gamma must be positive and finite"));
    }
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::config("rho must be positive and finite"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let var = T::of(2.0) * gamma / (rho * grid.dz() * grid.dtau());
    let comp_std = (var / T::of(2.0)).sqrt();
    let n = 3 * grid.n_z * grid.n_tau;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let re = T::standard_normal(&mut rng) * comp_std;
        let im = T::standard_normal(&mut rng) * comp_std;
        samples.push(Complex::new(re, im));
    }
    let unit_comp = T::of(0.5).sqrt();
    let mut initial = Vec::with_capacity(3 * grid.n_z);
    for _ in 0..3 * grid.n_z {
        let re = T::standard_normal(&mut rng) * unit_comp;
        let im = T::standard_normal(&mut rng) * unit_comp;
        initial.push(Complex::new(re, im));
    }
    Ok(NoiseRealization {
        samples,
        initial,
        n_z: grid.n_z,
        n_tau: grid.n_tau,
        gamma,
        rho,
        seed,
    })
}

/// Initial state of the vibrational modes at τ = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialVibrations<T: Scalar> {
    /// Cold start: Q(z, 0) = 0.
    Zero,
    /// Stationary state of the damped noise-driven mode: per-cell variance
    /// `variance_scale / (ρ·dz)`. Scale 1 is the physical steady state;
    /// other values exist to probe sensitivity to this choice.
    Stationary { variance_scale: T },
}

impl<T: Scalar> Default for InitialVibrations<T> {
    fn default() -> Self {
        InitialVibrations::Stationary {
            variance_scale: T::one(),
        }
    }
}

impl<T: Scalar> InitialVibrations<T> {
    /// Standard deviation multiplier applied to the stored unit-variance
    /// initial draws for the given grid.
    fn amplitude(&self, grid: &SimGrid<T>, rho: T) -> T {
        match self {
            InitialVibrations::Zero => T::zero(),
            InitialVibrations::Stationary { variance_scale } => {
                (*variance_scale / (rho * grid.dz())).sqrt()
            }
        }
    }
}

/// Complex transverse Stokes field and vibration amplitudes produced by one
/// noise draw.
///
/// The Stokes field is stored as its two transverse components; there is no
/// z-component by construction. The output row at z = length is always
/// present; bulk grids are kept only when a solver is asked to store them.
#[derive(Clone, Debug)]
pub struct FieldRealization<T: Scalar> {
    grid: SimGrid<T>,
    output: Vec<Vector2<Complex<T>>>,
    grids: Option<FieldGrids<T>>,
}

/// Bulk (z, τ) grids of one realization: Stokes field on grid points
/// (z-major, (n_z+1)·(n_tau+1) entries) and vibrations on z-cell centers
/// (n_z·(n_tau+1) entries).
#[derive(Clone, Debug)]
pub struct FieldGrids<T: Scalar> {
    pub stokes: Vec<Vector2<Complex<T>>>,
    pub vibrations: Vec<Vector3<Complex<T>>>,
}

impl<T: Scalar> FieldRealization<T> {
    pub(crate) fn new(
        grid: SimGrid<T>,
        output: Vec<Vector2<Complex<T>>>,
        grids: Option<FieldGrids<T>>,
    ) -> Self {
        debug_assert_eq!(output.len(), grid.n_tau + 1);
        Self {
            grid,
            output,
            grids,
        }
    }

    pub fn grid(&self) -> &SimGrid<T> {
        &self.grid
    }

    /// Stokes field at the output face z = length, one entry per τ point.
    pub fn output(&self) -> &[Vector2<Complex<T>>] {
        &self.output
    }

    /// Full grids, if the solver was asked to store them.
    pub fn grids(&self) -> Option<&FieldGrids<T>> {
        self.grids.as_ref()
    }
}

/// Component energies and polarization state of one output pulse.
///
/// `theta_true_deg` is the orientation of the principal axis of the 2×2
/// coherency matrix, in [0°, 180°) from the lab x-axis; `dop` is the degree
/// of polarization (eigenvalue contrast of the same matrix). A pulse with
/// zero energy carries no angle: it is marked `degenerate` and its angle
/// fields are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSample<T: Scalar> {
    pub e_x: T,
    pub e_y: T,
    pub energy: T,
    pub theta_true_deg: T,
    pub dop: T,
    pub degenerate: bool,
}

impl<T: Scalar> PulseSample<T> {
    /// Detector channel energies (E_h, E_v).
    ///
    /// Channel V collects the component along the lab x-axis and channel H
    /// the orthogonal one, so that the measured angle grows away from x and
    /// a pulse polarized along x reads 0°.
    pub fn channel_energies(&self) -> (T, T) {
        (self.e_y, self.e_x)
    }

    /// True orientation folded into the measurement range [0°, 90°].
    pub fn folded_theta_deg(&self) -> T {
        let ninety = T::of(90.0);
        let t = self.theta_true_deg;
        if t > ninety {
            T::of(180.0) - t
        } else {
            t
        }
    }

    /// Fully linearly polarized pulse at `theta_deg` (from the lab x-axis)
    /// carrying total energy `energy`.
    pub fn linear(theta_deg: T, energy: T) -> Self {
        let rad = theta_deg * T::pi() / T::of(180.0);
        let (s, c) = (rad.sin(), rad.cos());
        let degenerate = !(energy > T::zero());
        Self {
            e_x: energy * c * c,
            e_y: energy * s * s,
            energy,
            theta_true_deg: theta_deg,
            dop: if degenerate { T::zero() } else { T::one() },
            degenerate,
        }
    }

    /// The ideal linear state at this pulse's principal axis, carrying the
    /// full pulse energy.
    ///
    /// This is the energy-splitting detection model: a coherent pulse
    /// deposits its energy across the two analyzer channels according to its
    /// axis orientation, so the recorded split reflects the axis rather than
    /// the raw component energies (which also carry the circular part).
    pub fn linearized(&self) -> Self {
        if self.degenerate {
            return *self;
        }
        Self::linear(self.theta_true_deg, self.energy)
    }
}

/// Derives the noise seed for one pulse from the run's master seed.
///
/// SplitMix64 finalization over master ⊕ f(index): statistically independent
/// streams for consecutive indices, stable across platforms and releases.
pub fn pulse_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trapezoid rule over equally spaced samples.
pub(crate) fn trapezoid<T: Scalar>(vals: &[T], h: T) -> T {
    if vals.len() < 2 {
        return T::zero();
    }
    let half = T::of(0.5);
    let mut acc = (vals[0] + vals[vals.len() - 1]) * half;
    for v in &vals[1..vals.len() - 1] {
        acc += *v;
    }
    acc * h
}

/// Shared resolution rule: the τ step must resolve the damping time and the
/// per-step gain increment (including the fastest transverse eigenchannel)
/// must stay small.
fn check_resolution<T: Scalar>(
    pump: &PumpConfig<T>,
    grid: &SimGrid<T>,
    gamma: T,
    max_channel_gain: T,
) -> Result<()> {
    let dtau_limit = T::of(0.1) / gamma;
    if grid.dtau() > dtau_limit * T::of(1.0 + 1e-9) {
        return Err(Error::config(format!(
            "time step {} exceeds 0.1/gamma = {}; increase n_tau",
            grid.dtau().as_f64(),
            dtau_limit.as_f64()
        )));
    }
    let a_tot = pump
        .gain_scale()
        .max(T::zero())
        * pump.envelope().squared_integral(T::zero(), grid.window());
    let step_gain = a_tot * max_channel_gain * grid.dz();
    let limit = T::of(0.1);
    if step_gain > limit * T::of(1.0 + 1e-9) {
        return Err(Error::config(format!(
            "per-step gain increment {} exceeds 0.1; increase n_z to at least {}",
            step_gain.as_f64(),
            (a_tot * max_channel_gain * grid.length() / limit).as_f64().ceil()
        )));
    }
    Ok(())
}
