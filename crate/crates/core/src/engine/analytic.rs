//! Green's-function quadrature solver for the isotropic configuration.
//!
//! Valid only when the pump is polarized along the lab x-axis: there the two
//! transverse field components decouple into independent channels, each the
//! kernel-weighted sum of fixed mode combinations of the forcing (x from
//! (F₂+F₃)/√2, y from F₁, with modes ordered yz, xz, xy). The kernel values
//! depend on the noise draw not at all, so one [`AnalyticSolver`] can be
//! reused across a whole ensemble.

use nalgebra::Vector2;
use rayon::prelude::*;

use super::{
    check_resolution, pulse_seed, sample_noise, trapezoid, FieldRealization, InitialVibrations,
    NoiseRealization, SimGrid,
};
use crate::crystal::{Envelope, PumpConfig};
use crate::engine::kernel::{kernel_h, pump_integral};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Complex;

/// Precomputed kernel quadrature for one (pump, grid, Γ) triple.
pub struct AnalyticSolver<T: Scalar> {
    pump: PumpConfig<T>,
    grid: SimGrid<T>,
    gamma: T,
    table: KernelTable<T>,
}

/// Kernel samples against every noise cell. A constant envelope makes the
/// kernel shift-invariant in τ (one row per delay); any other envelope needs
/// the full triangular table.
enum KernelTable<T: Scalar> {
    Shift { rows: Vec<T>, ic: Vec<T> },
    Full { rows: Vec<T>, ic: Vec<T> },
}

impl<T: Scalar> AnalyticSolver<T> {
    pub fn new(pump: &PumpConfig<T>, grid: &SimGrid<T>, gamma: T) -> Result<Self> {
        if !pump.is_symmetric() {
            return Err(Error::config(
                "quadrature solver requires the pump polarized along the lab x-axis; \
                 use the finite-difference solver for tilted pumps",
            ));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::config("gamma must be positive and finite"));
        }
        check_resolution(pump, grid, gamma, T::one())?;

        let n_z = grid.n_z();
        let n_tau = grid.n_tau();
        let dz = grid.dz();
        let dtau = grid.dtau();
        let length = grid.length();
        let half = T::of(0.5);

        let z_row = |a: T, dt: T, rows: &mut Vec<T>| -> Result<()> {
            for j in 0..n_z {
                let zc = (T::of(j as f64) + half) * dz;
                rows.push(kernel_h(length, zc, a, gamma, dt, T::zero())?);
            }
            Ok(())
        };

        let table = if matches!(pump.envelope(), Envelope::Constant) {
            let mut rows = Vec::with_capacity(n_tau * n_z);
            for m in 0..n_tau {
                let dt = (T::of(m as f64) + half) * dtau;
                let a = pump_integral(pump, T::zero(), dt)?;
                z_row(a, dt, &mut rows)?;
            }
            let mut ic = Vec::with_capacity((n_tau + 1) * n_z);
            for k in 0..=n_tau {
                let dt = T::of(k as f64) * dtau;
                let a = pump_integral(pump, T::zero(), dt)?;
                z_row(a, dt, &mut ic)?;
            }
            KernelTable::Shift { rows, ic }
        } else {
            let mut rows = Vec::with_capacity(n_tau * (n_tau + 1) / 2 * n_z);
            for k in 1..=n_tau {
                let tk = T::of(k as f64) * dtau;
                for kc in 0..k {
                    let tc = (T::of(kc as f64) + half) * dtau;
                    let a = pump_integral(pump, tc, tk)?;
                    z_row(a, tk - tc, &mut rows)?;
                }
            }
            let mut ic = Vec::with_capacity((n_tau + 1) * n_z);
            for k in 0..=n_tau {
                let tk = T::of(k as f64) * dtau;
                let a = pump_integral(pump, T::zero(), tk)?;
                z_row(a, tk, &mut ic)?;
            }
            KernelTable::Full { rows, ic }
        };

        Ok(Self {
            pump: *pump,
            grid: *grid,
            gamma,
            table,
        })
    }

    fn row(&self, k: usize, kc: usize) -> &[T] {
        let n_z = self.grid.n_z();
        match &self.table {
            KernelTable::Shift { rows, .. } => {
                let m = k - 1 - kc;
                &rows[m * n_z..(m + 1) * n_z]
            }
            KernelTable::Full { rows, .. } => {
                let base = k * (k - 1) / 2 + kc;
                &rows[base * n_z..(base + 1) * n_z]
            }
        }
    }

    fn ic_row(&self, k: usize) -> &[T] {
        let n_z = self.grid.n_z();
        let ic = match &self.table {
            KernelTable::Shift { ic, .. } => ic,
            KernelTable::Full { ic, .. } => ic,
        };
        &ic[k * n_z..(k + 1) * n_z]
    }

    pub fn grid(&self) -> &SimGrid<T> {
        &self.grid
    }

    /// Field at z = length for one noise draw, stationary initial vibrations.
    pub fn solve(&self, noise: &NoiseRealization<T>) -> Result<FieldRealization<T>> {
        self.solve_with(noise, &InitialVibrations::default())
    }

    pub fn solve_with(
        &self,
        noise: &NoiseRealization<T>,
        initial: &InitialVibrations<T>,
    ) -> Result<FieldRealization<T>> {
        let grid = &self.grid;
        if noise.n_z() != grid.n_z() || noise.n_tau() != grid.n_tau() {
            return Err(Error::config(format!(
                "noise grid {}x{} does not match solver grid {}x{}",
                noise.n_z(),
                noise.n_tau(),
                grid.n_z(),
                grid.n_tau()
            )));
        }
        let gdiff = (noise.gamma() - self.gamma).abs();
        if gdiff > T::of(1e-9) * self.gamma.max(T::one()) {
            return Err(Error::config(
                "noise was drawn with a different damping rate than the solver table",
            ));
        }

        let n_z = grid.n_z();
        let n_tau = grid.n_tau();
        let dz = grid.dz();
        let dtau = grid.dtau();
        let zero = Complex::new(T::zero(), T::zero());
        let inv_sqrt2 = T::of(0.5).sqrt();
        let sqrt_gs = self.pump.gain_scale().sqrt();

        // Channel sources per cell, τ-major.
        let mut ux = vec![zero; n_z * n_tau];
        let mut uy = vec![zero; n_z * n_tau];
        for kc in 0..n_tau {
            for j in 0..n_z {
                let idx = kc * n_z + j;
                ux[idx] = (noise.sample(1, j, kc) + noise.sample(2, j, kc)) * inv_sqrt2;
                uy[idx] = noise.sample(0, j, kc);
            }
        }
        let ic_amp = initial.amplitude(grid, noise.rho());
        let u0x: Vec<Complex<T>> = (0..n_z)
            .map(|j| (noise.initial_draw(1, j) + noise.initial_draw(2, j)) * (inv_sqrt2 * ic_amp))
            .collect();
        let u0y: Vec<Complex<T>> = (0..n_z)
            .map(|j| noise.initial_draw(0, j) * ic_amp)
            .collect();

        let mut output = Vec::with_capacity(n_tau + 1);
        for k in 0..=n_tau {
            let mut accx = zero;
            let mut accy = zero;
            for kc in 0..k {
                let row = self.row(k, kc);
                let off = kc * n_z;
                for j in 0..n_z {
                    let w = row[j];
                    accx += ux[off + j] * w;
                    accy += uy[off + j] * w;
                }
            }
            let mut icx = zero;
            let mut icy = zero;
            let ic = self.ic_row(k);
            for j in 0..n_z {
                icx += u0x[j] * ic[j];
                icy += u0y[j] * ic[j];
            }
            let g_k = self.pump.envelope().amplitude(T::of(k as f64) * dtau);
            let pref = Complex::new(T::zero(), sqrt_gs * g_k);
            let wq = dz * dtau;
            output.push(Vector2::new(
                pref * (accx * wq + icx * dz),
                pref * (accy * wq + icy * dz),
            ));
        }
        Ok(FieldRealization::new(*grid, output, None))
    }

    /// Deterministic expectation of the per-channel output energy implied by
    /// the noise statistics: the kernel-squared double quadrature plus the
    /// initial-state term, trapezoid-integrated over the pulse window.
    pub fn mean_channel_energy(&self, rho: T, initial: &InitialVibrations<T>) -> T {
        let grid = &self.grid;
        let n_tau = grid.n_tau();
        let dz = grid.dz();
        let dtau = grid.dtau();
        let gs = self.pump.gain_scale();
        let ic_scale = match initial {
            InitialVibrations::Zero => T::zero(),
            InitialVibrations::Stationary { variance_scale } => *variance_scale,
        };
        let noise_pref = T::of(2.0) * self.gamma / rho * dz * dtau;
        let ic_pref = ic_scale / rho * dz;

        let mut cumulative = T::zero();
        let vals: Vec<T> = (0..=n_tau)
            .map(|k| {
                if k > 0 {
                    match &self.table {
                        KernelTable::Shift { .. } => {
                            let row = self.row(k, 0);
                            cumulative += row.iter().map(|h| *h * *h).fold(T::zero(), |a, b| a + b);
                        }
                        KernelTable::Full { .. } => {
                            cumulative = T::zero();
                            for kc in 0..k {
                                let row = self.row(k, kc);
                                cumulative +=
                                    row.iter().map(|h| *h * *h).fold(T::zero(), |a, b| a + b);
                            }
                        }
                    }
                }
                let ic_sq = self
                    .ic_row(k)
                    .iter()
                    .map(|h| *h * *h)
                    .fold(T::zero(), |a, b| a + b);
                let g_k = self.pump.envelope().amplitude(T::of(k as f64) * dtau);
                gs * g_k * g_k * (noise_pref * cumulative + ic_pref * ic_sq)
            })
            .collect();
        // Shift table: row(k, 0) is the largest-delay row, the only one not
        // already counted at step k−1, so the running sum covers all cells.
        trapezoid(&vals, dtau)
    }
}

/// Expected per-channel output energy with amplification switched off in the
/// kernel (I₀ → 1): the spontaneous-scattering floor for the same pump,
/// grid and noise statistics. The ratio of [`AnalyticSolver::mean_channel_energy`]
/// to this value is the gain enhancement of the configuration.
pub fn spontaneous_channel_energy<T: Scalar>(
    pump: &PumpConfig<T>,
    grid: &SimGrid<T>,
    gamma: T,
    rho: T,
    initial: &InitialVibrations<T>,
) -> T {
    let n_tau = grid.n_tau();
    let dtau = grid.dtau();
    let length = grid.length();
    let gs = pump.gain_scale();
    let ic_scale = match initial {
        InitialVibrations::Zero => T::zero(),
        InitialVibrations::Stationary { variance_scale } => *variance_scale,
    };
    let two = T::of(2.0);
    let half = T::of(0.5);
    let vals: Vec<T> = (0..=n_tau)
        .map(|k| {
            let tk = T::of(k as f64) * dtau;
            let mut cells = T::zero();
            for kc in 0..k {
                let tc = (T::of(kc as f64) + half) * dtau;
                cells += (-two * gamma * (tk - tc)).exp();
            }
            let noise_part = two * gamma / rho * length * dtau * cells;
            let ic_part = ic_scale / rho * length * (-two * gamma * tk).exp();
            let g_k = pump.envelope().amplitude(tk);
            gs * g_k * g_k * (noise_part + ic_part)
        })
        .collect();
    trapezoid(&vals, dtau)
}

/// One-shot convenience wrapper around [`AnalyticSolver`].
pub fn analytic_realization<T: Scalar>(
    pump: &PumpConfig<T>,
    grid: &SimGrid<T>,
    noise: &NoiseRealization<T>,
) -> Result<FieldRealization<T>> {
    AnalyticSolver::new(pump, grid, noise.gamma())?.solve(noise)
}

pub fn analytic_realization_with<T: Scalar>(
    pump: &PumpConfig<T>,
    grid: &SimGrid<T>,
    noise: &NoiseRealization<T>,
    initial: &InitialVibrations<T>,
) -> Result<FieldRealization<T>> {
    AnalyticSolver::new(pump, grid, noise.gamma())?.solve_with(noise, initial)
}

/// Monte Carlo mean of the pulse energy seen through an ideal linear
/// analyzer at each angle ψ (radians from the lab x-axis), with the
/// deterministic kernel-squared quadrature alongside for comparison.
#[derive(Clone, Debug)]
pub struct EnsembleIntensity<T: Scalar> {
    pub psi: Vec<T>,
    pub mean: Vec<T>,
    pub standard_error: Vec<T>,
    pub quadrature: T,
    pub n_realizations: usize,
}

/// Runs `n_realizations` seeded quadrature-solver pulses at unit Γ and ρ.
pub fn ensemble_intensity<T: Scalar>(
    pump: &PumpConfig<T>,
    grid: &SimGrid<T>,
    psi_list: &[T],
    n_realizations: usize,
    seed: u64,
) -> Result<EnsembleIntensity<T>> {
    if n_realizations < 100 {
        return Err(Error::InsufficientData(format!(
            "ensemble mean needs at least 100 realizations, got {n_realizations}"
        )));
    }
    if psi_list.is_empty() {
        return Err(Error::config("empty projection-angle list"));
    }
    let solver = AnalyticSolver::new(pump, grid, T::one())?;
    let projections: Vec<(T, T)> = psi_list.iter().map(|p| (p.cos(), p.sin())).collect();
    let dtau = grid.dtau();

    let per_real: Vec<Vec<T>> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<T>> {
            let noise = sample_noise(grid, T::one(), T::one(), pulse_seed(seed, r))?;
            let field = solver.solve(&noise)?;
            Ok(projections
                .iter()
                .map(|(c, s)| {
                    let vals: Vec<T> = field
                        .output()
                        .iter()
                        .map(|v| {
                            let proj = v.x * *c + v.y * *s;
                            proj.norm_sqr()
                        })
                        .collect();
                    trapezoid(&vals, dtau)
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let n = T::of(n_realizations as f64);
    let mut mean = vec![T::zero(); psi_list.len()];
    for row in &per_real {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += *v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut standard_error = vec![T::zero(); psi_list.len()];
    for row in &per_real {
        for (i, v) in row.iter().enumerate() {
            let d = *v - mean[i];
            standard_error[i] += d * d;
        }
    }
    for se in standard_error.iter_mut() {
        *se = (*se / (n - T::one()) / n).sqrt();
    }

    let quadrature = solver.mean_channel_energy(T::one(), &InitialVibrations::default());
    Ok(EnsembleIntensity {
        psi: psi_list.to_vec(),
        mean,
        standard_error,
        quadrature,
        n_realizations,
    })
}
