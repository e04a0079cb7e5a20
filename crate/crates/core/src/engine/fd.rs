//! Direct finite-difference integration of the coupled field/vibration
//! equations, valid for any pump geometry.
//!
//! Per τ step the vibrational modes are advanced with an exponential
//! integrator (exact damping factor, Heun correction of the coupling term,
//! noise increment scaled to reproduce the exact damped-response variance),
//! and the slaved Stokes field is re-marched along z with midpoint coupling
//! to the cell-centered modes. Leading error is O(dτ²) + O(dz²).

use nalgebra::{Vector2, Vector3};

use super::{check_resolution, FieldGrids, FieldRealization, InitialVibrations, NoiseRealization, SimGrid};
use crate::crystal::{build_gain_matrix, PumpConfig, RamanTensorSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Complex;

/// Optional behavior of [`propagate_fd_with`].
#[derive(Clone, Copy, Debug)]
pub struct FdOptions<T: Scalar> {
    pub initial: InitialVibrations<T>,
    pub store_grids: bool,
}

impl<T: Scalar> Default for FdOptions<T> {
    fn default() -> Self {
        Self {
            initial: InitialVibrations::default(),
            store_grids: false,
        }
    }
}

/// Integrates one noise realization with default options (stationary initial
/// vibrations, output row only).
pub fn propagate_fd<T: Scalar>(
    pump: &PumpConfig<T>,
    tensors: &RamanTensorSet<T>,
    grid: &SimGrid<T>,
    noise: &NoiseRealization<T>,
) -> Result<FieldRealization<T>> {
    propagate_fd_with(pump, tensors, grid, noise, &FdOptions::default())
}

pub fn propagate_fd_with<T: Scalar>(
    pump: &PumpConfig<T>,
    tensors: &RamanTensorSet<T>,
    grid: &SimGrid<T>,
    noise: &NoiseRealization<T>,
    options: &FdOptions<T>,
) -> Result<FieldRealization<T>> {
    if noise.n_z() != grid.n_z() || noise.n_tau() != grid.n_tau() {
        return Err(Error::config(format!(
            "noise grid {}x{} does not match simulation grid {}x{}",
            noise.n_z(),
            noise.n_tau(),
            grid.n_z(),
            grid.n_tau()
        )));
    }
    let gain = build_gain_matrix(tensors, &pump.polarization_vector())?;
    let st = gain.transverse_matrix();
    let half_tr = (st[(0, 0)] + st[(1, 1)]) / T::of(2.0);
    let det = st[(0, 0)] * st[(1, 1)] - st[(0, 1)] * st[(1, 0)];
    let disc = (half_tr * half_tr - det).max(T::zero());
    let max_channel_gain = half_tr + disc.sqrt();
    check_resolution(pump, grid, noise.gamma(), max_channel_gain)?;

    let n_z = grid.n_z();
    let n_tau = grid.n_tau();
    let dz = grid.dz();
    let dtau = grid.dtau();
    let gamma = noise.gamma();
    let sqrt_g = pump.gain_scale().sqrt();
    let drives = gain.transverse_drives();
    let zero = Complex::new(T::zero(), T::zero());

    // Exact per-step damping; noise increment scaled so the stationary
    // variance of the damped, noise-driven mode is reproduced at any dτ.
    let dmp = (-gamma * dtau).exp();
    let phi = (T::one() - dmp) / gamma;
    let noise_gain = (dtau * (T::one() - dmp * dmp) / (T::of(2.0) * gamma)).sqrt();

    let ic_amp = options.initial.amplitude(grid, noise.rho());
    let mut q: Vec<[Complex<T>; 3]> = (0..n_z)
        .map(|j| {
            let mut cell = [zero; 3];
            for (n, slot) in cell.iter_mut().enumerate() {
                *slot = noise.initial_draw(n, j) * ic_amp;
            }
            cell
        })
        .collect();
    let mut q_pred = vec![[zero; 3]; n_z];
    let mut s_pred = vec![[zero; 3]; n_z];
    let mut field = vec![Vector2::new(zero, zero); n_z + 1];
    let mut field_pred = vec![Vector2::new(zero, zero); n_z + 1];

    // dE/dz = −i·√γ·g · Σ_n t_n Q_n with cell-centered Q: midpoint rule.
    let march = |q: &[[Complex<T>; 3]], g: T, field: &mut Vec<Vector2<Complex<T>>>| {
        let step = Complex::new(T::zero(), -sqrt_g * g * dz);
        field[0] = Vector2::new(zero, zero);
        for j in 0..n_z {
            let mut sx = zero;
            let mut sy = zero;
            for n in 0..3 {
                sx += q[j][n] * drives[n].x;
                sy += q[j][n] * drives[n].y;
            }
            field[j + 1] = Vector2::new(field[j].x + step * sx, field[j].y + step * sy);
        }
    };
    let envelope = |k: usize| pump.envelope().amplitude(dtau * T::of(k as f64));

    let mut output = Vec::with_capacity(n_tau + 1);
    let mut grids = options.store_grids.then(|| FieldGrids {
        stokes: Vec::with_capacity((n_z + 1) * (n_tau + 1)),
        vibrations: Vec::with_capacity(n_z * (n_tau + 1)),
    });
    let record = |field: &[Vector2<Complex<T>>],
                  q: &[[Complex<T>; 3]],
                  output: &mut Vec<Vector2<Complex<T>>>,
                  grids: &mut Option<FieldGrids<T>>| {
        output.push(field[n_z]);
        if let Some(g) = grids.as_mut() {
            g.stokes.extend_from_slice(field);
            g.vibrations
                .extend(q.iter().map(|c| Vector3::new(c[0], c[1], c[2])));
        }
    };

    march(&q, envelope(0), &mut field);
    record(&field, &q, &mut output, &mut grids);

    let overflow = T::of(1e250);
    for k in 0..n_tau {
        let g0 = envelope(k);
        let g1 = envelope(k + 1);
        let v0 = Complex::new(T::zero(), sqrt_g * g0);
        let v1 = Complex::new(T::zero(), sqrt_g * g1);
        let half = T::of(0.5);

        // Predictor: coupling evaluated on the current field.
        for j in 0..n_z {
            let ec = (field[j] + field[j + 1]) * Complex::new(half, T::zero());
            for n in 0..3 {
                let dot = ec.x * drives[n].x + ec.y * drives[n].y;
                let s = dot * v0;
                s_pred[j][n] = s;
                q_pred[j][n] = q[j][n] * dmp + s * phi + noise.sample(n, j, k) * noise_gain;
            }
        }
        march(&q_pred, g1, &mut field_pred);

        // Corrector: average the coupling over both ends of the step.
        for j in 0..n_z {
            let ec = (field_pred[j] + field_pred[j + 1]) * Complex::new(half, T::zero());
            for n in 0..3 {
                let dot = ec.x * drives[n].x + ec.y * drives[n].y;
                let s = (s_pred[j][n] + dot * v1) * half;
                q[j][n] = q[j][n] * dmp + s * phi + noise.sample(n, j, k) * noise_gain;
            }
        }
        march(&q, g1, &mut field);
        record(&field, &q, &mut output, &mut grids);

        let out_sq = field[n_z].x.norm_sqr() + field[n_z].y.norm_sqr();
        if !(out_sq < overflow) {
            return Err(Error::Instability(format!(
                "field magnitude blew up at step {k}; refine the grid or lower the gain"
            )));
        }
    }

    Ok(FieldRealization::new(*grid, output, grids))
}
