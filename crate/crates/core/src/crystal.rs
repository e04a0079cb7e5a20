//! Raman tensors of the diamond lattice and the pump-dependent gain geometry.
//!
//! Diamond's triply degenerate optical phonon transforms as the F_2g
//! representation of O_h: each of the three modes couples pump and Stokes
//! polarizations through a symmetric traceless tensor with a single magnitude
//! `d`. Everything that decides whether the Stokes polarization is pinned or
//! free comes out of this module: the tensor triplet, basis changes, and the
//! mode-coupling (gain) matrix for a given pump polarization.
//!
//! Angle convention: polarization and analysis angles are measured
//! counterclockwise from the lab x-axis, looking along the +z propagation
//! direction. See [`BasisRotation::propagation_110`] for the lab frame used
//! by the shipped configurations.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rank-two polarizability tensor in a fixed Cartesian basis.
pub type Tensor<T> = Matrix3<T>;

/// Tolerance for orthogonality and invariant checks on constructed inputs.
fn geom_tol<T: Scalar>() -> T {
    T::of(1e-9)
}

/// The three F_2g Raman polarizability tensors in one basis, plus their
/// common magnitude `d`.
///
/// Invariants (enforced on construction): each tensor is symmetric and
/// traceless, and all three share the Frobenius norm `d·√2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RamanTensorSet<T: Scalar> {
    tensors: [Tensor<T>; 3],
    d: T,
}

impl<T: Scalar> RamanTensorSet<T> {
    /// Builds a set from explicit tensors, validating the F_2g invariants.
    pub fn new(tensors: [Tensor<T>; 3], d: T) -> Result<Self> {
        if d <= T::zero() {
            return Err(Error::config("tensor magnitude d must be positive"));
        }
        let tol = geom_tol::<T>() * d;
        let norm_want = d * T::of(std::f64::consts::SQRT_2);
        for (n, t) in tensors.iter().enumerate() {
            if (t - t.transpose()).norm() > tol {
                return Err(Error::config(format!("tensor {n} is not symmetric")));
            }
            if t.trace().abs() > tol {
                return Err(Error::config(format!("tensor {n} is not traceless")));
            }
            if (t.norm() - norm_want).abs() > tol {
                return Err(Error::config(format!(
                    "tensor {n} norm differs from d*sqrt(2)"
                )));
            }
        }
        Ok(Self { tensors, d })
    }

    pub fn tensors(&self) -> &[Tensor<T>; 3] {
        &self.tensors
    }

    /// Common tensor magnitude `d`.
    pub fn magnitude(&self) -> T {
        self.d
    }

    /// Conjugates every tensor into the rotated basis: κ → R κ Rᵀ.
    ///
    /// Symmetry, tracelessness and norms are preserved exactly, so the result
    /// is built without re-validation.
    pub fn rotated(&self, r: &BasisRotation<T>) -> Self {
        let m = r.matrix();
        let rot = |t: &Tensor<T>| m * t * m.transpose();
        Self {
            tensors: [
                rot(&self.tensors[0]),
                rot(&self.tensors[1]),
                rot(&self.tensors[2]),
            ],
            d: self.d,
        }
    }
}

/// Returns the F_2g triplet in the cubic crystal axes.
///
/// Mode `n` couples the two Cartesian directions other than `n`: tensor 0 has
/// `d` in the (y,z) slots, tensor 1 in (x,z), tensor 2 in (x,y).
pub fn f2g_tensors<T: Scalar>(d: T) -> Result<RamanTensorSet<T>> {
    if !(d > T::zero()) {
        return Err(Error::config("tensor magnitude d must be positive"));
    }
    let z = T::zero();
    let yz = Matrix3::new(z, z, z, z, z, d, z, d, z);
    let xz = Matrix3::new(z, z, d, z, z, z, d, z, z);
    let xy = Matrix3::new(z, d, z, d, z, z, z, z, z);
    Ok(RamanTensorSet {
        tensors: [yz, xz, xy],
        d,
    })
}

/// Proper rotation mapping crystal cubic axes to lab axes.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRotation<T: Scalar> {
    matrix: Matrix3<T>,
}

impl<T: Scalar> BasisRotation<T> {
    /// Validates orthogonality (RᵀR = I within 1e-9) and determinant +1.
    pub fn new(matrix: Matrix3<T>) -> Result<Self> {
        let tol = geom_tol::<T>();
        if (matrix.transpose() * matrix - Matrix3::identity()).norm() > tol {
            return Err(Error::config("basis rotation is not orthogonal"));
        }
        if (matrix.determinant() - T::one()).abs() > tol {
            return Err(Error::config(
                "basis rotation must be proper (determinant +1)",
            ));
        }
        Ok(Self { matrix })
    }

    /// Rotation whose new axes are the given (orthonormal, right-handed)
    /// vectors expressed in the old basis; rows of the matrix.
    pub fn from_axes(x: Vector3<T>, y: Vector3<T>, z: Vector3<T>) -> Result<Self> {
        Self::new(Matrix3::from_rows(&[
            x.transpose(),
            y.transpose(),
            z.transpose(),
        ]))
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    /// Rotation by `angle` radians about an arbitrary (nonzero) axis.
    pub fn about_axis(axis: Vector3<T>, angle: T) -> Result<Self> {
        if axis.norm() <= T::zero() {
            return Err(Error::config("rotation axis must be nonzero"));
        }
        let unit = nalgebra::Unit::new_normalize(axis);
        let m = nalgebra::Rotation3::from_axis_angle(&unit, angle).into_inner();
        Ok(Self { matrix: m })
    }

    /// Lab frame for propagation along the [110] crystal direction:
    /// x ∥ [1̄10], y ∥ [001], z ∥ [110].
    ///
    /// In this frame a pump polarized along x (the [1̄10] direction) couples
    /// all three Raman modes isotropically in the transverse plane, while a
    /// pump rotated to the in-plane ⟨111⟩ axis (atan(1/√2) ≈ 35.26° from x)
    /// produces the maximally anisotropic, deterministic configuration.
    pub fn propagation_110() -> Self {
        let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
        let z = T::zero();
        let o = T::one();
        Self {
            matrix: Matrix3::new(-h, h, z, z, z, o, h, h, z),
        }
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.matrix
    }

    /// Image of a (column) vector under the basis change.
    pub fn apply(&self, v: &Vector3<T>) -> Vector3<T> {
        self.matrix * v
    }
}

/// Mode-coupling structure for one pump polarization.
///
/// `matrix` is the dimensionless Gram matrix M_ij = (κ_i·p)·(κ_j·p)/d² over
/// the three modes; its transverse spectrum decides the polarization
/// behavior. `drives` keeps the underlying per-mode drive vectors (κ_n·p)/d,
/// which the propagation engine needs individually (the Gram alone does not
/// determine the transverse profile).
#[derive(Clone, Debug, PartialEq)]
pub struct GainMatrix<T: Scalar> {
    matrix: Matrix3<T>,
    drives: [Vector3<T>; 3],
}

impl<T: Scalar> GainMatrix<T> {
    /// Dimensionless mode-coupling Gram matrix.
    pub fn matrix(&self) -> &Matrix3<T> {
        &self.matrix
    }

    /// Per-mode drive vectors (κ_n·p)/d.
    pub fn drives(&self) -> &[Vector3<T>; 3] {
        &self.drives
    }

    /// Transverse (x,y) components of the drive vectors; the parts that
    /// couple to a z-propagating Stokes field.
    pub fn transverse_drives(&self) -> [Vector2<T>; 3] {
        let t = |v: &Vector3<T>| Vector2::new(v.x, v.y);
        [
            t(&self.drives[0]),
            t(&self.drives[1]),
            t(&self.drives[2]),
        ]
    }

    /// Transverse coupling matrix Σ_n t_n t_nᵀ over the drive vectors'
    /// (x,y) parts. Its quadratic form gives the small-signal gain seen by a
    /// Stokes polarization in the transverse plane.
    pub fn transverse_matrix(&self) -> Matrix2<T> {
        let mut s = Matrix2::zeros();
        for v in &self.drives {
            let t = Vector2::new(v.x, v.y);
            s += t * t.transpose();
        }
        s
    }
}

/// Builds the gain matrix for a unit pump polarization vector.
pub fn build_gain_matrix<T: Scalar>(
    set: &RamanTensorSet<T>,
    pump_pol: &Vector3<T>,
) -> Result<GainMatrix<T>> {
    if (pump_pol.norm() - T::one()).abs() > geom_tol::<T>() {
        return Err(Error::config(
            "pump polarization must be a unit vector (zero vector rejected)",
        ));
    }
    let inv_d = T::one() / set.d;
    let drives = [
        set.tensors[0] * pump_pol * inv_d,
        set.tensors[1] * pump_pol * inv_d,
        set.tensors[2] * pump_pol * inv_d,
    ];
    let mut matrix = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            matrix[(i, j)] = drives[i].dot(&drives[j]);
        }
    }
    Ok(GainMatrix { matrix, drives })
}

/// Small-signal gain seen by a transverse Stokes polarization at each
/// analysis angle ψ (radians from the lab x-axis).
pub fn transverse_gain_profile<T: Scalar>(m: &GainMatrix<T>, angles: &[T]) -> Vec<T> {
    let s = m.transverse_matrix();
    angles
        .iter()
        .map(|&psi| {
            let e = Vector2::new(psi.cos(), psi.sin());
            (s * e).dot(&e)
        })
        .collect()
}

/// Temporal envelope of the pump pulse, normalized to unit peak amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope<T: Scalar> {
    /// Flat envelope: amplitude 1 across the whole window.
    Constant,
    /// Gaussian amplitude profile exp(−4·ln2·((τ−center)/fwhm)²).
    Gaussian { center: T, fwhm: T },
}

impl<T: Scalar> Envelope<T> {
    pub fn gaussian(center: T, fwhm: T) -> Result<Self> {
        if !(fwhm > T::zero()) {
            return Err(Error::config("gaussian envelope fwhm must be positive"));
        }
        Ok(Envelope::Gaussian { center, fwhm })
    }

    /// Amplitude at time τ.
    pub fn amplitude(&self, tau: T) -> T {
        match self {
            Envelope::Constant => T::one(),
            Envelope::Gaussian { center, fwhm } => {
                let u = (tau - *center) / *fwhm;
                (-T::of(4.0 * std::f64::consts::LN_2) * u * u).exp()
            }
        }
    }

    /// Closed-form ∫|amplitude|² dτ over [lo, hi]; requires lo ≤ hi.
    pub fn squared_integral(&self, lo: T, hi: T) -> T {
        match self {
            Envelope::Constant => hi - lo,
            Envelope::Gaussian { center, fwhm } => {
                // |e|² = exp(−k(τ−c)²) with k = 8·ln2/fwhm²; integral via erf.
                let k = 8.0 * std::f64::consts::LN_2 / fwhm.as_f64().powi(2);
                let c = center.as_f64();
                let rk = k.sqrt();
                let half_sqrt_pi_over_rk = 0.5 * std::f64::consts::PI.sqrt() / rk;
                let val = half_sqrt_pi_over_rk
                    * (statrs::function::erf::erf(rk * (hi.as_f64() - c))
                        - statrs::function::erf::erf(rk * (lo.as_f64() - c)));
                T::of(val)
            }
        }
    }
}

/// Pump beam description: polarization direction in the transverse plane,
/// temporal envelope, and the single dimensionless strength that absorbs all
/// absolute constants.
///
/// `gain_scale` multiplies the squared envelope in the pump integral, so the
/// total single-pass gain is `gain_scale · ∫|e(τ)|²dτ · length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpConfig<T: Scalar> {
    polarization_angle: T,
    envelope: Envelope<T>,
    gain_scale: T,
}

impl<T: Scalar> PumpConfig<T> {
    pub fn new(polarization_angle: T, envelope: Envelope<T>, gain_scale: T) -> Result<Self> {
        if !(gain_scale >= T::zero()) || !gain_scale.is_finite() {
            return Err(Error::config("gain_scale must be finite and non-negative"));
        }
        if !polarization_angle.is_finite() {
            return Err(Error::config("polarization angle must be finite"));
        }
        Ok(Self {
            polarization_angle,
            envelope,
            gain_scale,
        })
    }

    /// Angle of the pump polarization from the lab x-axis, radians.
    pub fn polarization_angle(&self) -> T {
        self.polarization_angle
    }

    pub fn envelope(&self) -> &Envelope<T> {
        &self.envelope
    }

    pub fn gain_scale(&self) -> T {
        self.gain_scale
    }

    /// Unit pump polarization vector in the lab basis.
    pub fn polarization_vector(&self) -> Vector3<T> {
        Vector3::new(
            self.polarization_angle.cos(),
            self.polarization_angle.sin(),
            T::zero(),
        )
    }

    /// Propagation direction: the lab z-axis.
    pub fn propagation(&self) -> Vector3<T> {
        Vector3::z()
    }

    /// Whether the pump is aligned with the lab x-axis (mod π), the
    /// configuration in which the transverse gain is isotropic and the
    /// closed-form solver applies.
    pub fn is_symmetric(&self) -> bool {
        self.polarization_angle.sin().abs() < geom_tol::<T>()
    }
}
