//! 3-DOF surface vessel model: kinematics, rigid-body plus added mass,
//! Coriolis, and hydrodynamic damping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat3, Vec3};
use crate::scalar::Scalar;

/// Earth-frame position and heading. Heading is an unwrapped real.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

/// Body-frame surge, sway and yaw rates.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    pub fn to_vec(self) -> Vec3 {
        Vec3([self.x, self.y, self.psi])
    }

    pub fn is_finite(self) -> bool {
        self.to_vec().is_finite()
    }
}

impl From<Vec3> for Pose {
    fn from(v: Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn to_vec(self) -> Vec3 {
        Vec3([self.u, self.v, self.r])
    }

    pub fn is_finite(self) -> bool {
        self.to_vec().is_finite()
    }
}

impl From<Vec3> for BodyVelocity {
    fn from(v: Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Rigid-body and hydrodynamic coefficients, SNAME naming.
///
/// Field suffixes follow the derivative they name: `x_udot` is X_u̇,
/// `x_absu_u` is X_{|u|u}, `y_absr_v` is Y_{|r|v}, and so on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselParams {
    pub m: f64,
    pub x_g: f64,
    pub i_z: f64,
    pub x_udot: f64,
    pub y_vdot: f64,
    pub y_rdot: f64,
    pub n_vdot: f64,
    pub n_rdot: f64,
    pub x_u: f64,
    pub x_absu_u: f64,
    /// Cubic surge damping. Carried for completeness; the damping model
    /// here uses only the linear and quadratic surge terms.
    pub x_uuu: f64,
    pub y_v: f64,
    pub y_absv_v: f64,
    pub y_absr_v: f64,
    pub y_r: f64,
    pub y_absv_r: f64,
    pub y_absr_r: f64,
    pub n_v: f64,
    pub n_absv_v: f64,
    pub n_absr_v: f64,
    pub n_r: f64,
    pub n_absv_r: f64,
    pub n_absr_r: f64,
}

impl VesselParams {
    /// CyberShip II, a 1:70 scale supply-ship model.
    pub const fn cybership2() -> Self {
        Self {
            m: 23.8,
            x_g: 0.046,
            i_z: 1.760,
            x_udot: -2.0,
            y_vdot: -10.0,
            y_rdot: -0.0,
            n_vdot: -0.0,
            n_rdot: -0.0,
            x_u: -0.72253,
            x_absu_u: -1.32742,
            x_uuu: -5.86643,
            y_v: -2.0,
            y_absv_v: -36.47287,
            y_absr_v: -0.805,
            y_r: -7.250,
            y_absv_r: -0.845,
            y_absr_r: -3.450,
            n_v: 0.03130,
            n_absv_v: 3.95645,
            n_absr_v: 0.130,
            n_r: -1.900,
            n_absv_r: 0.080,
            n_absr_r: -0.750,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 23] {
        [
            ("m", self.m),
            ("x_g", self.x_g),
            ("i_z", self.i_z),
            ("x_udot", self.x_udot),
            ("y_vdot", self.y_vdot),
            ("y_rdot", self.y_rdot),
            ("n_vdot", self.n_vdot),
            ("n_rdot", self.n_rdot),
            ("x_u", self.x_u),
            ("x_absu_u", self.x_absu_u),
            ("x_uuu", self.x_uuu),
            ("y_v", self.y_v),
            ("y_absv_v", self.y_absv_v),
            ("y_absr_v", self.y_absr_v),
            ("y_r", self.y_r),
            ("y_absv_r", self.y_absv_r),
            ("y_absr_r", self.y_absr_r),
            ("n_v", self.n_v),
            ("n_absv_v", self.n_absv_v),
            ("n_absr_v", self.n_absr_v),
            ("n_r", self.n_r),
            ("n_absv_r", self.n_absv_r),
            ("n_absr_r", self.n_absr_r),
        ]
    }
}

impl Default for VesselParams {
    fn default() -> Self {
        Self::cybership2()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("vessel parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("mass matrix is singular (|det| = {0:e} < 1e-12)")]
    SingularMass(f64),
    #[error("symmetric part of the mass matrix is not positive definite")]
    MassNotPositiveDefinite,
}

pub fn rotation_matrix<T: Scalar>(psi: T) -> Mat3<T> {
    let (s, c) = (psi.sin(), psi.cos());
    let (z, o) = (T::zero(), T::one());
    Mat3([[c, -s, z], [s, c, z], [z, z, o]])
}

/// Mass matrix assembled from the parameter set, without validation.
pub fn mass_matrix_unchecked(p: &VesselParams) -> Mat3 {
    let m11 = p.m - p.x_udot;
    let m22 = p.m - p.y_vdot;
    let m23 = p.m * p.x_g - p.y_rdot;
    let m32 = p.m * p.x_g - p.n_vdot;
    let m33 = p.i_z - p.n_rdot;
    Mat3([[m11, 0.0, 0.0], [0.0, m22, m23], [0.0, m32, m33]])
}

pub fn mass_matrix(p: &VesselParams) -> Result<Mat3, ModelError> {
    if let Some((name, _)) = p.fields().iter().find(|(_, v)| !v.is_finite()) {
        return Err(ModelError::NonFinite(name));
    }
    let m = mass_matrix_unchecked(p);
    let det = m.determinant();
    if det.abs() < 1e-12 {
        return Err(ModelError::SingularMass(det));
    }
    // Sylvester's criterion on the symmetric part.
    let s = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);
    let minor1 = s(0, 0);
    let minor2 = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    let sym = Mat3([
        [s(0, 0), s(0, 1), s(0, 2)],
        [s(1, 0), s(1, 1), s(1, 2)],
        [s(2, 0), s(2, 1), s(2, 2)],
    ]);
    if minor1 <= 0.0 || minor2 <= 0.0 || sym.determinant() <= 0.0 {
        return Err(ModelError::MassNotPositiveDefinite);
    }
    Ok(m)
}

/// Closed-form inverse exploiting the decoupled surge row.
fn block_inverse(m: &Mat3) -> Mat3 {
    let m11 = m[(0, 0)];
    let (a, b, c, d) = (m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]);
    let delta = a * d - b * c;
    Mat3([
        [1.0 / m11, 0.0, 0.0],
        [0.0, d / delta, -b / delta],
        [0.0, -c / delta, a / delta],
    ])
}

pub fn coriolis_matrix<T: Scalar>(m: &Mat3, nu: Vec3<T>) -> Mat3<T> {
    let (u, v, r) = (nu[0], nu[1], nu[2]);
    let c13 = -(v * m[(1, 1)] + r * m[(1, 2)]);
    let c23 = u * m[(0, 0)];
    let z = T::zero();
    Mat3([[z, z, c13], [z, z, c23], [-c13, -c23, z]])
}

pub fn damping_matrix<T: Scalar>(p: &VesselParams, nu: Vec3<T>) -> Mat3<T> {
    let (au, av, ar) = (nu[0].abs(), nu[1].abs(), nu[2].abs());
    let d11 = au * (-p.x_absu_u) - p.x_u;
    let d22 = av * (-p.y_absv_v) + ar * (-p.y_absr_v) - p.y_v;
    let d23 = av * (-p.y_absv_r) + ar * (-p.y_absr_r) - p.y_r;
    let d32 = av * (-p.n_absv_v) + ar * (-p.n_absr_v) - p.n_v;
    let d33 = av * (-p.n_absv_r) + ar * (-p.n_absr_r) - p.n_r;
    let z = T::zero();
    Mat3([[d11, z, z], [z, d22, d23], [z, d32, d33]])
}

/// Validated vessel with its mass matrix and inverse cached.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselModel {
    params: VesselParams,
    mass: Mat3,
    mass_inv: Mat3,
    /// Environmental force vector. Held at zero; disturbances are not modelled.
    pub disturbance: Vec3,
}

impl VesselModel {
    pub fn new(params: VesselParams) -> Result<Self, ModelError> {
        let mass = mass_matrix(&params)?;
        Ok(Self {
            params,
            mass,
            mass_inv: block_inverse(&mass),
            disturbance: Vec3::zeros(),
        })
    }

    pub fn cybership2() -> Self {
        Self::new(VesselParams::cybership2()).expect("CyberShip II parameters are valid")
    }

    pub fn params(&self) -> &VesselParams {
        &self.params
    }

    pub fn mass(&self) -> &Mat3 {
        &self.mass
    }

    pub fn mass_inv(&self) -> &Mat3 {
        &self.mass_inv
    }

    pub fn coriolis<T: Scalar>(&self, nu: Vec3<T>) -> Mat3<T> {
        coriolis_matrix(&self.mass, nu)
    }

    pub fn damping<T: Scalar>(&self, nu: Vec3<T>) -> Mat3<T> {
        damping_matrix(&self.params, nu)
    }

    /// `C(ν)ν + D(ν)ν`.
    pub fn drift_force<T: Scalar>(&self, nu: Vec3<T>) -> Vec3<T> {
        self.coriolis(nu).mul_vec(nu) + self.damping(nu).mul_vec(nu)
    }

    /// `M x` for a generic vector.
    pub fn mass_mul<T: Scalar>(&self, x: Vec3<T>) -> Vec3<T> {
        Mat3::<T>::from_f64(self.mass).mul_vec(x)
    }

    pub fn mass_inv_mul<T: Scalar>(&self, x: Vec3<T>) -> Vec3<T> {
        Mat3::<T>::from_f64(self.mass_inv).mul_vec(x)
    }

    /// Body acceleration `M⁻¹(τ − C(ν)ν − D(ν)ν + b)`.
    pub fn acceleration<T: Scalar>(&self, nu: Vec3<T>, tau: Vec3<T>) -> Vec3<T> {
        let b = Vec3::<T>::from_f64(self.disturbance);
        self.mass_inv_mul(tau - self.drift_force(nu) + b)
    }

    /// Returns `(η̇, ν̇)`.
    pub fn state_derivative(&self, eta: Pose, nu: BodyVelocity, tau: Vec3) -> (Vec3, Vec3) {
        let nu = nu.to_vec();
        let eta_dot = rotation_matrix(eta.psi).mul_vec(nu);
        (eta_dot, self.acceleration(nu, tau))
    }
}
