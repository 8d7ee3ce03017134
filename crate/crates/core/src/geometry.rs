//! Coordinate-free primitives on SO(3) and S².
//!
//! Rotations are stored as full 3×3 matrices. Every routine here is a pure
//! function of its arguments.

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};

/// Frobenius tolerance used when checking rotation and skew invariants.
pub const ORTHO_TOL: f64 = 1e-9;

/// Unit vector along the third inertial axis. Gravity points along `+E3`.
pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// Hat map, `hat(v) * b == v.cross(&b)`.
#[rustfmt::skip]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
         0.0, -v.z,  v.y,
         v.z,  0.0, -v.x,
        -v.y,  v.x,  0.0,
    )
}

/// Vee map, the inverse of [`hat`]. Fails when `m` is not skew-symmetric
/// within [`ORTHO_TOL`].
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let defect = (m + m.transpose()).norm();
    if defect > ORTHO_TOL {
        return Err(Error::NonSkewInput { defect });
    }
    Ok(vee_unchecked(m))
}

/// Vee map without the skew check. Takes the antisymmetric part of `m`.
pub(crate) fn vee_unchecked(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Configuration error function `½ tr(I − R_dᵀ R)`, in `[0, 2]`.
pub fn attitude_error_fn(r: &Mat3, r_d: &Mat3) -> f64 {
    0.5 * (3.0 - (r_d.transpose() * r).trace())
}

/// Attitude error vector `½ (R_dᵀR − RᵀR_d)^∨`.
///
/// This is the gradient of [`attitude_error_fn`] with respect to a body-frame
/// perturbation `R ← R exp(hat(η))`.
pub fn attitude_error_vec(r: &Mat3, r_d: &Mat3) -> Vec3 {
    let a = r_d.transpose() * r;
    // a − aᵀ is skew by construction
    0.5 * vee_unchecked(&(a - a.transpose()))
}

/// Angular velocity error `Ω − RᵀR_d Ω_d`.
pub fn angular_velocity_error(r: &Mat3, r_d: &Mat3, omega: &Vec3, omega_d: &Vec3) -> Vec3 {
    omega - r.transpose() * r_d * omega_d
}

/// Closest rotation to `m` in the Frobenius sense (orthogonal polar factor).
///
/// Matrices that are already orthonormal to machine precision are returned
/// unchanged, so retraction of an exact rotation is a no-op.
pub fn project_to_rotation(m: &Mat3) -> Result<Mat3> {
    let det = m.determinant();
    if !det.is_finite() || det <= 1e-12 {
        return Err(Error::DegenerateMatrix { det });
    }
    if orthonormality_defect(m) <= 4.0 * f64::EPSILON {
        return Ok(*m);
    }
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateMatrix { det }),
    };
    // det(m) > 0 so det(U Vᵀ) = +1; no reflection fix-up needed.
    Ok(u * v_t)
}

/// Rodrigues exponential `so(3) → SO(3)`.
pub fn exp_so3(v: &Vec3) -> Mat3 {
    let theta2 = v.norm_squared();
    let k = hat(v);
    let k2 = k * k;
    let (a, b) = if theta2 < 1e-12 {
        // Taylor expansion of sin θ/θ and (1 − cos θ)/θ²
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Mat3::identity() + k * a + k2 * b
}

/// `‖RᵀR − I‖_F`.
pub fn orthonormality_defect(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

/// True when `r` is orthonormal with determinant +1 within [`ORTHO_TOL`].
pub fn is_rotation(r: &Mat3) -> bool {
    orthonormality_defect(r) <= ORTHO_TOL && (r.determinant() - 1.0).abs() <= ORTHO_TOL
}

/// Renormalize a vector onto S². Vectors already unit to machine precision are
/// returned unchanged.
pub fn normalize_unit(q: &Vec3) -> Result<Vec3> {
    let n2 = q.norm_squared();
    if !n2.is_finite() || n2 <= 1e-24 {
        return Err(Error::DegenerateDirection { norm: n2.sqrt() });
    }
    if (n2 - 1.0).abs() <= 2.0 * f64::EPSILON {
        return Ok(*q);
    }
    Ok(q / n2.sqrt())
}

/// Remove the component of `w` along the unit vector `q`.
pub fn project_transverse(w: &Vec3, q: &Vec3) -> Vec3 {
    let along = q.dot(w);
    if along == 0.0 {
        *w
    } else {
        w - q * along
    }
}

/// Rotation about the first axis.
pub fn rot_x(angle: f64) -> Mat3 {
    exp_so3(&Vec3::new(angle, 0.0, 0.0))
}

/// Rotation about the second axis.
pub fn rot_y(angle: f64) -> Mat3 {
    exp_so3(&Vec3::new(0.0, angle, 0.0))
}

/// Rotation about the third axis.
pub fn rot_z(angle: f64) -> Mat3 {
    exp_so3(&Vec3::new(0.0, 0.0, angle))
}
