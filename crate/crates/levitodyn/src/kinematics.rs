//! Euler-angle rotation algebra for the rigid rotor.
//!
//! Angles follow the z-y'-z'' convention: the orientation of the body frame
//! is `F(φ) = F_z(α)·F_y(β)·F_z(γ)`, where each elementary rotation is
//! right-handed (`F_z(α)` carries x towards y, `F_y(β)` carries z towards x).
//! The map from angle rates to the lab-frame angular velocity is
//! `ω = N(φ)·φ̇`; the chart is singular at `sin β = 0`.

use nalgebra::{Matrix3, Vector3};

use crate::error::Error;
use crate::Result;

/// Gimbal-lock threshold on `|sin β|` below which N is treated as singular.
pub const GIMBAL_THRESHOLD: f64 = 1e-8;

/// Euler angles (α, β, γ) in radians, z-y'-z'' convention.
///
/// Angles are stored unwrapped; callers reduce modulo 2π only at output time
/// so that trajectories stay continuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub const ZERO: Self = Self {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.alpha, self.beta, self.gamma)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Principal moments of inertia (body frame), kg·m².
#[derive(Debug, Clone, Copy)]
pub struct InertiaTensor {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl InertiaTensor {
    /// Validates positivity and the triangle inequalities `I_i + I_j ≥ I_k`.
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        let ok = i1 > 0.0
            && i2 > 0.0
            && i3 > 0.0
            && i1 + i2 >= i3
            && i2 + i3 >= i1
            && i3 + i1 >= i2;
        if !ok {
            return Err(Error::ConfigInvalid(format!(
                "invalid inertia tensor ({i1}, {i2}, {i3}): principal moments must be \
                 positive and satisfy the triangle inequalities"
            )));
        }
        Ok(Self { i1, i2, i3 })
    }

    pub fn spherical(i0: f64) -> Self {
        Self {
            i1: i0,
            i2: i0,
            i3: i0,
        }
    }

    pub fn as_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.i1, self.i2, self.i3))
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(1.0 / self.i1, 1.0 / self.i2, 1.0 / self.i3))
    }
}

/// Momenta conjugate to the Euler angles, J·s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMomenta {
    pub pi_alpha: f64,
    pub pi_beta: f64,
    pub pi_gamma: f64,
}

impl AngularMomenta {
    pub fn new(pi_alpha: f64, pi_beta: f64, pi_gamma: f64) -> Self {
        Self {
            pi_alpha,
            pi_beta,
            pi_gamma,
        }
    }

    pub const ZERO: Self = Self {
        pi_alpha: 0.0,
        pi_beta: 0.0,
        pi_gamma: 0.0,
    };

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.pi_alpha, self.pi_beta, self.pi_gamma)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Rotation about the lab z axis, carrying x towards y.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation about the y axis, carrying z towards x.
pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Euler parametrization `F(φ) = F_z(α)·F_y(β)·F_z(γ)` of a generic rotation.
pub fn rotation_from_euler(phi: &EulerAngles) -> Matrix3<f64> {
    rot_z(phi.alpha) * rot_y(phi.beta) * rot_z(phi.gamma)
}

/// Recovers Euler angles from a rotation matrix, with β in [0, π].
///
/// At the chart singularity (β = 0 or π) the split between α and γ is not
/// unique; γ is set to zero there.
pub fn euler_from_rotation(r: &Matrix3<f64>) -> EulerAngles {
    let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
    if beta.sin().abs() < GIMBAL_THRESHOLD {
        // alpha and gamma only enter through their sum (difference at beta = pi)
        let alpha = r[(1, 0)].atan2(r[(0, 0)]);
        let alpha = if r[(2, 2)] > 0.0 { alpha } else { -alpha };
        return EulerAngles::new(alpha, beta, 0.0);
    }
    let alpha = r[(1, 2)].atan2(r[(0, 2)]);
    let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
    EulerAngles::new(alpha, beta, gamma)
}

/// The matrix N(φ) with `ω_lab = N(φ)·φ̇`.
///
/// Columns are the lab-frame axes the three angle rates rotate about:
/// `[e_z | F_z(α)e_y | F_z(α)F_y(β)e_z]`. Singular at sin β = 0.
pub fn n_matrix(phi: &EulerAngles) -> Matrix3<f64> {
    let (sa, ca) = phi.alpha.sin_cos();
    let (sb, cb) = phi.beta.sin_cos();
    Matrix3::new(
        0.0, -sa, ca * sb, //
        0.0, ca, sa * sb, //
        1.0, 0.0, cb,
    )
}

/// Inverse of [`n_matrix`].
///
/// Fails with [`Error::GimbalLock`] when `|sin β|` is below `threshold`
/// (pass [`GIMBAL_THRESHOLD`] for the default); integrators must not step
/// through the coordinate singularity.
pub fn n_matrix_inverse(phi: &EulerAngles, threshold: f64) -> Result<Matrix3<f64>> {
    let sb = phi.beta.sin();
    if sb.abs() < threshold {
        return Err(Error::GimbalLock {
            sin_beta: sb,
            threshold,
        });
    }
    let (sa, ca) = phi.alpha.sin_cos();
    let cb = phi.beta.cos();
    // det N = -sin(beta); closed-form adjugate over determinant.
    Ok(Matrix3::new(
        -ca * cb / sb, -sa * cb / sb, 1.0, //
        -sa, ca, 0.0, //
        ca / sb, sa / sb, 0.0,
    ))
}

/// Lab-frame angular momentum `L = (Nᵀ)⁻¹·π`.
pub fn angular_momentum_lab(
    phi: &EulerAngles,
    pi: &AngularMomenta,
    threshold: f64,
) -> Result<Vector3<f64>> {
    let n_inv = n_matrix_inverse(phi, threshold)?;
    Ok(n_inv.transpose() * pi.as_vector())
}

/// Rotational kinetic energy `πᵀ N⁻¹ F I⁻¹ Fᵀ (Nᵀ)⁻¹ π / 2`.
pub fn rotational_kinetic_energy(
    phi: &EulerAngles,
    pi: &AngularMomenta,
    inertia: &InertiaTensor,
) -> Result<f64> {
    let l_lab = angular_momentum_lab(phi, pi, GIMBAL_THRESHOLD)?;
    let f = rotation_from_euler(phi);
    let l_body = f.transpose() * l_lab;
    Ok(0.5
        * (l_body.x * l_body.x / inertia.i1
            + l_body.y * l_body.y / inertia.i2
            + l_body.z * l_body.z / inertia.i3))
}

/// Generator of rotations about the ζ axis (ζ ∈ {1, 2, 3}), normalized so
/// that `exp(θ·L_ζ) = F_ζ(θ)`, i.e. `L_ζ v = e_ζ × v`.
pub fn rotation_generator(axis: usize) -> Matrix3<f64> {
    match axis {
        1 => Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
        2 => Matrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        3 => Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        _ => panic!("rotation axis must be 1, 2 or 3"),
    }
}

/// Skew-symmetric matrix with `skew(u)·v = u × v`.
pub fn skew(u: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_angles(u: (f64, f64, f64)) -> EulerAngles {
        EulerAngles::new(2.0 * PI * u.0, 0.05 + (PI - 0.1) * u.1, 2.0 * PI * u.2)
    }

    #[test]
    fn identity_rotation() {
        let r = rotation_from_euler(&EulerAngles::ZERO);
        assert_relative_eq!(r, Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn alpha_carries_x_to_y() {
        let r = rotation_from_euler(&EulerAngles::new(FRAC_PI_2, 0.0, 0.0));
        let v = r * Vector3::x();
        assert_relative_eq!(v, Vector3::y(), epsilon = 1e-12);
    }

    #[test]
    fn beta_carries_z_to_x() {
        let r = rotation_from_euler(&EulerAngles::new(0.0, FRAC_PI_2, 0.0));
        let v = r * Vector3::z();
        assert_relative_eq!(v, Vector3::x(), epsilon = 1e-12);
    }

    #[test]
    fn n_matrix_at_gimbal_lock_is_singular() {
        let n = n_matrix(&EulerAngles::ZERO);
        assert_relative_eq!(n.column(0).into_owned(), Vector3::z(), epsilon = 1e-15);
        assert_relative_eq!(n.column(1).into_owned(), Vector3::y(), epsilon = 1e-15);
        assert_relative_eq!(n.column(2).into_owned(), Vector3::z(), epsilon = 1e-15);
        assert!(n.determinant().abs() < 1e-15);
        assert!(n_matrix_inverse(&EulerAngles::ZERO, GIMBAL_THRESHOLD).is_err());
    }

    #[test]
    fn n_matrix_at_beta_half_pi() {
        let n = n_matrix(&EulerAngles::new(0.0, FRAC_PI_2, 0.3));
        assert_relative_eq!(n.column(0).into_owned(), Vector3::z(), epsilon = 1e-15);
        assert_relative_eq!(n.column(1).into_owned(), Vector3::y(), epsilon = 1e-15);
        assert_relative_eq!(n.column(2).into_owned(), Vector3::x(), epsilon = 1e-12);
    }

    #[test]
    fn n_inverse_residual() {
        let phi = EulerAngles::new(0.37, PI / 4.0, -1.21);
        let n = n_matrix(&phi);
        let n_inv = n_matrix_inverse(&phi, GIMBAL_THRESHOLD).unwrap();
        assert_relative_eq!(n * n_inv, Matrix3::identity(), epsilon = 1e-10);
        assert_relative_eq!(
            n_matrix_inverse(&EulerAngles::new(0.0, FRAC_PI_2, 0.0), GIMBAL_THRESHOLD)
                .unwrap(),
            n_matrix(&EulerAngles::new(0.0, FRAC_PI_2, 0.0))
                .try_inverse()
                .unwrap(),
            epsilon = 1e-12
        );
    }

    // For a smooth path phi(t), the axial vector of F' F^T must equal N(phi) phi'.
    #[test]
    fn n_matrix_matches_rotation_rate() {
        let phi = EulerAngles::new(1.1, 0.8, -0.4);
        let rate = Vector3::new(0.3, -1.2, 0.7);
        let dt = 1e-6;
        let fp = rotation_from_euler(&EulerAngles::from_vector(
            &(phi.as_vector() + rate * dt),
        ));
        let fm = rotation_from_euler(&EulerAngles::from_vector(
            &(phi.as_vector() - rate * dt),
        ));
        let fdot = (fp - fm) / (2.0 * dt);
        let omega_mat = fdot * rotation_from_euler(&phi).transpose();
        // antisymmetry
        assert_relative_eq!(omega_mat, -omega_mat.transpose(), epsilon = 1e-7);
        let omega = Vector3::new(omega_mat[(2, 1)], omega_mat[(0, 2)], omega_mat[(1, 0)]);
        assert_relative_eq!(omega, n_matrix(&phi) * rate, epsilon = 1e-6);
    }

    #[test]
    fn kinetic_energy_zero_momentum() {
        let e = rotational_kinetic_energy(
            &EulerAngles::new(0.2, 1.0, 0.5),
            &AngularMomenta::ZERO,
            &InertiaTensor::spherical(2.0),
        )
        .unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn kinetic_energy_spherical_rotor() {
        // beta = pi/2, pi = (p, 0, 0): L_lab = (N^T)^-1 pi
        let p = 0.83;
        let i0 = 1.7;
        let phi = EulerAngles::new(0.0, FRAC_PI_2, 0.0);
        let pi = AngularMomenta::new(p, 0.0, 0.0);
        let e = rotational_kinetic_energy(&phi, &pi, &InertiaTensor::spherical(i0)).unwrap();
        let l = angular_momentum_lab(&phi, &pi, GIMBAL_THRESHOLD).unwrap();
        assert_relative_eq!(e, l.norm_squared() / (2.0 * i0), epsilon = 1e-12);
        assert_relative_eq!(e, p * p / (2.0 * i0), epsilon = 1e-12);
    }

    // Lagrangian route: T = omega^T I_lab omega / 2 with omega from a chosen rate.
    #[test]
    fn kinetic_energy_matches_lagrangian_route() {
        let phi = EulerAngles::new(0.9, 1.3, -2.1);
        let inertia = InertiaTensor::new(1.0, 2.0, 2.5).unwrap();
        let rate = Vector3::new(0.4, -0.2, 1.1);
        let f = rotation_from_euler(&phi);
        let i_lab = f * inertia.as_matrix() * f.transpose();
        let n = n_matrix(&phi);
        let omega = n * rate;
        let t_lagrange = 0.5 * omega.dot(&(i_lab * omega));
        let pi = AngularMomenta::from_vector(&(n.transpose() * i_lab * omega));
        let t_hamilton = rotational_kinetic_energy(&phi, &pi, &inertia).unwrap();
        assert_relative_eq!(t_hamilton, t_lagrange, epsilon = 1e-12);
    }

    #[test]
    fn spherical_rotor_gamma_invariance() {
        let inertia = InertiaTensor::spherical(3.0);
        let pi = AngularMomenta::new(0.3, -0.6, 0.2);
        let e0 = rotational_kinetic_energy(&EulerAngles::new(0.4, 1.1, 0.0), &pi, &inertia)
            .unwrap();
        for k in 1..6 {
            let e = rotational_kinetic_energy(
                &EulerAngles::new(0.4, 1.1, 0.7 * k as f64),
                &pi,
                &inertia,
            )
            .unwrap();
            // gamma shifts leave |L_body| components' quadratic form spherical
            assert_relative_eq!(e, e0, epsilon = 1e-12);
        }
    }

    #[test]
    fn generators_exponentiate_to_rotations() {
        let theta = 0.7;
        let l3 = rotation_generator(3);
        let exp = (l3 * theta).exp();
        assert_relative_eq!(exp, rot_z(theta), epsilon = 1e-12);
        let l2 = rotation_generator(2);
        assert_relative_eq!((l2 * theta).exp(), rot_y(theta), epsilon = 1e-12);
        for axis in 1..=3 {
            let l = rotation_generator(axis);
            assert_relative_eq!(l.transpose(), -l, epsilon = 1e-15);
        }
        // so(3) closure: [L1, L2] = L3
        let (l1, l2, l3) = (
            rotation_generator(1),
            rotation_generator(2),
            rotation_generator(3),
        );
        assert_relative_eq!(l1 * l2 - l2 * l1, l3, epsilon = 1e-15);
    }

    #[test]
    fn euler_roundtrip() {
        let phi = EulerAngles::new(-0.4, 2.2, 1.9);
        let r = rotation_from_euler(&phi);
        let back = euler_from_rotation(&r);
        assert_relative_eq!(rotation_from_euler(&back), r, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_is_orthonormal(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64) {
            let r = rotation_from_euler(&EulerAngles::new(a, b, c));
            let residual = (r.transpose() * r - Matrix3::identity()).norm();
            prop_assert!(residual < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn n_determinant_is_sin_beta(u in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)) {
            let phi = random_angles(u);
            let n = n_matrix(&phi);
            prop_assert!((n.determinant().abs() - phi.beta.sin().abs()).abs() < 1e-12);
        }

        #[test]
        fn kinetic_energy_form_is_psd(u in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)) {
            let phi = random_angles(u);
            let inertia = InertiaTensor::new(1.0, 1.4, 2.0).unwrap();
            // quadratic form G = N^-1 F I^-1 F^T N^-T; smallest eigenvalue >= -1e-12
            let n_inv = n_matrix_inverse(&phi, GIMBAL_THRESHOLD).unwrap();
            let f = rotation_from_euler(&phi);
            let g = n_inv * f * inertia.inverse_matrix() * f.transpose() * n_inv.transpose();
            let eig = g.symmetric_eigenvalues();
            prop_assert!(eig.min() >= -1e-12);
        }

        // (alpha, beta, gamma) -> (alpha + pi, pi - beta, gamma + pi) is NOT the same
        // rotation in z-y'-z''; the equivalent chart relabeling is
        // (alpha + pi, -beta, gamma + pi). Energy must be invariant under it once the
        // momenta are transformed with the induced map pi' = N'^T (N^T)^-1 pi.
        #[test]
        fn energy_invariant_under_chart_relabeling(u in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)) {
            let phi = random_angles(u);
            let phi2 = EulerAngles::new(phi.alpha + PI, -phi.beta, phi.gamma + PI);
            let r1 = rotation_from_euler(&phi);
            let r2 = rotation_from_euler(&phi2);
            prop_assert!((r1 - r2).norm() < 1e-12);
            let inertia = InertiaTensor::spherical(2.0);
            let pi1 = AngularMomenta::new(0.3, -0.2, 0.9);
            let l_lab = angular_momentum_lab(&phi, &pi1, GIMBAL_THRESHOLD).unwrap();
            let pi2 = AngularMomenta::from_vector(&(n_matrix(&phi2).transpose() * l_lab));
            let e1 = rotational_kinetic_energy(&phi, &pi1, &inertia).unwrap();
            let e2 = rotational_kinetic_energy(&phi2, &pi2, &inertia).unwrap();
            prop_assert!((e1 - e2).abs() <= 1e-10 * e1.abs().max(1.0));
        }
    }
}
