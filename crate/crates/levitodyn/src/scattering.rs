//! Rayleigh scattering rate, classical scattering amplitude, and quadrature
//! over the detector cap.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::dynamics::{ParticleState, TrapParams};
use crate::error::Error;
use crate::kinematics::rotation_from_euler;
use crate::optics::{mode_value, scattering_basis, PolarizationBasis};
use crate::Result;

/// Scattering-rate bundle: `γ_s = (σ̃_R/σ_L)·(P/ħω_L)`, `σ̃_R = π²V²/λ⁴`.
#[derive(Debug, Clone, Copy)]
pub struct ScatterParams {
    pub gamma_s: f64,
    pub sigma_r_tilde: f64,
    pub omega_l: f64,
}

impl ScatterParams {
    /// Build from trap parameters. `omega_l` defaults to `2πc/λ` unless
    /// overridden.
    pub fn from_trap(
        trap: &TrapParams,
        constants: &PhysicalConstants,
        omega_l_override: Option<f64>,
    ) -> Self {
        let lambda = trap.mode.lambda;
        let sigma_r_tilde = std::f64::consts::PI.powi(2) * trap.volume * trap.volume
            / lambda.powi(4);
        let omega_l = omega_l_override
            .unwrap_or(2.0 * std::f64::consts::PI * constants.c / lambda);
        let gamma_s =
            (sigma_r_tilde / trap.sigma_l) * trap.power / (constants.hbar * omega_l);
        Self {
            gamma_s,
            sigma_r_tilde,
            omega_l,
        }
    }
}

/// Scattering rate alone; see [`ScatterParams::from_trap`].
pub fn scattering_rate(trap: &TrapParams, constants: &PhysicalConstants) -> f64 {
    ScatterParams::from_trap(trap, constants, None).gamma_s
}

/// Rayleigh cross-section `σ_R = (24π³V²/λ⁴)·((ε_R−1)/(ε_R+2))²`.
pub fn rayleigh_cross_section(volume: f64, epsilon_r: f64, lambda: f64) -> Result<f64> {
    if epsilon_r <= 1.0 {
        return Err(Error::UnphysicalDielectric { epsilon_r });
    }
    let f = (epsilon_r - 1.0) / (epsilon_r + 2.0);
    Ok(24.0 * std::f64::consts::PI.powi(3) * volume * volume / lambda.powi(4) * f * f)
}

/// Detector cap: directions within `half_angle` of `axis`.
#[derive(Debug, Clone)]
pub struct DetectorGeometry {
    pub axis: Vector3<f64>,
    pub half_angle: f64,
    pub eta: f64,
    /// Gauss–Legendre order in cosθ.
    pub order_theta: usize,
    /// Trapezoid order in azimuth.
    pub order_phi: usize,
}

impl DetectorGeometry {
    pub fn new(axis: Vector3<f64>, half_angle: f64, eta: f64) -> Result<Self> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector { norm });
        }
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::PI) {
            return Err(Error::ConfigInvalid(
                "detector half_angle must lie in (0, pi]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::ConfigInvalid("detector eta must lie in [0, 1]".into()));
        }
        Ok(Self {
            axis,
            half_angle,
            eta,
            order_theta: 32,
            order_phi: 64,
        })
    }

    pub fn full_sphere(eta: f64) -> Self {
        Self::new(Vector3::z(), std::f64::consts::PI, eta).unwrap()
    }

    pub fn with_orders(mut self, order_theta: usize, order_phi: usize) -> Self {
        self.order_theta = order_theta;
        self.order_phi = order_phi;
        self
    }

    /// Solid angle `Ω = 2π(1 − cos half_angle)`.
    pub fn solid_angle(&self) -> f64 {
        2.0 * std::f64::consts::PI * (1.0 - self.half_angle.cos())
    }

    /// Rotation taking e_z onto the detector axis.
    fn frame(&self) -> Matrix3<f64> {
        rotation_to(&self.axis)
    }

    /// Quadrature nodes (direction, weight) covering the cap.
    pub fn nodes(&self) -> Vec<(Vector3<f64>, f64)> {
        let frame = self.frame();
        let c_min = self.half_angle.cos();
        let (xs, ws) = gauss_legendre(self.order_theta);
        let dphi = 2.0 * std::f64::consts::PI / self.order_phi as f64;
        let mut out = Vec::with_capacity(self.order_theta * self.order_phi);
        for (x, w) in xs.iter().zip(ws.iter()) {
            // map [-1,1] -> [c_min, 1]
            let c = 0.5 * (1.0 - c_min) * x + 0.5 * (1.0 + c_min);
            let jac = 0.5 * (1.0 - c_min);
            let s = (1.0 - c * c).max(0.0).sqrt();
            for j in 0..self.order_phi {
                let az = dphi * j as f64;
                let local = Vector3::new(s * az.cos(), s * az.sin(), c);
                out.push((frame * local, w * jac * dphi));
            }
        }
        out
    }
}

/// Rotation carrying e_z onto unit vector `v` (Rodrigues; identity at v = e_z).
fn rotation_to(v: &Vector3<f64>) -> Matrix3<f64> {
    let ez = Vector3::z();
    let c = ez.dot(v);
    if c > 1.0 - 1e-14 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-14 {
        // pi rotation about x
        return Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
    }
    let axis = ez.cross(v);
    let s2 = axis.norm_squared();
    let k = crate::kinematics::skew(&axis);
    Matrix3::identity() + k + k * k * ((1.0 - c) / s2)
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "quadrature order must be at least 2");
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // recurrence for P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        ws[i] = w;
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Classical scattering amplitude
/// `A = [ε*_{n,ν}ᵀ·F χ Fᵀ·ε_d]·u(r)·exp(ik n·r)`.
pub fn classical_amplitude(
    state: &ParticleState,
    trap: &TrapParams,
    n: &Vector3<f64>,
    nu: usize,
) -> Result<Complex64> {
    let basis = scattering_basis(n)?;
    Ok(amplitude_with_basis(state, trap, &basis, nu))
}

/// Amplitude for a precomputed transverse basis (hot path for quadrature).
pub fn amplitude_with_basis(
    state: &ParticleState,
    trap: &TrapParams,
    basis: &PolarizationBasis,
    nu: usize,
) -> Complex64 {
    let f = rotation_from_euler(&state.phi);
    let chi_lab = f * trap.chi.body_matrix() * f.transpose();
    let chi_eps: Vector3<Complex64> = Vector3::from_fn(|i, _| {
        (0..3)
            .map(|j| Complex64::new(chi_lab[(i, j)], 0.0) * trap.pol.jones[j])
            .sum()
    });
    let bracket: Complex64 = (0..3).map(|i| basis.eps[nu][i].conj() * chi_eps[i]).sum();
    let k = trap.mode.wave_number();
    let phase = Complex64::from_polar(1.0, k * basis.n.dot(&state.r));
    bracket * mode_value(&trap.mode, &state.r) * phase
}

/// Sum over both transverse polarizations of the integral of `f` over the
/// detector cap: `Σ_ν ∫_S f(n, basis, ν) dn`.
pub fn integrate_over_detector<F>(f: F, det: &DetectorGeometry) -> Complex64
where
    F: Fn(&Vector3<f64>, &PolarizationBasis, usize) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, w) in det.nodes() {
        let basis = scattering_basis(&n).expect("quadrature nodes are unit vectors");
        for nu in 0..2 {
            acc += f(&n, &basis, nu) * w;
        }
    }
    acc
}
