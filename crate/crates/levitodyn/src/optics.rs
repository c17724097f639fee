//! Beam mode, polarization vectors, susceptibility tensors and the
//! gradient-coupling scalar.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::Error;
use crate::kinematics::{rotation_from_euler, EulerAngles};
use crate::Result;

/// Drive-beam polarization `ε_d = (b_x, i·b_y, 0)/√(b_x² + b_y²)`.
#[derive(Debug, Clone)]
pub struct Polarization {
    pub jones: Vector3<Complex64>,
    pub b_x: f64,
    pub b_y: f64,
}

/// Elliptical polarization from the two real ellipticity parameters.
///
/// `(b, 0)` is linear along x, `(0, b)` linear along y, `b_x = b_y` circular.
pub fn elliptical_polarization(b_x: f64, b_y: f64) -> Result<Polarization> {
    let norm = (b_x * b_x + b_y * b_y).sqrt();
    if norm == 0.0 {
        return Err(Error::DegeneratePolarization);
    }
    Ok(Polarization {
        jones: Vector3::new(
            Complex64::new(b_x / norm, 0.0),
            Complex64::new(0.0, b_y / norm),
            Complex64::new(0.0, 0.0),
        ),
        b_x,
        b_y,
    })
}

/// Slightly modified Gaussian mode
/// `u(r) = (w0/w(z))·exp(−(a1·x² + a2·y²)/w(z)²)·exp(ikz)`,
/// with `w(z) = w0·√(1 + (z/zR)²)`. Travelling wave; no standing-wave option.
#[derive(Debug, Clone, Copy)]
pub struct GaussianMode {
    /// Beam waist, m.
    pub w0: f64,
    /// Rayleigh range, m.
    pub z_r: f64,
    /// Wavelength, m.
    pub lambda: f64,
    /// Transverse asymmetry parameters (dimensionless).
    pub a1: f64,
    pub a2: f64,
}

impl GaussianMode {
    pub fn new(w0: f64, z_r: f64, lambda: f64, a1: f64, a2: f64) -> Result<Self> {
        if w0 <= 0.0 || z_r <= 0.0 || lambda <= 0.0 {
            return Err(Error::ConfigInvalid(
                "beam waist, Rayleigh range and wavelength must be positive".into(),
            ));
        }
        Ok(Self { w0, z_r, lambda, a1, a2 })
    }

    /// Wave number `k = 2π/λ` (derived, never stored independently).
    pub fn wave_number(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda
    }

    pub fn width_at(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.z_r).powi(2)).sqrt()
    }
}

/// Complex mode value at a lab-frame position.
pub fn mode_value(mode: &GaussianMode, r: &Vector3<f64>) -> Complex64 {
    let w = mode.width_at(r.z);
    let amp = (mode.w0 / w) * (-(mode.a1 * r.x * r.x + mode.a2 * r.y * r.y) / (w * w)).exp();
    let phase = mode.wave_number() * r.z;
    Complex64::from_polar(amp, phase)
}

/// Taylor coefficients `c_{k,l,m}` of `(VP/cσ_L)·|u(r)|²` about the origin,
/// for all total orders `k + l + m ≤ 4`.
#[derive(Debug, Clone)]
pub struct IntensityExpansion {
    coeffs: Vec<((usize, usize, usize), f64)>,
}

impl IntensityExpansion {
    /// Coefficient of `x^k y^l z^m`; zero for indices outside the table.
    pub fn coefficient(&self, k: usize, l: usize, m: usize) -> f64 {
        self.coeffs
            .iter()
            .find(|(idx, _)| *idx == (k, l, m))
            .map(|(_, c)| *c)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &((usize, usize, usize), f64)> {
        self.coeffs.iter()
    }
}

/// Expansion of the trap intensity profile with the full prefactor
/// `prefactor = VP/(cσ_L)` included.
///
/// `|u|² = (1 + z²/zR²)⁻¹·exp(−(2a1·x² + 2a2·y²)/(w0²(1 + z²/zR²)))`; all
/// coefficients with odd k or odd l vanish by symmetry.
pub fn intensity_expansion(mode: &GaussianMode, prefactor: f64) -> IntensityExpansion {
    let u2 = 2.0 * mode.a1 / (mode.w0 * mode.w0);
    let v2 = 2.0 * mode.a2 / (mode.w0 * mode.w0);
    let zr2 = mode.z_r * mode.z_r;
    let q = prefactor;
    let mut coeffs = Vec::new();
    for k in 0..=4usize {
        for l in 0..=(4 - k) {
            for m in 0..=(4 - k - l) {
                let c = match (k, l, m) {
                    (0, 0, 0) => q,
                    (2, 0, 0) => -q * u2,
                    (0, 2, 0) => -q * v2,
                    (0, 0, 2) => -q / zr2,
                    (4, 0, 0) => q * u2 * u2 / 2.0,
                    (0, 4, 0) => q * v2 * v2 / 2.0,
                    (0, 0, 4) => q / (zr2 * zr2),
                    (2, 2, 0) => q * u2 * v2,
                    (2, 0, 2) => q * 2.0 * u2 / zr2,
                    (0, 2, 2) => q * 2.0 * v2 / zr2,
                    _ => 0.0,
                };
                coeffs.push(((k, l, m), c));
            }
        }
    }
    IntensityExpansion { coeffs }
}

/// Body-frame susceptibility `χ = χ₀(𝕀 + Δχ)` with diagonal anisotropy.
#[derive(Debug, Clone, Copy)]
pub struct Susceptibility {
    pub chi0: f64,
    /// Diagonal of the anisotropy matrix Δχ.
    pub delta_chi: Vector3<f64>,
}

impl Susceptibility {
    pub fn new(chi0: f64, delta_chi: Vector3<f64>) -> Result<Self> {
        let chi = Vector3::new(
            chi0 * (1.0 + delta_chi.x),
            chi0 * (1.0 + delta_chi.y),
            chi0 * (1.0 + delta_chi.z),
        );
        if chi.x <= 0.0 || chi.y <= 0.0 || chi.z <= 0.0 {
            return Err(Error::ConfigInvalid(
                "susceptibility eigenvalues chi0*(1 + delta_chi_j) must be positive".into(),
            ));
        }
        Ok(Self { chi0, delta_chi })
    }

    pub fn isotropic(chi0: f64) -> Self {
        Self {
            chi0,
            delta_chi: Vector3::zeros(),
        }
    }

    /// Principal values (χ₁, χ₂, χ₃).
    pub fn principal(&self) -> Vector3<f64> {
        Vector3::new(
            self.chi0 * (1.0 + self.delta_chi.x),
            self.chi0 * (1.0 + self.delta_chi.y),
            self.chi0 * (1.0 + self.delta_chi.z),
        )
    }

    pub fn body_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.principal())
    }

    /// The anisotropic part χ₀·Δχ as a body-frame matrix.
    pub fn delta_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.delta_chi)
    }
}

/// Lab-frame susceptibility `χ̂ = F(φ)·χ·F(φ)ᵀ`.
pub fn lab_susceptibility(phi: &EulerAngles, chi: &Susceptibility) -> Matrix3<f64> {
    let f = rotation_from_euler(phi);
    f * chi.body_matrix() * f.transpose()
}

/// Gradient-coupling scalar `ε_d*ᵀ·χ̂·ε_d` by matrix contraction.
///
/// For the elliptical polarization and a real symmetric χ̂ the cross terms
/// cancel and the value reduces to
/// `(b_x²·χ̂_xx + b_y²·χ̂_yy)/(b_x² + b_y²)`.
pub fn gradient_coupling(phi: &EulerAngles, chi: &Susceptibility, pol: &Polarization) -> f64 {
    coupling_from_rotation(&rotation_from_euler(phi), chi, pol)
}

/// Same contraction, for a caller-supplied rotation matrix.
pub fn coupling_from_rotation(
    f: &Matrix3<f64>,
    chi: &Susceptibility,
    pol: &Polarization,
) -> f64 {
    let chi_lab = f * chi.body_matrix() * f.transpose();
    let b2 = pol.b_x * pol.b_x + pol.b_y * pol.b_y;
    (pol.b_x * pol.b_x * chi_lab[(0, 0)] + pol.b_y * pol.b_y * chi_lab[(1, 1)]) / b2
}

/// Gradient coupling by the explicit trigonometric expansion.
///
/// Alternate evaluation path kept for cross-checks against
/// [`gradient_coupling`]; includes the `1/(b_x² + b_y²)` normalization so the
/// two paths agree for non-normalized ellipticity parameters.
pub fn gradient_coupling_trig(
    phi: &EulerAngles,
    chi: &Susceptibility,
    pol: &Polarization,
) -> f64 {
    let (sa, ca) = phi.alpha.sin_cos();
    let (sb, cb) = phi.beta.sin_cos();
    let (sg, cg) = phi.gamma.sin_cos();
    let c = chi.principal();
    let bx2 = pol.b_x * pol.b_x;
    let by2 = pol.b_y * pol.b_y;
    let x_part = c.x * (ca * cb * cg - sa * sg).powi(2)
        + c.y * (ca * cb * sg + sa * cg).powi(2)
        + c.z * (ca * sb).powi(2);
    let y_part = c.x * (sa * cb * cg + ca * sg).powi(2)
        + c.y * (ca * cg - sa * cb * sg).powi(2)
        + c.z * (sa * sb).powi(2);
    (bx2 * x_part + by2 * y_part) / (bx2 + by2)
}

/// Transverse polarization basis (ε₁, ε₂) for a scattering direction n;
/// (ε₁, ε₂, n) is a right-handed triad.
#[derive(Debug, Clone)]
pub struct PolarizationBasis {
    pub eps: [Vector3<Complex64>; 2],
    pub n: Vector3<f64>,
}

impl PolarizationBasis {
    pub fn eps_real(&self, nu: usize) -> Vector3<f64> {
        self.eps[nu].map(|c| c.re)
    }
}

/// Deterministic transverse basis for a unit direction.
///
/// Generic branch: ε₁ = normalize(e_z × n), ε₂ = n × ε₁. Near the poles
/// (`|n·e_z| ≥ 0.999`) the cross product degenerates and e_x seeds the basis
/// instead: ε₁ = normalize(e_x − (e_x·n)n), ε₂ = n × ε₁, so that n = e_z
/// yields exactly (e_x, e_y).
pub fn scattering_basis(n: &Vector3<f64>) -> Result<PolarizationBasis> {
    let norm = n.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector { norm });
    }
    let e1 = if n.z.abs() < 0.999 {
        Vector3::z().cross(n).normalize()
    } else {
        let t = Vector3::x();
        (t - n * t.dot(n)).normalize()
    };
    let e2 = n.cross(&e1);
    Ok(PolarizationBasis {
        eps: [e1.map(|x| Complex64::new(x, 0.0)), e2.map(|x| Complex64::new(x, 0.0))],
        n: *n,
    })
}

/// Circular amplitudes from linear amplitudes:
/// `(amp_L, amp_R) = ((a_x + i·a_y)/√2, (a_x − i·a_y)/√2)`.
pub fn circular_from_linear(amp_x: Complex64, amp_y: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((amp_x + i * amp_y) * s, (amp_x - i * amp_y) * s)
}
