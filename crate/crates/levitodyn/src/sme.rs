//! Truncated-Hilbert-space quantum engine: Lindblad evolution, general
//! diffusive (Belavkin) unraveling with (η, Ξ) noise correlations,
//! photocurrents, the homodyne special case, and toy-model builders
//! (1D translational mode and planar rotor).

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::PhysicalConstants;
use crate::dynamics::{GasParams, TrapParams};
use crate::error::Error;
use crate::scattering::{DetectorGeometry, ScatterParams};
use crate::Result;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Validated density matrix: Hermitian, unit trace, positive to tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let herm_err = (&mat - mat.adjoint()).norm();
        if herm_err > 1e-10 {
            return Err(Error::ConfigInvalid(format!(
                "density matrix not Hermitian: residual {herm_err:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr - c(1.0)).norm() > 1e-9 {
            return Err(Error::ConfigInvalid(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min_eig = mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 {
            return Err(Error::ConfigInvalid(format!(
                "density matrix not positive: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// |ψ⟩⟨ψ| from a (not necessarily normalized) ket.
    pub fn pure(ket: &CVec) -> Result<Self> {
        let n2 = ket.norm_squared();
        if n2 == 0.0 {
            return Err(Error::ConfigInvalid("zero ket".into()));
        }
        Ok(Self {
            mat: ket * ket.adjoint() / c(n2),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim) / c(dim as f64),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// `Tr[op·ρ]`.
    pub fn expectation(&self, op: &CMat) -> Complex64 {
        (op * &self.mat).trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect()
    }

    /// `½‖ρ₁ − ρ₂‖₁` via the Hermitian eigenvalues of the difference.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.mat - &other.mat;
        0.5 * diff
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    }

    fn from_step(mut mat: CMat) -> Self {
        // re-hermitize and renormalize: controls integrator drift only
        mat = (&mat + mat.adjoint()) * c(0.5);
        let tr = mat.trace().re;
        mat /= c(tr);
        Self { mat }
    }
}

/// One dissipation channel: operator and its rate.
#[derive(Debug, Clone)]
pub struct LindbladChannel {
    pub operator: CMat,
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(operator: CMat, rate: f64) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::ConfigInvalid(format!("negative channel rate {rate}")));
        }
        Ok(Self { operator, rate })
    }
}

fn check_dims(k: &CMat, rho: &CMat) -> Result<()> {
    if k.nrows() != rho.nrows() || k.ncols() != rho.ncols() || !k.is_square() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: k.nrows(),
        });
    }
    Ok(())
}

/// `D[K]ρ = KρK† − ½{K†K, ρ}`.
pub fn dissipator_d(k: &CMat, rho: &CMat) -> Result<CMat> {
    check_dims(k, rho)?;
    let kdk = k.adjoint() * k;
    Ok(k * rho * k.adjoint() - (&kdk * rho + rho * &kdk) * c(0.5))
}

/// `H[K]ρ = Kρ + ρK† − tr[Kρ + ρK†]·ρ`.
pub fn superoperator_h(k: &CMat, rho: &CMat) -> Result<CMat> {
    check_dims(k, rho)?;
    let m = k * rho + rho * k.adjoint();
    let tr = m.trace();
    Ok(m - rho * tr)
}

/// Hamiltonian plus channel bundle with the cached `Σ rate·K†K`.
#[derive(Debug, Clone)]
pub struct LindbladSystem {
    pub hamiltonian: CMat,
    pub channels: Vec<LindbladChannel>,
    pub hbar: f64,
    g_tot: CMat,
}

impl LindbladSystem {
    pub fn new(hamiltonian: CMat, channels: Vec<LindbladChannel>, hbar: f64) -> Result<Self> {
        let d = hamiltonian.nrows();
        let mut g_tot = CMat::zeros(d, d);
        for ch in &channels {
            check_dims(&ch.operator, &hamiltonian)?;
            g_tot += ch.operator.adjoint() * &ch.operator * c(ch.rate);
        }
        Ok(Self {
            hamiltonian,
            channels,
            hbar,
            g_tot,
        })
    }

    /// `−(i/ħ)[H,ρ] + Σ rate·D[K]ρ`.
    pub fn drift(&self, rho: &CMat) -> CMat {
        let mut out = (&self.hamiltonian * rho - rho * &self.hamiltonian) * (-I / c(self.hbar));
        for ch in &self.channels {
            out += &ch.operator * rho * ch.operator.adjoint() * c(ch.rate);
        }
        out -= (&self.g_tot * rho + rho * &self.g_tot) * c(0.5);
        out
    }

    /// One deterministic (unconditional) step with midpoint correction.
    pub fn step(&self, rho: &DensityMatrix, dt: f64) -> DensityMatrix {
        let k1 = self.drift(rho.matrix());
        let mid = rho.matrix() + &k1 * c(dt);
        let k2 = self.drift(&mid);
        DensityMatrix::from_step(rho.matrix() + (k1 + k2) * c(dt / 2.0))
    }
}

/// `ρ + dt·(−(i/ħ)[H,ρ] + Σ rate·D[K]ρ)` with midpoint (Heun) correction and
/// trace renormalization.
pub fn lindblad_step(
    rho: &DensityMatrix,
    hamiltonian: &CMat,
    channels: &[LindbladChannel],
    hbar: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    let sys = LindbladSystem::new(hamiltonian.clone(), channels.to_vec(), hbar)?;
    Ok(sys.step(rho, dt))
}

/// Efficiency and squeezing-correlation matrices of a diffusive unraveling.
#[derive(Debug, Clone)]
pub struct UnravelingSpec {
    /// Diagonal of the efficiency matrix; entries in [0, 1].
    pub eta: DVector<f64>,
    /// Complex symmetric correlation matrix Ξ.
    pub xi: CMat,
}

impl UnravelingSpec {
    pub fn heterodyne_like(n: usize) -> Self {
        Self {
            eta: DVector::from_element(n, 1.0),
            xi: CMat::zeros(n, n),
        }
    }

    /// Real 2n×2n block matrix `½[[η+ReΞ, ImΞ], [ImΞ, η−ReΞ]]`.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let n = self.eta.len();
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            b[(i, i)] += 0.5 * self.eta[i];
            b[(n + i, n + i)] += 0.5 * self.eta[i];
        }
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] += 0.5 * self.xi[(i, j)].re;
                b[(n + i, n + j)] -= 0.5 * self.xi[(i, j)].re;
                b[(i, n + j)] += 0.5 * self.xi[(i, j)].im;
                b[(n + i, j)] += 0.5 * self.xi[(i, j)].im;
            }
        }
        b
    }
}

/// Positivity check of the (η, Ξ) block condition; reports the most negative
/// eigenvalue on failure.
pub fn validate_unraveling(spec: &UnravelingSpec) -> Result<()> {
    let n = spec.eta.len();
    if spec.xi.nrows() != n || spec.xi.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.xi.nrows(),
        });
    }
    if (&spec.xi - spec.xi.transpose()).norm() > 1e-10 {
        return Err(Error::ConfigInvalid("Xi must be complex symmetric".into()));
    }
    if spec.eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::ConfigInvalid("eta entries must lie in [0, 1]".into()));
    }
    let min_eig = spec
        .block_matrix()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(Error::InvalidUnraveling {
            min_eigenvalue: min_eig,
        });
    }
    Ok(())
}

/// Draw correlated complex Wiener increments: a real 2n Gaussian with the
/// block covariance times dt, assembled as `dW = real + i·imag`.
pub fn sample_wiener(spec: &UnravelingSpec, dt: f64, rng: &mut impl Rng) -> CVec {
    let n = spec.eta.len();
    let eig = spec.block_matrix().symmetric_eigen();
    let mut z = DVector::<f64>::zeros(2 * n);
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let g: f64 = rng.sample(StandardNormal);
        let amp = (lambda.max(0.0) * dt).sqrt() * g;
        for i in 0..2 * n {
            z[i] += eig.eigenvectors[(i, k)] * amp;
        }
    }
    CVec::from_fn(n, |j, _| Complex64::new(z[j], z[n + j]))
}

/// One Itô step of the general diffusive unraveling, returning the new state
/// and the per-channel currents. Pass `dw` to drive the inverted form with
/// externally supplied (current-derived) noise increments.
pub fn belavkin_step(
    rho: &DensityMatrix,
    sys: &LindbladSystem,
    spec: &UnravelingSpec,
    dt: f64,
    rng: &mut impl Rng,
    dw: Option<&CVec>,
) -> Result<(DensityMatrix, CVec, CVec)> {
    validate_unraveling(spec)?;
    let n = sys.channels.len();
    if spec.eta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.eta.len(),
        });
    }
    let dw = match dw {
        Some(v) => v.clone(),
        None => sample_wiener(spec, dt, rng),
    };

    // deterministic part
    let mut next = rho.matrix() + sys.drift(rho.matrix()) * c(dt);

    // measurement backaction: Σ_j H[K_j dW_j*]ρ (linear in each dW)
    for (j, ch) in sys.channels.iter().enumerate() {
        let k = &ch.operator * c(ch.rate.sqrt());
        let m = &k * rho.matrix() * dw[j].conj() + rho.matrix() * k.adjoint() * dw[j];
        let tr = m.trace();
        next += m - rho.matrix() * tr;
    }

    // J_j dt = tr[Σ_j'(η_jj' K_j' + Ξ_jj' K_j'†)ρ]dt + dW_j
    let mut currents = CVec::zeros(n);
    for j in 0..n {
        let mut tr = Complex64::new(0.0, 0.0);
        for (jp, ch) in sys.channels.iter().enumerate() {
            let k = &ch.operator * c(ch.rate.sqrt());
            if j == jp {
                tr += (&k * rho.matrix()).trace() * c(spec.eta[j]);
            }
            if spec.xi[(j, jp)].norm() > 0.0 {
                tr += (k.adjoint() * rho.matrix()).trace() * spec.xi[(j, jp)];
            }
        }
        currents[j] = tr + dw[j] / c(dt);
    }

    Ok((DensityMatrix::from_step(next), currents, dw))
}

/// One scattering direction of a toy model: the shared shape operator B, the
/// quadrature weight, and the per-polarization amplitudes `c_ν`, so that
/// `Â_{n,ν} = c_ν·B`.
#[derive(Debug, Clone)]
pub struct DirectionalChannel {
    pub operator: CMat,
    pub weight: f64,
    pub direction: Vector3<f64>,
    pub amplitudes: [Complex64; 2],
}

impl DirectionalChannel {
    fn intensity(&self) -> f64 {
        self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()
    }
}

/// Fold directional channels into plain Lindblad channels
/// (`Σ_ν D[√(γ_s w)·c_ν B] = γ_s·w·(Σ|c_ν|²)·D[B]`).
pub fn scatter_lindblad_channels(
    scatter: &[DirectionalChannel],
    gamma_s: f64,
) -> Vec<LindbladChannel> {
    scatter
        .iter()
        .map(|ch| LindbladChannel {
            operator: ch.operator.clone(),
            rate: gamma_s * ch.weight * ch.intensity(),
        })
        .collect()
}

/// Homodyne stochastic master equation: full-sphere dissipators plus the
/// collective conditioning term over the detector cap.
#[derive(Debug, Clone)]
pub struct HomodyneSme {
    sys: LindbladSystem,
    /// `Σ_ν ∫_S dn Â_{n,ν}` over the detector cap.
    measured: CMat,
    gamma_s: f64,
    pub eta: f64,
    pub omega: f64,
}

impl HomodyneSme {
    pub fn new(
        hamiltonian: CMat,
        gas_channels: Vec<LindbladChannel>,
        scatter: &[DirectionalChannel],
        gamma_s: f64,
        det: &DetectorGeometry,
        hbar: f64,
    ) -> Result<Self> {
        let d = hamiltonian.nrows();
        let mut channels = gas_channels;
        channels.extend(scatter_lindblad_channels(scatter, gamma_s));
        let cos_half = det.half_angle.cos();
        let mut measured = CMat::zeros(d, d);
        for ch in scatter {
            if ch.direction.dot(&det.axis) >= cos_half - 1e-12 {
                let amp = ch.amplitudes[0] + ch.amplitudes[1];
                measured += &ch.operator * (amp * c(ch.weight));
            }
        }
        Ok(Self {
            sys: LindbladSystem::new(hamiltonian, channels, hbar)?,
            measured,
            gamma_s,
            eta: det.eta,
            omega: det.solid_angle(),
        })
    }

    /// Mean photocurrent `η√γ_s·Tr[Σ_ν∫_S(Â + Â†)ρ]` at a frozen state.
    pub fn current_mean(&self, rho: &DensityMatrix) -> f64 {
        let m = &self.measured + self.measured.adjoint();
        self.eta * self.gamma_s.sqrt() * (m * rho.matrix()).trace().re
    }

    /// One Itô step; returns the conditional state and the current sample.
    /// `Var(dW) = 2Ωη·dt` (both polarizations detected).
    pub fn step(
        &self,
        rho: &DensityMatrix,
        dt: f64,
        rng: &mut impl Rng,
    ) -> (DensityMatrix, f64) {
        let var = 2.0 * self.omega * self.eta * dt;
        let dw = var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut next = rho.matrix() + self.sys.drift(rho.matrix()) * c(dt);
        let m = &self.measured * rho.matrix() + rho.matrix() * self.measured.adjoint();
        let tr = m.trace();
        next += (m - rho.matrix() * tr) * c(self.gamma_s.sqrt() * dw);
        let j = self.current_mean(rho) + dw / dt;
        (DensityMatrix::from_step(next), j)
    }

    /// Unconditional (ensemble-averaged) generator, for recovery checks.
    pub fn unconditional(&self) -> &LindbladSystem {
        &self.sys
    }
}

/// Annihilation operator on a truncated Fock space.
pub fn annihilation(dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt())
        } else {
            c(0.0)
        }
    })
}

/// `x̂ = x_zpf·(a + a†)` with `x_zpf = √(ħ/2Mω)`.
pub fn position_operator(dim: usize, mass: f64, omega: f64, hbar: f64) -> CMat {
    let a = annihilation(dim);
    (&a + a.adjoint()) * c((hbar / (2.0 * mass * omega)).sqrt())
}

/// `p̂ = i·p_zpf·(a† − a)` with `p_zpf = √(ħMω/2)`.
pub fn momentum_operator(dim: usize, mass: f64, omega: f64, hbar: f64) -> CMat {
    let a = annihilation(dim);
    (a.adjoint() - &a) * (I * c((hbar * mass * omega / 2.0).sqrt()))
}

/// 1D translational toy model along x: harmonic Hamiltonian from the
/// quadratic intensity coefficient, gas channel `L̂`, and scattering channels
/// `Â ≈ c_ν(n)·(1 + ik·n_x·x̂)` at full-sphere quadrature nodes.
#[derive(Debug, Clone)]
pub struct OneDModel {
    pub hamiltonian: CMat,
    pub gas_channels: Vec<LindbladChannel>,
    pub scatter: Vec<DirectionalChannel>,
    pub gamma_s: f64,
    pub omega: f64,
    pub x_op: CMat,
    pub number_op: CMat,
    pub dim: usize,
    pub hbar: f64,
}

pub fn build_1d_translational_model(
    trap: &TrapParams,
    gas: &GasParams,
    constants: &PhysicalConstants,
    fock_dim: usize,
    quadrature_orders: (usize, usize),
) -> Result<OneDModel> {
    if fock_dim < 10 {
        return Err(Error::ConfigInvalid(
            "1D model needs a Fock dimension of at least 10".into(),
        ));
    }
    let hbar = constants.hbar;
    let chi0 = trap.chi.chi0;
    // k_x = −2 c_{2,0,0}·χ0 = (VP/cσ_L)·χ0·4a1/w0²
    let k_x = trap.depth_prefactor(constants) * chi0 * 4.0 * trap.mode.a1
        / (trap.mode.w0 * trap.mode.w0);
    let omega = (k_x / trap.mass).sqrt();
    let a = annihilation(fock_dim);
    let number_op = a.adjoint() * &a;
    let hamiltonian =
        (&number_op + CMat::identity(fock_dim, fock_dim) * c(0.5)) * c(hbar * omega);
    let x_op = position_operator(fock_dim, trap.mass, omega, hbar);
    let p_op = momentum_operator(fock_dim, trap.mass, omega, hbar);

    // L̂ = (i√(4Mk_bT)/ħ)·(x̂ + iħ/(4Mk_bT)·p̂), rate γ_c
    let mkt4 = 4.0 * trap.mass * constants.k_b * gas.temperature;
    let l_op = (&x_op + &p_op * (I * c(hbar / mkt4))) * (I * c(mkt4.sqrt() / hbar));
    let gas_channels = vec![LindbladChannel {
        operator: l_op,
        rate: gas.gamma_c,
    }];

    let gamma_s = ScatterParams::from_trap(trap, constants, None).gamma_s;
    let k = trap.mode.wave_number();
    let sphere = DetectorGeometry::full_sphere(1.0)
        .with_orders(quadrature_orders.0, quadrature_orders.1);
    let ident = CMat::identity(fock_dim, fock_dim);
    let mut scatter = Vec::new();
    for (n, w) in sphere.nodes() {
        let basis = crate::optics::scattering_basis(&n)?;
        let amplitudes = [
            chi0 * (0..3)
                .map(|i| basis.eps[0][i].conj() * trap.pol.jones[i])
                .sum::<Complex64>(),
            chi0 * (0..3)
                .map(|i| basis.eps[1][i].conj() * trap.pol.jones[i])
                .sum::<Complex64>(),
        ];
        let operator = &ident + &x_op * (I * c(k * n.x));
        scatter.push(DirectionalChannel {
            operator,
            weight: w,
            direction: n,
            amplitudes,
        });
    }
    Ok(OneDModel {
        hamiltonian,
        gas_channels,
        scatter,
        gamma_s,
        omega,
        x_op,
        number_op,
        dim: fock_dim,
        hbar,
    })
}

/// Planar rotor toy model: angular-momentum basis |−l⟩…|l⟩, cos²-type
/// librational potential, and the planar restriction of the rotational gas
/// channels.
#[derive(Debug, Clone)]
pub struct PlanarRotorModel {
    pub hamiltonian: CMat,
    pub gas_channels: Vec<LindbladChannel>,
    pub pi_op: CMat,
    pub l_max: usize,
    pub dim: usize,
    /// Librational stiffness of the deep-trap harmonic approximation.
    pub k_lib: f64,
    pub hbar: f64,
}

pub fn build_planar_rotor_model(
    trap: &TrapParams,
    gas: &GasParams,
    constants: &PhysicalConstants,
    l_max: usize,
) -> Result<PlanarRotorModel> {
    if l_max < 5 {
        return Err(Error::ConfigInvalid("planar rotor needs l_max >= 5".into()));
    }
    let hbar = constants.hbar;
    let dim = 2 * l_max + 1;
    let i3 = trap.inertia.i3;
    let m_of = |idx: usize| idx as f64 - l_max as f64;

    let pi_op = CMat::from_fn(dim, dim, |i, j| {
        if i == j {
            c(hbar * m_of(i))
        } else {
            c(0.0)
        }
    });
    // e^{±iα} raise/lower m by one
    let raise = CMat::from_fn(dim, dim, |i, j| if i == j + 1 { c(1.0) } else { c(0.0) });
    let cos_a = (&raise + raise.adjoint()) * c(0.5);
    let sin_a = (&raise - raise.adjoint()) * (-I * c(0.5));

    // rotation about z: coupling χ1 cos²α + χ2 sin²α for an x-polarized drive
    let chi = trap.chi.principal();
    let pref = trap.depth_prefactor(constants);
    let cos2 = &cos_a * &cos_a;
    let sin2 = &sin_a * &sin_a;
    let free = &pi_op * &pi_op * c(1.0 / (2.0 * i3));
    let hamiltonian = free - (cos2 * c(chi.x) + sin2 * c(chi.y)) * c(pref);
    let k_lib = 2.0 * pref * (chi.x - chi.y);

    // planar restriction of the rotational channels: for ζ = 1, 2 and lab
    // components j = x, y (ζ = 3 gives a constant, j = z vanishes):
    //   C̃_1 = (cos α̂, sin α̂, 0) − (iħ/(4k_bT I₃))·(sin α̂·π̂, −cos α̂·π̂, 0)
    //   C̃_2 = (−sin α̂, cos α̂, 0) − (iħ/(4k_bT I₃))·(cos α̂·π̂, sin α̂·π̂, 0)
    // with prefactor i√(4k_bT·D̃_ζ)/ħ and rate γ_c.
    let kbt = constants.k_b * gas.temperature;
    let friction = c(hbar / (4.0 * kbt * i3));
    let d_tilde = |zeta: usize| {
        let tr = trap.inertia.i1 + trap.inertia.i2 + trap.inertia.i3;
        let iz = [trap.inertia.i1, trap.inertia.i2, trap.inertia.i3][zeta - 1];
        0.5 * tr - iz
    };
    let mut gas_channels = Vec::new();
    for (zeta, comps) in [
        (1usize, [
            &cos_a - &sin_a * &pi_op * (I * friction),
            &sin_a + &cos_a * &pi_op * (I * friction),
        ]),
        (2usize, [
            -&sin_a - &cos_a * &pi_op * (I * friction),
            &cos_a - &sin_a * &pi_op * (I * friction),
        ]),
    ] {
        let amp = I * c((4.0 * kbt * d_tilde(zeta)).sqrt() / hbar);
        for op in comps {
            gas_channels.push(LindbladChannel {
                operator: op * amp,
                rate: gas.gamma_c,
            });
        }
    }

    Ok(PlanarRotorModel {
        hamiltonian,
        gas_channels,
        pi_op,
        l_max,
        dim,
        k_lib,
        hbar,
    })
}
