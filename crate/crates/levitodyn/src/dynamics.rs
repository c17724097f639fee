//! Classical Hamiltonian + Langevin evolution of the six-degree-of-freedom
//! particle: gradient force/torque, gravity, gas friction and thermal
//! diffusion, optional photon-recoil diffusion.

use nalgebra::{Matrix3, SVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::PhysicalConstants;
use crate::error::Error;
use crate::kinematics::{
    euler_from_rotation, n_matrix, n_matrix_inverse, rotation_from_euler,
    rotational_kinetic_energy, AngularMomenta, EulerAngles, InertiaTensor, GIMBAL_THRESHOLD,
};
use crate::optics::{coupling_from_rotation, mode_value, GaussianMode, Polarization, Susceptibility};
use crate::Result;

/// Full classical phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    /// Position, m.
    pub r: Vector3<f64>,
    /// Linear momentum, kg·m/s.
    pub p: Vector3<f64>,
    pub phi: EulerAngles,
    pub pi: AngularMomenta,
}

impl ParticleState {
    pub fn at_rest(r: Vector3<f64>, phi: EulerAngles) -> Self {
        Self {
            r,
            p: Vector3::zeros(),
            phi,
            pi: AngularMomenta::ZERO,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().all(|v| v.is_finite())
            && self.p.iter().all(|v| v.is_finite())
            && self.phi.as_vector().iter().all(|v| v.is_finite())
            && self.pi.as_vector().iter().all(|v| v.is_finite())
    }
}

/// Trap, beam and particle parameters.
#[derive(Debug, Clone)]
pub struct TrapParams {
    /// Laser power, W.
    pub power: f64,
    /// Beam cross-section, m².
    pub sigma_l: f64,
    /// Particle volume, m³.
    pub volume: f64,
    pub mode: GaussianMode,
    pub pol: Polarization,
    pub chi: Susceptibility,
    /// Total particle mass, kg.
    pub mass: f64,
    pub inertia: InertiaTensor,
}

impl TrapParams {
    /// Trap-depth prefactor `VP/(cσ_L)`, J.
    pub fn depth_prefactor(&self, constants: &PhysicalConstants) -> f64 {
        self.volume * self.power / (constants.c * self.sigma_l)
    }
}

/// Gas parameters for the friction/diffusion channels.
#[derive(Debug, Clone, Copy)]
pub struct GasParams {
    /// Collision (friction) rate, 1/s.
    pub gamma_c: f64,
    /// Gas temperature, K.
    pub temperature: f64,
    /// Single gas-constituent mass, kg (enters only quantum channel
    /// prefactors, kept here for configuration completeness).
    pub m_gas: f64,
}

impl GasParams {
    pub fn new(gamma_c: f64, temperature: f64, m_gas: f64) -> Result<Self> {
        if gamma_c < 0.0 || temperature <= 0.0 || m_gas <= 0.0 {
            return Err(Error::ConfigInvalid(
                "gas parameters require gamma_c >= 0, T > 0, m > 0".into(),
            ));
        }
        Ok(Self {
            gamma_c,
            temperature,
            m_gas,
        })
    }

    pub fn off() -> Self {
        Self {
            gamma_c: 0.0,
            temperature: 1.0,
            m_gas: 1.0,
        }
    }
}

/// Finite-difference scheme for gradients of the potential and of the
/// rotational kinetic energy.
#[derive(Debug, Clone, Copy)]
pub struct FdScheme {
    /// Step relative to the characteristic scale of each coordinate.
    pub h_rel: f64,
    /// Five-point Richardson extrapolation instead of plain central
    /// differences (used by conservative validation runs).
    pub richardson: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            h_rel: 1e-6,
            richardson: false,
        }
    }
}

impl FdScheme {
    pub fn richardson() -> Self {
        Self {
            h_rel: 1e-4,
            richardson: true,
        }
    }

    fn diff(&self, f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        if self.richardson {
            (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
        } else {
            (f(x + h) - f(x - h)) / (2.0 * h)
        }
    }

    fn diff_res(&self, f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
        if self.richardson {
            Ok((8.0 * (f(x + h)? - f(x - h)?) - (f(x + 2.0 * h)? - f(x - 2.0 * h)?))
                / (12.0 * h))
        } else {
            Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
        }
    }
}

/// Potential `U(r, φ) = −(VP/cσ_L)·|u(r)|²·(ε_d*ᵀχ̂ε_d) + Mgx`.
pub fn potential(state: &ParticleState, trap: &TrapParams, constants: &PhysicalConstants) -> f64 {
    potential_seated(&state.r, &state.phi, &Matrix3::identity(), trap, constants)
}

/// Potential in a re-seated orientation chart: the physical rotation is
/// `seat·F(φ_work)`.
pub(crate) fn potential_seated(
    r: &Vector3<f64>,
    phi: &EulerAngles,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    constants: &PhysicalConstants,
) -> f64 {
    let f = seat * rotation_from_euler(phi);
    let coupling = coupling_from_rotation(&f, &trap.chi, &trap.pol);
    -trap.depth_prefactor(constants) * mode_value(&trap.mode, r).norm_sqr() * coupling
        + trap.mass * constants.g * r.x
}

/// Total energy: translational + rotational kinetic + potential.
pub fn total_energy(
    state: &ParticleState,
    trap: &TrapParams,
    constants: &PhysicalConstants,
) -> Result<f64> {
    energy_seated(state, &Matrix3::identity(), trap, constants)
}

fn energy_seated(
    state: &ParticleState,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    constants: &PhysicalConstants,
) -> Result<f64> {
    Ok(state.p.norm_squared() / (2.0 * trap.mass)
        + rotational_kinetic_energy(&state.phi, &state.pi, &trap.inertia)?
        + potential_seated(&state.r, &state.phi, seat, trap, constants))
}

/// Gradient force and generalized torques `(−∂U/∂r, −∂U/∂φ)` by central
/// finite differences of the potential's two factors.
pub fn forces_and_torques(
    state: &ParticleState,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    scheme: &FdScheme,
) -> (Vector3<f64>, Vector3<f64>) {
    forces_torques_seated(
        &state.r,
        &state.phi,
        &Matrix3::identity(),
        trap,
        constants,
        scheme,
    )
}

fn forces_torques_seated(
    r: &Vector3<f64>,
    phi: &EulerAngles,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    scheme: &FdScheme,
) -> (Vector3<f64>, Vector3<f64>) {
    let pref = trap.depth_prefactor(constants);
    let coupling = |ph: &EulerAngles| {
        coupling_from_rotation(&(seat * rotation_from_euler(ph)), &trap.chi, &trap.pol)
    };
    let intensity = |rr: &Vector3<f64>| mode_value(&trap.mode, rr).norm_sqr();

    // U = −pref·I(r)·C(φ) + Mgx factorizes, so differentiate each factor.
    let c0 = coupling(phi);
    let i0 = intensity(r);
    let scales = [trap.mode.w0, trap.mode.w0, trap.mode.z_r];
    let mut force = Vector3::zeros();
    for i in 0..3 {
        let h = scheme.h_rel * scales[i];
        let di = scheme.diff(
            |x| {
                let mut rr = *r;
                rr[i] = x;
                intensity(&rr)
            },
            r[i],
            h,
        );
        force[i] = pref * c0 * di;
    }
    force.x -= trap.mass * constants.g;

    let pv = phi.as_vector();
    let mut torque = Vector3::zeros();
    for i in 0..3 {
        let dc = scheme.diff(
            |x| {
                let mut q = pv;
                q[i] = x;
                coupling(&EulerAngles::from_vector(&q))
            },
            pv[i],
            scheme.h_rel,
        );
        torque[i] = pref * i0 * dc;
    }
    (force, torque)
}

type Phase = SVector<f64, 12>;

fn pack(state: &ParticleState) -> Phase {
    let mut y = Phase::zeros();
    for i in 0..3 {
        y[i] = state.r[i];
        y[3 + i] = state.p[i];
        y[6 + i] = state.phi.as_vector()[i];
        y[9 + i] = state.pi.as_vector()[i];
    }
    y
}

fn unpack(y: &Phase) -> ParticleState {
    ParticleState {
        r: Vector3::new(y[0], y[1], y[2]),
        p: Vector3::new(y[3], y[4], y[5]),
        phi: EulerAngles::new(y[6], y[7], y[8]),
        pi: AngularMomenta::new(y[9], y[10], y[11]),
    }
}

/// Conservative drift: Hamiltonian flow of kinetic + potential energy.
fn hamiltonian_drift(
    y: &Phase,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    scheme: &FdScheme,
) -> Result<Phase> {
    let s = unpack(y);
    let n_inv = n_matrix_inverse(&s.phi, GIMBAL_THRESHOLD)?;
    let f = rotation_from_euler(&s.phi);
    let l_lab = n_inv.transpose() * s.pi.as_vector();
    let omega_lab = f * (trap.inertia.inverse_matrix() * (f.transpose() * l_lab));
    let dphi = n_inv * omega_lab;

    let (force, torque_pot) =
        forces_torques_seated(&s.r, &s.phi, seat, trap, constants, scheme);
    let pv = s.phi.as_vector();
    let mut torque_kin = Vector3::zeros();
    for i in 0..3 {
        torque_kin[i] = -scheme.diff_res(
            |x| {
                let mut q = pv;
                q[i] = x;
                rotational_kinetic_energy(&EulerAngles::from_vector(&q), &s.pi, &trap.inertia)
            },
            pv[i],
            scheme.h_rel,
        )?;
    }

    let mut dy = Phase::zeros();
    for i in 0..3 {
        dy[i] = s.p[i] / trap.mass;
        dy[3 + i] = force[i];
        dy[6 + i] = dphi[i];
        dy[9 + i] = torque_pot[i] + torque_kin[i];
    }
    Ok(dy)
}

/// One deterministic RK4 step (used when all noise channels are off).
pub fn rk4_step(
    state: &ParticleState,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    dt: f64,
    scheme: &FdScheme,
) -> Result<ParticleState> {
    rk4_seated(state, &Matrix3::identity(), trap, constants, dt, scheme)
}

fn rk4_seated(
    state: &ParticleState,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    dt: f64,
    scheme: &FdScheme,
) -> Result<ParticleState> {
    let y = pack(state);
    let k1 = hamiltonian_drift(&y, seat, trap, constants, scheme)?;
    let k2 = hamiltonian_drift(&(y + k1 * (dt / 2.0)), seat, trap, constants, scheme)?;
    let k3 = hamiltonian_drift(&(y + k2 * (dt / 2.0)), seat, trap, constants, scheme)?;
    let k4 = hamiltonian_drift(&(y + k3 * dt), seat, trap, constants, scheme)?;
    Ok(unpack(&(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))))
}

/// Photon-recoil channel: scattering rate plus the quadrature order used for
/// the angular integrals.
#[derive(Debug, Clone, Copy)]
pub struct RecoilParams {
    pub gamma_s: f64,
    pub order_theta: usize,
    pub order_phi: usize,
}

impl RecoilParams {
    pub fn new(gamma_s: f64) -> Self {
        Self {
            gamma_s,
            order_theta: 8,
            order_phi: 16,
        }
    }
}

fn chi_eps(phi: &EulerAngles, trap: &TrapParams) -> Vector3<Complex64> {
    let f = rotation_from_euler(phi);
    let chi_lab = f * trap.chi.body_matrix() * f.transpose();
    Vector3::from_fn(|i, _| {
        (0..3)
            .map(|j| Complex64::new(chi_lab[(i, j)], 0.0) * trap.pol.jones[j])
            .sum()
    })
}

/// Momentum-diffusion matrix of photon recoil at the beam focus:
/// `D_ij = ħ²k²γ_s·∫dn Σ_ν |ε*_{n,ν}ᵀχ̂ε_d|²·n_i n_j`, with
/// `E[dp dpᵀ] = D·|u(r)|²·dt`.
pub fn recoil_diffusion_coefficients(
    phi: &EulerAngles,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    recoil: &RecoilParams,
) -> Matrix3<f64> {
    let ce = chi_eps(phi, trap);
    let k = trap.mode.wave_number();
    let pref = constants.hbar * constants.hbar * k * k * recoil.gamma_s;
    let det = crate::scattering::DetectorGeometry::full_sphere(1.0)
        .with_orders(recoil.order_theta, recoil.order_phi);
    let mut d = Matrix3::zeros();
    for (n, w) in det.nodes() {
        let basis = crate::optics::scattering_basis(&n).expect("unit quadrature node");
        let mut pattern = 0.0;
        for nu in 0..2 {
            let dot: Complex64 = (0..3).map(|i| basis.eps[nu][i].conj() * ce[i]).sum();
            pattern += dot.norm_sqr();
        }
        d += (n * n.transpose()) * (pref * w * pattern);
    }
    d
}

/// Mean recoil force at the beam focus: `ħkγ_s·∫dn Σ_ν |ε*ᵀχ̂ε_d|²·(e_z − n)`,
/// scaled by `|u(r)|²` at the actual position. Derived from the first moment
/// of the scattering channel: each event absorbs ħk·e_z and emits ħk·n.
pub fn recoil_mean_force(
    phi: &EulerAngles,
    trap: &TrapParams,
    constants: &PhysicalConstants,
    recoil: &RecoilParams,
) -> Vector3<f64> {
    let ce = chi_eps(phi, trap);
    let k = trap.mode.wave_number();
    let pref = constants.hbar * k * recoil.gamma_s;
    let det = crate::scattering::DetectorGeometry::full_sphere(1.0)
        .with_orders(recoil.order_theta, recoil.order_phi);
    let mut f = Vector3::zeros();
    for (n, w) in det.nodes() {
        let basis = crate::optics::scattering_basis(&n).expect("unit quadrature node");
        let mut pattern = 0.0;
        for nu in 0..2 {
            let dot: Complex64 = (0..3).map(|i| basis.eps[nu][i].conj() * ce[i]).sum();
            pattern += dot.norm_sqr();
        }
        f += (Vector3::z() - n) * (pref * w * pattern);
    }
    f
}

/// Factor `σ(φ)` with `σσᵀ = Nᵀ(FIFᵀ)N`, so that the rotational noise
/// `dπ = √(2γ_c k_bT)·σ·dW` has the thermal covariance.
fn rot_noise_matrix(phi: &EulerAngles, inertia: &InertiaTensor) -> Matrix3<f64> {
    let b = rotation_from_euler(phi).transpose() * n_matrix(phi);
    b.transpose()
        * Matrix3::from_diagonal(&Vector3::new(
            inertia.i1.sqrt(),
            inertia.i2.sqrt(),
            inertia.i3.sqrt(),
        ))
}

fn draw3(rng: &mut impl Rng) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// One stochastic-Heun step of the Langevin equations:
/// `ṗ = F − γ_c p + ξ_t`, `π̇ = T − γ_c π + ξ_r`, with
/// `⟨ξ_t ξ_tᵀ⟩ = 2Mγ_c k_bT·𝕀/dt` and `⟨ξ_r ξ_rᵀ⟩ = 2γ_c k_bT·NᵀI_lab N/dt`.
///
/// The rotational noise acts on π with a φ-dependent coefficient only, so the
/// Itô and Stratonovich readings coincide and the stationary state is the
/// Gibbs distribution at T.
pub fn langevin_step(
    state: &ParticleState,
    trap: &TrapParams,
    gas: &GasParams,
    constants: &PhysicalConstants,
    dt: f64,
    rng: &mut impl Rng,
    scheme: &FdScheme,
) -> Result<ParticleState> {
    langevin_seated(
        state,
        &Matrix3::identity(),
        trap,
        gas,
        constants,
        dt,
        rng,
        scheme,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn langevin_seated(
    state: &ParticleState,
    seat: &Matrix3<f64>,
    trap: &TrapParams,
    gas: &GasParams,
    constants: &PhysicalConstants,
    dt: f64,
    rng: &mut impl Rng,
    scheme: &FdScheme,
    recoil: Option<&RecoilParams>,
) -> Result<ParticleState> {
    let kbt = constants.k_b * gas.temperature;
    let amp_t = (2.0 * trap.mass * gas.gamma_c * kbt).sqrt();
    let amp_r = (2.0 * gas.gamma_c * kbt).sqrt();
    let sdt = dt.sqrt();
    let xi_t = draw3(rng);
    let xi_r = draw3(rng);

    let drift = |y: &Phase| -> Result<Phase> {
        let mut dy = hamiltonian_drift(y, seat, trap, constants, scheme)?;
        for i in 0..3 {
            dy[3 + i] -= gas.gamma_c * y[3 + i];
            dy[9 + i] -= gas.gamma_c * y[9 + i];
        }
        if let Some(rec) = recoil {
            let s = unpack(y);
            let intensity = mode_value(&trap.mode, &s.r).norm_sqr();
            let f = recoil_mean_force(&s.phi, trap, constants, rec) * intensity;
            for i in 0..3 {
                dy[3 + i] += f[i];
            }
        }
        Ok(dy)
    };

    let noise = |y: &Phase| -> Phase {
        let s = unpack(y);
        let dp = xi_t * amp_t;
        let dpi = rot_noise_matrix(&s.phi, &trap.inertia) * xi_r * amp_r;
        let mut dn = Phase::zeros();
        for i in 0..3 {
            dn[3 + i] = dp[i];
            dn[9 + i] = dpi[i];
        }
        dn
    };

    let y0 = pack(state);
    let a0 = drift(&y0)?;
    let b0 = noise(&y0);

    // recoil noise evaluated at the pre-step point only
    let recoil_kick = if let Some(rec) = recoil {
        let intensity = mode_value(&trap.mode, &state.r).norm_sqr();
        let d = recoil_diffusion_coefficients(&state.phi, trap, constants, rec) * intensity;
        let eig = d.symmetric_eigen();
        let sqrt_d = eig.eigenvectors
            * Matrix3::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        sqrt_d * draw3(rng)
    } else {
        Vector3::zeros()
    };

    let y_pred = y0 + a0 * dt + b0 * sdt;
    let a1 = drift(&y_pred)?;
    let b1 = noise(&y_pred);
    let mut y1 = y0 + (a0 + a1) * (dt / 2.0) + (b0 + b1) * (sdt / 2.0);
    for i in 0..3 {
        y1[3 + i] += recoil_kick[i] * sdt;
    }
    Ok(unpack(&y1))
}

/// Integration controls for [`simulate_trajectory`].
#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub duration: f64,
    /// Emit every `stride`-th step (the initial state is always emitted).
    pub stride: usize,
    pub seed: u64,
    pub recoil: Option<RecoilParams>,
    /// Re-seat the orientation chart before |sin β| shrinks into the
    /// singular band instead of aborting with GimbalLock.
    pub reseat_on: bool,
    pub scheme: FdScheme,
    pub max_steps: usize,
}

impl IntegrationOptions {
    pub fn new(dt: f64, duration: f64, seed: u64) -> Self {
        Self {
            dt,
            duration,
            stride: 1,
            seed,
            recoil: None,
            reseat_on: false,
            scheme: FdScheme::default(),
            max_steps: 100_000_000,
        }
    }
}

/// One emitted sample: time, physical-chart state, and total energy.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: ParticleState,
    pub energy: f64,
}

const RESEAT_BAND: f64 = 0.05;

/// Rotate the working chart so the current orientation sits at β = π/2.
/// The physical rotation `seat·F(φ)` and the body angular momentum are
/// preserved exactly.
fn reseat(
    phi: &EulerAngles,
    pi: &AngularMomenta,
    seat: &Matrix3<f64>,
) -> Result<(EulerAngles, AngularMomenta, Matrix3<f64>)> {
    let r_work = rotation_from_euler(phi);
    let l_work = crate::kinematics::angular_momentum_lab(phi, pi, GIMBAL_THRESHOLD)?;
    let l_body = r_work.transpose() * l_work;

    let phi_new = EulerAngles::new(0.0, std::f64::consts::FRAC_PI_2, 0.0);
    let r_new = rotation_from_euler(&phi_new);
    let seat_new = seat * r_work * r_new.transpose();
    let l_new = r_new * l_body;
    let pi_new = AngularMomenta::from_vector(&(n_matrix(&phi_new).transpose() * l_new));
    Ok((phi_new, pi_new, seat_new))
}

/// Convert a working-chart state back to the physical orientation chart.
fn physical_state(state: &ParticleState, seat: &Matrix3<f64>) -> Result<ParticleState> {
    if (seat - Matrix3::identity()).norm() < 1e-14 {
        return Ok(*state);
    }
    let r_phys = seat * rotation_from_euler(&state.phi);
    let phi_phys = euler_from_rotation(&r_phys);
    let l_work = crate::kinematics::angular_momentum_lab(&state.phi, &state.pi, GIMBAL_THRESHOLD)?;
    let l_phys = seat * l_work;
    let pi_phys = AngularMomenta::from_vector(&(n_matrix(&phi_phys).transpose() * l_phys));
    Ok(ParticleState {
        r: state.r,
        p: state.p,
        phi: phi_phys,
        pi: pi_phys,
    })
}

/// Integrate one trajectory. Deterministic runs (γ_c = 0, recoil off) use
/// RK4; noisy runs use the stochastic Heun step. Reproducible given the seed.
pub fn simulate_trajectory(
    initial: &ParticleState,
    trap: &TrapParams,
    gas: &GasParams,
    constants: &PhysicalConstants,
    opts: &IntegrationOptions,
) -> Result<Vec<TrajectoryPoint>> {
    if opts.dt <= 0.0 || opts.duration <= 0.0 {
        return Err(Error::ConfigInvalid("dt and duration must be positive".into()));
    }
    let steps = (opts.duration / opts.dt).round() as usize;
    if steps > opts.max_steps {
        return Err(Error::ConfigInvalid(format!(
            "requested {steps} steps exceeds max_steps = {}",
            opts.max_steps
        )));
    }
    if !initial.is_finite() {
        return Err(Error::NumericalBlowup {
            t: 0.0,
            what: "initial state contains non-finite values".into(),
        });
    }
    let stride = opts.stride.max(1);
    let deterministic = gas.gamma_c == 0.0 && opts.recoil.is_none();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut state = *initial;
    let mut seat = Matrix3::identity();
    let mut out = Vec::with_capacity(steps / stride + 2);

    let emit = |out: &mut Vec<TrajectoryPoint>,
                t: f64,
                state: &ParticleState,
                seat: &Matrix3<f64>|
     -> Result<()> {
        let energy = energy_seated(state, seat, trap, constants)?;
        out.push(TrajectoryPoint {
            t,
            state: physical_state(state, seat)?,
            energy,
        });
        Ok(())
    };

    emit(&mut out, 0.0, &state, &seat)?;
    for step in 1..=steps {
        if opts.reseat_on && state.phi.beta.sin().abs() < RESEAT_BAND {
            let (phi, pi, new_seat) = reseat(&state.phi, &state.pi, &seat)?;
            state.phi = phi;
            state.pi = pi;
            seat = new_seat;
        }
        state = if deterministic {
            rk4_seated(&state, &seat, trap, constants, opts.dt, &opts.scheme)?
        } else {
            langevin_seated(
                &state,
                &seat,
                trap,
                gas,
                constants,
                opts.dt,
                &mut rng,
                &opts.scheme,
                opts.recoil.as_ref(),
            )?
        };
        let t = step as f64 * opts.dt;
        if !state.is_finite() {
            return Err(Error::NumericalBlowup {
                t,
                what: "state became non-finite during integration".into(),
            });
        }
        if step % stride == 0 {
            emit(&mut out, t, &state, &seat)?;
        }
    }
    Ok(out)
}
