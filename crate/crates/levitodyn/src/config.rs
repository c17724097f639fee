//! TOML run configuration. Keys carry explicit units in their names
//! (`power_w`, `waist_m`, ...) so a value can never silently arrive in the
//! wrong unit system; unknown keys are rejected.

use nalgebra::Vector3;
use serde::Deserialize;

use crate::constants::PhysicalConstants;
use crate::dynamics::{GasParams, IntegrationOptions, ParticleState, RecoilParams, TrapParams};
use crate::error::Error;
use crate::kinematics::{AngularMomenta, EulerAngles, InertiaTensor};
use crate::optics::{elliptical_polarization, GaussianMode, Susceptibility};
use crate::scattering::{DetectorGeometry, ScatterParams};
use crate::Result;

fn invalid(field: &str, why: impl std::fmt::Display) -> Error {
    Error::ConfigInvalid(format!("{field}: {why}"))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format_args!("must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    pub mass_kg: f64,
    pub inertia_kgm2: [f64; 3],
    pub volume_m3: f64,
    pub chi0: f64,
    #[serde(default)]
    pub delta_chi: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub power_w: f64,
    pub cross_section_m2: f64,
    pub wavelength_m: f64,
    pub waist_m: f64,
    pub rayleigh_range_m: f64,
    pub a1: f64,
    pub a2: f64,
    pub bx: f64,
    pub by: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma_c_hz: f64,
    pub temperature_k: f64,
    pub molecule_mass_kg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub axis: [f64; 3],
    pub half_angle_rad: f64,
    pub eta: f64,
    #[serde(default)]
    pub delta_phi_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub recoil_on: bool,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub position_m: [f64; 3],
    #[serde(default)]
    pub momentum_kgms: [f64; 3],
    #[serde(default = "default_euler")]
    pub euler_rad: [f64; 3],
    #[serde(default)]
    pub angular_momentum_js: [f64; 3],
}

fn default_euler() -> [f64; 3] {
    // β = π/2 keeps the default away from the chart singularity
    [0.0, std::f64::consts::FRAC_PI_2, 0.0]
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            position_m: [0.0; 3],
            momentum_kgms: [0.0; 3],
            euler_rad: default_euler(),
            angular_momentum_js: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSection {
    /// "translational" or "rotor".
    pub model: String,
    #[serde(default)]
    pub fock_dim: Option<usize>,
    #[serde(default)]
    pub l_max: Option<usize>,
    pub dt_s: f64,
    pub duration_s: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentsSection {
    /// Coordinate to sweep: x, y, z, alpha, beta or gamma.
    pub sweep: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSection {
    /// Trace CSV to analyze (relative paths resolve against the output dir).
    pub input: String,
    pub column: String,
    pub segment_length: usize,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    #[serde(default)]
    pub fit_window_hz: Option<[f64; 2]>,
}

fn default_overlap() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub particle: ParticleSection,
    pub trap: TrapSection,
    pub gas: GasSection,
    pub detector: DetectorSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub quantum: Option<QuantumSection>,
    #[serde(default)]
    pub currents: Option<CurrentsSection>,
    #[serde(default)]
    pub psd: Option<PsdSection>,
    /// Override for unit-system experiments; defaults to CODATA values.
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        positive("particle.mass_kg", self.particle.mass_kg)?;
        for (i, v) in self.particle.inertia_kgm2.iter().enumerate() {
            positive(&format!("particle.inertia_kgm2[{i}]"), *v)?;
        }
        positive("particle.volume_m3", self.particle.volume_m3)?;
        positive("particle.chi0", self.particle.chi0)?;
        positive("trap.power_w", self.trap.power_w)?;
        positive("trap.cross_section_m2", self.trap.cross_section_m2)?;
        positive("trap.wavelength_m", self.trap.wavelength_m)?;
        positive("trap.waist_m", self.trap.waist_m)?;
        positive("trap.rayleigh_range_m", self.trap.rayleigh_range_m)?;
        positive("trap.a1", self.trap.a1)?;
        positive("trap.a2", self.trap.a2)?;
        if self.gas.gamma_c_hz < 0.0 {
            return Err(invalid("gas.gamma_c_hz", "must be non-negative"));
        }
        if self.gas.gamma_c_hz > 0.0 {
            positive("gas.temperature_k", self.gas.temperature_k)?;
            positive("gas.molecule_mass_kg", self.gas.molecule_mass_kg)?;
        }
        if !(0.0..=1.0).contains(&self.detector.eta) {
            return Err(invalid("detector.eta", "must lie in [0, 1]"));
        }
        positive("detector.half_angle_rad", self.detector.half_angle_rad)?;
        if self.detector.half_angle_rad > std::f64::consts::PI {
            return Err(invalid("detector.half_angle_rad", "must not exceed pi"));
        }
        if Vector3::from(self.detector.axis).norm() == 0.0 {
            return Err(invalid("detector.axis", "must be a nonzero vector"));
        }
        positive("integrator.dt_s", self.integrator.dt_s)?;
        positive("integrator.duration_s", self.integrator.duration_s)?;
        if self.integrator.stride == 0 {
            return Err(invalid("integrator.stride", "must be at least 1"));
        }
        if let Some(q) = &self.quantum {
            match q.model.as_str() {
                "translational" => {
                    if q.fock_dim.is_none() {
                        return Err(invalid(
                            "quantum.fock_dim",
                            "required for the translational model",
                        ));
                    }
                }
                "rotor" => {
                    if q.l_max.is_none() {
                        return Err(invalid("quantum.l_max", "required for the rotor model"));
                    }
                }
                other => {
                    return Err(invalid(
                        "quantum.model",
                        format_args!("unknown model '{other}'"),
                    ))
                }
            }
            positive("quantum.dt_s", q.dt_s)?;
            positive("quantum.duration_s", q.duration_s)?;
        }
        if let Some(cur) = &self.currents {
            if !matches!(
                cur.sweep.as_str(),
                "x" | "y" | "z" | "alpha" | "beta" | "gamma"
            ) {
                return Err(invalid(
                    "currents.sweep",
                    format_args!("unknown coordinate '{}'", cur.sweep),
                ));
            }
            if cur.points < 2 {
                return Err(invalid("currents.points", "must be at least 2"));
            }
            if !(cur.stop > cur.start) {
                return Err(invalid("currents.stop", "must exceed currents.start"));
            }
        }
        if let Some(psd) = &self.psd {
            if psd.segment_length < 8 {
                return Err(invalid("psd.segment_length", "must be at least 8"));
            }
            if !(0.0..1.0).contains(&psd.overlap) {
                return Err(invalid("psd.overlap", "must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn trap_params(&self) -> Result<TrapParams> {
        let mode = GaussianMode::new(
            self.trap.waist_m,
            self.trap.rayleigh_range_m,
            self.trap.wavelength_m,
            self.trap.a1,
            self.trap.a2,
        )?;
        let pol = elliptical_polarization(self.trap.bx, self.trap.by)?;
        let chi = Susceptibility::new(
            self.particle.chi0,
            Vector3::from(self.particle.delta_chi),
        )?;
        let [i1, i2, i3] = self.particle.inertia_kgm2;
        Ok(TrapParams {
            power: self.trap.power_w,
            sigma_l: self.trap.cross_section_m2,
            volume: self.particle.volume_m3,
            mode,
            pol,
            chi,
            mass: self.particle.mass_kg,
            inertia: InertiaTensor::new(i1, i2, i3)?,
        })
    }

    pub fn gas_params(&self) -> Result<GasParams> {
        if self.gas.gamma_c_hz == 0.0 {
            Ok(GasParams::off())
        } else {
            GasParams::new(
                self.gas.gamma_c_hz,
                self.gas.temperature_k,
                self.gas.molecule_mass_kg,
            )
        }
    }

    pub fn detector(&self) -> Result<DetectorGeometry> {
        DetectorGeometry::new(
            Vector3::from(self.detector.axis).normalize(),
            self.detector.half_angle_rad,
            self.detector.eta,
        )
    }

    pub fn initial_state(&self) -> ParticleState {
        ParticleState {
            r: Vector3::from(self.initial.position_m),
            p: Vector3::from(self.initial.momentum_kgms),
            phi: EulerAngles::from_vector(&Vector3::from(self.initial.euler_rad)),
            pi: AngularMomenta::from_vector(&Vector3::from(self.initial.angular_momentum_js)),
        }
    }

    pub fn integration_options(&self, seed_override: Option<u64>) -> Result<IntegrationOptions> {
        let mut opts = IntegrationOptions::new(
            self.integrator.dt_s,
            self.integrator.duration_s,
            seed_override.unwrap_or(self.integrator.seed),
        );
        opts.stride = self.integrator.stride;
        opts.reseat_on = true;
        if self.integrator.recoil_on {
            let trap = self.trap_params()?;
            let gamma_s = ScatterParams::from_trap(&trap, &self.constants, None).gamma_s;
            opts.recoil = Some(RecoilParams::new(gamma_s));
        }
        Ok(opts)
    }
}
