//! Simulation library for an optically levitated anisotropic nanoparticle.
//!
//! The particle is a rigid rotor with six degrees of freedom, trapped by an
//! elliptically polarized Gaussian beam and immersed in a dilute gas. The
//! library covers three engines:
//!
//! * a classical Langevin engine for the full ro-translational phase space
//!   ([`dynamics`]),
//! * the classical homodyne photocurrent and its constant / translational /
//!   rotational / ro-translational decomposition ([`detection`]),
//! * a truncated-Hilbert-space stochastic-master-equation engine for general
//!   diffusive unravelings and the homodyne special case ([`sme`]).
//!
//! Supporting modules provide Euler-angle rotation algebra ([`kinematics`]),
//! beam and polarization optics ([`optics`]), Rayleigh scattering and
//! detector-surface quadrature ([`scattering`]), spectral post-processing
//! ([`analysis`]) and configuration / persistence ([`config`], [`output`],
//! [`run`]).

pub mod analysis;
pub mod config;
pub mod constants;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod optics;
pub mod output;
pub mod run;
pub mod scattering;
pub mod sme;

pub use error::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
