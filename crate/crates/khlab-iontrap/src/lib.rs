//! Ion-crystal equilibria in an anisotropic Paul trap, transverse phonon modes, and the
//! effective ZZ / XX couplings that map a zig-zag crystal onto the perturbed Kitaev chain.
//!
//! Lengths are in units of `l = (q^2 / (4 pi eps0 m w_z^2))^(1/3)`, frequencies in units of `w_z`.

pub mod config;
pub mod coupling;
pub mod crystal;
pub mod mapping;

pub use config::TrapConfig;
pub use coupling::{dispersion, xx_couplings, zz_couplings, Couplings, Dispersion, LaserParams};
pub use crystal::{equilibrium_positions, transverse_modes, IonCrystal, ModeData, SolverOptions};
pub use mapping::{
    active_mapping, calibrate_k, decay_exponent, match_rabi, run_pipeline, ActiveMap, RabiMatch, TrapReport, TrapRun,
};
