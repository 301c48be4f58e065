use khlab_core::{Error, Result};
use serde::{Deserialize, Serialize};

const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
const EPSILON_0: f64 = 8.854_187_812_8e-12;
const AMU: f64 = 1.660_539_066_60e-27;

/// Trap and drive parameters. Detunings are sideband detunings above `w_y`, in kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub wx_over_wz: f64,
    pub wy_over_wz: f64,
    pub phi_a: f64,
    pub detuning_a: f64,
    pub detuning_b: f64,
    /// Raman wavevector in inverse `l`; calibrated to the first inter-rung zero when absent.
    #[serde(default)]
    pub k_mag: Option<f64>,
    #[serde(rename = "L_active")]
    pub l_active: usize,
    #[serde(default = "default_wz_khz")]
    pub wz_khz: f64,
    #[serde(default = "default_mass")]
    pub mass_amu: f64,
    #[serde(default = "default_lambda")]
    pub lambda_nm: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_wz_khz() -> f64 {
    80.0
}
fn default_mass() -> f64 {
    171.0
}
fn default_lambda() -> f64 {
    400.0
}
fn default_restarts() -> usize {
    20
}

impl Default for TrapConfig {
    /// 70 Yb+ ions, `w_x = 18.75 w_z`, `w_y = 125 w_z`, sidebands at 480 / 540 kHz.
    fn default() -> Self {
        Self {
            n: 70,
            wx_over_wz: 18.75,
            wy_over_wz: 125.0,
            phi_a: 0.5164,
            detuning_a: 480.0,
            detuning_b: 540.0,
            k_mag: None,
            l_active: 8,
            wz_khz: default_wz_khz(),
            mass_amu: default_mass(),
            lambda_nm: default_lambda(),
            restarts: default_restarts(),
            seed: 0,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        if self.n < 2 {
            return bad("N must be at least 2");
        }
        if !(self.wy_over_wz > self.wx_over_wz && self.wx_over_wz > 1.0) {
            return bad("need wy_over_wz > wx_over_wz > 1");
        }
        if self.l_active < 2 || self.l_active % 2 != 0 {
            return bad("L_active must be even and at least 2");
        }
        if let Some(k) = self.k_mag {
            if !(k.is_finite() && k > 0.0) {
                return bad("k_mag must be positive");
            }
        }
        for (name, v) in [("phi_a", self.phi_a), ("detuning_a", self.detuning_a), ("detuning_b", self.detuning_b)] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite")));
            }
        }
        if !(self.wz_khz > 0.0 && self.mass_amu > 0.0 && self.lambda_nm > 0.0) {
            return bad("wz_khz, mass_amu and lambda_nm must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        Ok(())
    }

    /// Beatnote frequency of the ZZ drive in units of `w_z`.
    pub fn omega_a(&self) -> f64 {
        self.wy_over_wz + self.detuning_a / self.wz_khz
    }

    pub fn omega_b(&self) -> f64 {
        self.wy_over_wz + self.detuning_b / self.wz_khz
    }

    /// Length unit `l` in metres.
    pub fn length_scale_m(&self) -> f64 {
        let w = 2.0 * std::f64::consts::PI * self.wz_khz * 1e3;
        let q2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * EPSILON_0);
        (q2 / (self.mass_amu * AMU * w * w)).cbrt()
    }

    /// `2 pi / lambda` expressed in inverse `l`.
    pub fn optical_k(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.lambda_nm * 1e-9) * self.length_scale_m()
    }
}
