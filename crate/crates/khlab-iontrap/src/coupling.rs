use khlab_core::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::crystal::{IonCrystal, ModeData};

/// One drive tone. `detuning` is measured from the top of the y branch, in units of `w_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    pub k_mag: f64,
    pub phi: f64,
    pub detuning: f64,
    #[serde(default = "unit")]
    pub rabi: f64,
}

fn unit() -> f64 {
    1.0
}

impl LaserParams {
    pub fn new(k_mag: f64, phi: f64, detuning: f64) -> Self {
        Self { k_mag, phi, detuning, rabi: 1.0 }
    }

    pub fn with_rabi(self, rabi: f64) -> Self {
        Self { rabi, ..self }
    }

    fn beatnote(&self, modes: &ModeData) -> f64 {
        modes.frequencies[0] + self.detuning
    }
}

/// Where a beatnote sits relative to the y branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    Above,
    InsideBand,
    Below,
}

pub fn dispersion(modes: &ModeData, omega_l: f64) -> Result<Dispersion> {
    let nearest = modes.frequencies.iter().map(|w| (w - omega_l).abs()).fold(f64::INFINITY, f64::min);
    if nearest < 1e-9 {
        return Err(Error::Invalid(format!("beatnote {omega_l} resonant with a y mode")));
    }
    let top = modes.frequencies[0];
    let bottom = *modes.frequencies.last().unwrap();
    Ok(if omega_l > top {
        Dispersion::Above
    } else if omega_l < bottom {
        Dispersion::Below
    } else {
        Dispersion::InsideBand
    })
}

/// Couplings summed over tones, with the dispersion class of every tone.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub v: DMatrix<f64>,
    pub dispersion: Vec<Dispersion>,
}

fn mode_sum(modes: &ModeData, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let m = &modes.vectors;
    let mut scaled = m.clone();
    for (p, w) in modes.frequencies.iter().enumerate() {
        let s = f(*w);
        scaled.column_mut(p).scale_mut(s);
    }
    &scaled * m.transpose()
}

fn finish(mut v: DMatrix<f64>) -> DMatrix<f64> {
    let t = v.transpose();
    v = (v + t) * 0.5;
    v.fill_diagonal(0.0);
    v
}

fn check(crystal: &IonCrystal, modes: &ModeData, tones: &[LaserParams]) -> Result<()> {
    if tones.is_empty() {
        return Err(Error::Invalid("no drive tones".into()));
    }
    if crystal.n() != modes.n() {
        return Err(Error::Invalid("crystal and mode data disagree on N".into()));
    }
    Ok(())
}

/// `V^a_ij = -Omega^2 sin^2(phi) cos(k . r_ij) sum_p M_ip M_jp / (w_p (w_p - w_l))`.
pub fn zz_couplings(crystal: &IonCrystal, modes: &ModeData, tones: &[LaserParams]) -> Result<Couplings> {
    check(crystal, modes, tones)?;
    let n = crystal.n();
    let p = &crystal.positions;
    let mut v = DMatrix::zeros(n, n);
    let mut flags = Vec::new();
    for t in tones {
        let wl = t.beatnote(modes);
        flags.push(dispersion(modes, wl)?);
        let g = mode_sum(modes, |w| 1.0 / (w * (w - wl)));
        let (kx, ky) = (t.k_mag * t.phi.cos(), t.k_mag * t.phi.sin());
        let pre = -t.rabi * t.rabi * t.phi.sin().powi(2);
        for i in 0..n {
            for j in 0..n {
                let ang = (kx * (p[j][0] - p[i][0]) + ky * (p[j][1] - p[i][1])).cos();
                v[(i, j)] += pre * ang * g[(i, j)];
            }
        }
    }
    Ok(Couplings { v: finish(v), dispersion: flags })
}

/// `V^b_ij = Omega^2 sum_p M_ip M_jp / (w_l^2 - w_p^2)`.
pub fn xx_couplings(crystal: &IonCrystal, modes: &ModeData, tones: &[LaserParams]) -> Result<Couplings> {
    check(crystal, modes, tones)?;
    let n = crystal.n();
    let mut v = DMatrix::zeros(n, n);
    let mut flags = Vec::new();
    for t in tones {
        let wl = t.beatnote(modes);
        flags.push(dispersion(modes, wl)?);
        v += mode_sum(modes, |w| 1.0 / (wl * wl - w * w)) * (t.rabi * t.rabi);
    }
    Ok(Couplings { v: finish(v), dispersion: flags })
}
