use khlab_core::hamiltonian::CouplingMatrix;
use khlab_core::{Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::TrapConfig;
use crate::coupling::{xx_couplings, zz_couplings, Couplings, Dispersion, LaserParams};
use crate::crystal::{equilibrium_positions, transverse_modes, IonCrystal, ModeData, SolverOptions};

/// Central window of `3L/2` ions with every third one hidden; indices are 0-based ion labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveMap {
    pub window: Vec<usize>,
    pub active: Vec<usize>,
    pub hidden: Vec<usize>,
}

impl ActiveMap {
    pub fn new(crystal: &IonCrystal, len: usize) -> Result<Self> {
        let n = crystal.n();
        let width = 3 * len / 2;
        if len < 2 || len % 2 != 0 {
            return Err(Error::Invalid(format!("L = {len} must be even and at least 2")));
        }
        if width > n {
            return Err(Error::Invalid(format!("L = {len} needs {width} ions, crystal has {n}")));
        }
        let centre = |s: usize| (crystal.positions[s][2] + crystal.positions[s + width - 1][2]).abs();
        let start = (0..=n - width).min_by(|&a, &b| centre(a).total_cmp(&centre(b))).unwrap();
        let window: Vec<usize> = (start..start + width).collect();
        let (mut active, mut hidden) = (Vec::new(), Vec::new());
        for (k, &i) in window.iter().enumerate() {
            if k % 3 == 1 {
                hidden.push(i);
            } else {
                active.push(i);
            }
        }
        Ok(Self { window, active, hidden })
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Ion pairs behind the even bonds `(2i', 2i'+1)`: neighbours on different rungs.
    pub fn inter_rung_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.len() / 2).map(|j| (self.active[2 * j - 1], self.active[2 * j])).collect()
    }
}

/// `k` such that `k cos(phi) <|dx|> = pi/2` over the inter-rung pairs, the first zero of the angular factor.
pub fn calibrate_k(crystal: &IonCrystal, map: &ActiveMap, phi: f64) -> Result<f64> {
    let pairs = map.inter_rung_pairs();
    if pairs.is_empty() {
        return Err(Error::Invalid("calibration needs at least one inter-rung pair".into()));
    }
    let p = &crystal.positions;
    let dx = pairs.iter().map(|&(i, j)| (p[i][0] - p[j][0]).abs()).sum::<f64>() / pairs.len() as f64;
    let c = phi.cos() * dx;
    if c.abs() < 1e-12 {
        return Err(Error::Invalid("inter-rung pairs have no separation along k".into()));
    }
    Ok(std::f64::consts::FRAC_PI_2 / c.abs())
}

/// Restricts the full matrices to the active ions, in chain order.
pub fn active_mapping(vzz: &DMatrix<f64>, vxx: &DMatrix<f64>, map: &ActiveMap) -> Result<CouplingMatrix> {
    let a = &map.active;
    let pick = |v: &DMatrix<f64>| DMatrix::from_fn(a.len(), a.len(), |i, j| if i == j { 0.0 } else { v[(a[i], a[j])] });
    CouplingMatrix::new(pick(vxx), pick(vzz))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Couplings rescaled to the Ising target `K ZZ + delta XX` on odd bonds and `(K + delta) XX` on even bonds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiMatch {
    #[serde(skip)]
    pub couplings: CouplingMatrix,
    pub zz_scale: f64,
    pub xx_scale: f64,
    pub delta_eff: f64,
    /// `median(even Jxx) / median(odd Jxx) - 1`, the value obtained if odd Jxx is pinned to 1 instead.
    pub delta_eff_odd_pinned: f64,
    pub max_residual_ratio: f64,
}

pub fn match_rabi(cm: &CouplingMatrix) -> Result<RabiMatch> {
    let n = cm.n();
    if n < 3 {
        return Err(Error::Invalid("matching needs at least one odd and one even bond".into()));
    }
    let odd: Vec<(usize, usize)> = (0..n / 2).map(|j| (2 * j, 2 * j + 1)).collect();
    let even: Vec<(usize, usize)> = (0..(n - 1) / 2).map(|j| (2 * j + 1, 2 * j + 2)).collect();
    let (xx, zz) = (cm.jxx(), cm.jzz());
    let zz_odd = median(odd.iter().map(|&p| zz[p]).collect());
    let xx_odd = median(odd.iter().map(|&p| xx[p]).collect());
    let xx_even = median(even.iter().map(|&p| xx[p]).collect());
    if !(zz_odd.abs() > 1e-300) || !((xx_even - xx_odd).abs() > 1e-300) || xx_odd == 0.0 {
        return Err(Error::Invalid("zero median bond".into()));
    }
    let (zz_scale, xx_scale) = (1.0 / zz_odd, 1.0 / (xx_even - xx_odd));
    let couplings = cm.scaled(xx_scale, zz_scale);
    let (sx, sz) = (couplings.jxx(), couplings.jzz());
    let mut nn: Vec<f64> = odd.iter().flat_map(|&p| [sz[p], sx[p]]).collect();
    nn.extend(even.iter().map(|&p| sx[p]));
    let mut residual = even.iter().map(|&p| sz[p].abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in i + 2..n {
            residual = residual.max(sx[(i, j)].abs()).max(sz[(i, j)].abs());
        }
    }
    Ok(RabiMatch {
        delta_eff: xx_odd * xx_scale,
        delta_eff_odd_pinned: xx_even / xx_odd - 1.0,
        max_residual_ratio: residual / median(nn).abs(),
        couplings,
        zz_scale,
        xx_scale,
    })
}

/// `R` from a least-squares fit of `log|V(c, c+m)|` against `log m`.
pub fn decay_exponent(v: &DMatrix<f64>, centre: usize, seps: &[usize]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = seps
        .iter()
        .filter(|&&m| m > 0 && centre + m < v.nrows() && v[(centre, centre + m)] != 0.0)
        .map(|&m| ((m as f64).ln(), v[(centre, centre + m)].abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Analysis("fewer than two separations for the decay fit".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Ok(-sxy / sxx)
}

/// Everything derived from one trap configuration.
#[derive(Debug, Clone)]
pub struct TrapRun {
    pub crystal: IonCrystal,
    pub modes: ModeData,
    pub map: ActiveMap,
    pub k_used: f64,
    pub zz: Couplings,
    pub xx: Couplings,
    pub raw: CouplingMatrix,
    pub matched: RabiMatch,
    pub report: TrapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapReport {
    pub max_abs_y: f64,
    pub gradient_norm: f64,
    pub top_mode: f64,
    pub k_used: f64,
    pub k_optical: f64,
    pub length_scale_m: f64,
    pub inter_rung_zz_ratio: f64,
    pub r_zz: f64,
    pub r_xx: f64,
    pub dispersion_a: Dispersion,
    pub dispersion_b: Dispersion,
    pub delta_eff: f64,
    pub delta_eff_odd_pinned: f64,
    pub max_residual_ratio: f64,
}

pub fn run_pipeline(cfg: &TrapConfig) -> Result<TrapRun> {
    cfg.validate()?;
    let crystal = equilibrium_positions(cfg, &SolverOptions::from_config(cfg))?;
    let modes = transverse_modes(&crystal, cfg)?;
    let map = ActiveMap::new(&crystal, cfg.l_active)?;
    let k_used = match cfg.k_mag {
        Some(k) => k,
        None => calibrate_k(&crystal, &map, cfg.phi_a)?,
    };
    let tone_a = LaserParams::new(k_used, cfg.phi_a, cfg.detuning_a / cfg.wz_khz);
    let tone_b = LaserParams::new(k_used, 0.0, cfg.detuning_b / cfg.wz_khz);
    let zz = zz_couplings(&crystal, &modes, &[tone_a])?;
    let xx = xx_couplings(&crystal, &modes, &[tone_b])?;
    let raw = active_mapping(&zz.v, &xx.v, &map)?;
    let matched = match_rabi(&raw)?;

    let n = crystal.n();
    let seps: Vec<usize> = (2..=20).step_by(2).collect();
    let odd_zz = median((0..raw.n() / 2).map(|j| raw.jzz()[(2 * j, 2 * j + 1)]).collect());
    let inter = (1..raw.n() / 2).map(|j| raw.jzz()[(2 * j - 1, 2 * j)].abs()).fold(0.0, f64::max);
    let report = TrapReport {
        max_abs_y: crystal.positions.iter().map(|p| p[1].abs()).fold(0.0, f64::max),
        gradient_norm: crystal.gradient_norm,
        top_mode: modes.frequencies[0],
        k_used,
        k_optical: cfg.optical_k(),
        length_scale_m: cfg.length_scale_m(),
        inter_rung_zz_ratio: inter / odd_zz.abs(),
        r_zz: decay_exponent(&zz.v, n / 2, &seps)?,
        r_xx: decay_exponent(&xx.v, n / 2, &seps)?,
        dispersion_a: zz.dispersion[0],
        dispersion_b: xx.dispersion[0],
        delta_eff: matched.delta_eff,
        delta_eff_odd_pinned: matched.delta_eff_odd_pinned,
        max_residual_ratio: matched.max_residual_ratio,
    };
    Ok(TrapRun { crystal, modes, map, k_used, zz, xx, raw, matched, report })
}
