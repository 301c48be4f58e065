//! Strong zero modes of the perturbed Kitaev chain as explicit Pauli sums.
//!
//! With `x = 1 / (1 + delta)` and `delta` the coefficient of `S^y S^y` on the
//! even bonds, the three edge modes are
//!
//! * kind A: `sigma^y_1` dressed by `(-x)^{j-1} Z..Z sigma^y_{2j-1}`, plus an
//!   optional odd branch `M^{j-1} Z..Z sigma^y_{2j}`;
//! * kind B: `sigma^y_2` dressed by `(-1)^j x^{j-1} X_1 X_2 Z..Z sigma^y_{2j-1}`;
//! * kind C: `sigma^z_1` dressed by `(-1)^j x^{j-1} Y_1 Z..Z sigma^y_{2j-1}`.
//!
//! All terms of a mode anticommute pairwise, so the square of the mode is the
//! sum of squared weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroModeKind {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeSpec {
    pub kind: ZeroModeKind,
    #[serde(rename = "L")]
    pub len: usize,
    pub delta: f64,
    #[serde(default, rename = "M")]
    pub m: f64,
}

/// Normalization constants of the even and odd branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub n_e: f64,
    pub n_o: f64,
}

impl ZeroModeSpec {
    pub fn new(kind: ZeroModeKind, len: usize, delta: f64) -> Self {
        Self { kind, len, delta, m: 0.0 }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    /// Geometric decay per unit cell.
    pub fn x(&self) -> f64 {
        1.0 / (1.0 + self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 2 || self.len % 2 != 0 || self.len > crate::pauli::MAX_SITES {
            return Err(Error::Model(format!("zero mode needs even L in 2..=64, got {}", self.len)));
        }
        if !(self.delta > -1.0) || !self.delta.is_finite() {
            return Err(Error::Model(format!("delta = {} gives divergent weights", self.delta)));
        }
        if !(self.m.abs() < 1.0) {
            return Err(Error::Model(format!("|M| = {} must be below 1", self.m.abs())));
        }
        if self.m != 0.0 && self.kind != ZeroModeKind::A {
            return Err(Error::Model(
                "odd branch only exists for kind A; kinds B and C require M = 0".into(),
            ));
        }
        Ok(())
    }

    /// Finite-L normalization making the square of the mode the identity.
    ///
    /// With `M = 0` the odd branch is absent. Otherwise the weight is split
    /// equally between the branches.
    pub fn normalization(&self) -> Normalization {
        let cells = self.len / 2;
        let s_e: f64 = (0..cells).map(|j| self.x().powi(2 * j as i32)).sum();
        if self.m == 0.0 {
            return Normalization { n_e: 1.0 / s_e.sqrt(), n_o: 0.0 };
        }
        let s_o: f64 = (0..cells).map(|j| self.m.powi(2 * j as i32)).sum();
        Normalization { n_e: (0.5 / s_e).sqrt(), n_o: (0.5 / s_o).sqrt() }
    }
}

fn string_with_z_run(len: usize, head: &[(usize, Pauli)], z_from: usize, z_to: usize, tail: usize)
    -> Result<PauliString> {
    let mut sites: Vec<(usize, Pauli)> = head.to_vec();
    sites.extend((z_from..=z_to).map(|k| (k, Pauli::Z)));
    sites.push((tail, Pauli::Y));
    Ok(PauliString::from_sites(len, &sites)?)
}

/// Builds the normalized zero mode of the given kind.
pub fn build_zero_mode(spec: &ZeroModeSpec) -> Result<PauliSum> {
    spec.validate()?;
    let len = spec.len;
    let x = spec.x();
    let Normalization { n_e, n_o } = spec.normalization();
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    for j in 1..=len / 2 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let w = x.powi(j as i32 - 1);
        match spec.kind {
            ZeroModeKind::A => {
                let s = string_with_z_run(len, &[], 1, 2 * j - 2, 2 * j - 1)?;
                terms.push((n_e * (-x).powi(j as i32 - 1), s));
                if n_o != 0.0 {
                    let s = string_with_z_run(len, &[], 1, 2 * j - 1, 2 * j)?;
                    terms.push((n_o * spec.m.powi(j as i32 - 1), s));
                }
            }
            ZeroModeKind::B => {
                if j == 1 {
                    terms.push((n_e, PauliString::single(len, 2, Pauli::Y)?));
                } else {
                    let head = [(1, Pauli::X), (2, Pauli::X)];
                    let s = string_with_z_run(len, &head, 3, 2 * j - 2, 2 * j - 1)?;
                    terms.push((n_e * sign * w, s));
                }
            }
            ZeroModeKind::C => {
                if j == 1 {
                    terms.push((n_e, PauliString::single(len, 1, Pauli::Z)?));
                } else {
                    let s = string_with_z_run(len, &[(1, Pauli::Y)], 2, 2 * j - 2, 2 * j - 1)?;
                    terms.push((n_e * sign * w, s));
                }
            }
        }
    }
    Ok(PauliSum::from_terms(
        len,
        terms.into_iter().map(|(c, s)| (Complex64::new(c, 0.0), s)),
    )?)
}

/// `||[H, Psi]||_F / (2^{L/2} N_e)`, the residual per unit even-branch weight.
pub fn normalized_residual(h: &PauliSum, spec: &ZeroModeSpec) -> Result<f64> {
    let psi = build_zero_mode(spec)?;
    let c = h.commutator(&psi)?;
    Ok(c.frobenius_norm() / (2f64.powf(spec.len as f64 / 2.0) * spec.normalization().n_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_kh, ModelSpec, Perturbation};
    use crate::pauli::{build_spin_flip, Axis};

    fn one(len: usize) -> PauliSum {
        PauliSum::identity(len).unwrap()
    }

    #[test]
    fn two_site_mode_is_sigma_y() {
        let psi = build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 2, 0.0)).unwrap();
        assert_eq!(psi.num_terms(), 1);
        assert_eq!(psi.terms()[0].1.letters(), "YI");
        assert!((psi.terms()[0].0.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squares_to_identity() {
        for kind in [ZeroModeKind::A, ZeroModeKind::B, ZeroModeKind::C] {
            for len in [2, 4, 8, 12] {
                let psi = build_zero_mode(&ZeroModeSpec::new(kind, len, 0.4)).unwrap();
                assert!(psi.mul(&psi).unwrap().approx_eq(&one(len), 1e-13), "{kind:?} {len}");
            }
        }
        let psi = build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 8, 0.4).with_m(0.6)).unwrap();
        assert!(psi.mul(&psi).unwrap().approx_eq(&one(8), 1e-13));
    }

    #[test]
    fn anticommutes_with_spin_flip() {
        let gz = PauliSum::from_string(Complex64::new(1.0, 0.0), build_spin_flip(Axis::Z, 6).unwrap())
            .unwrap();
        let gx = PauliSum::from_string(Complex64::new(1.0, 0.0), build_spin_flip(Axis::X, 6).unwrap())
            .unwrap();
        let a = build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 6, 0.4).with_m(0.3)).unwrap();
        let b = build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::B, 6, 0.4)).unwrap();
        let c = build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::C, 6, 0.4)).unwrap();
        assert!(a.anticommutator(&gz).unwrap().is_zero());
        assert!(b.anticommutator(&gz).unwrap().is_zero());
        assert!(c.anticommutator(&gx).unwrap().is_zero());
    }

    #[test]
    fn residual_is_single_edge_string() {
        let h = build_kh(&ModelSpec::kitaev(6, Perturbation::Inter, 0.4)).unwrap();
        let spec = ZeroModeSpec::new(ZeroModeKind::A, 6, 0.4);
        let c = h.commutator(&build_zero_mode(&spec).unwrap()).unwrap();
        assert_eq!(c.num_terms(), 1);
        assert_eq!(c.terms()[0].1.letters(), "ZZZZZX");
    }

    #[test]
    fn invalid_specs() {
        assert!(build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 5, 0.4)).is_err());
        assert!(build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 4, -1.0)).is_err());
        assert!(build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::A, 4, 0.4).with_m(1.0)).is_err());
        assert!(build_zero_mode(&ZeroModeSpec::new(ZeroModeKind::B, 4, 0.4).with_m(0.2)).is_err());
    }
}
