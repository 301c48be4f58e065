//! Kitaev-Heisenberg chain Hamiltonians and generic XX+ZZ coupling models.
//!
//! All Hamiltonians are written in spin-1/2 operators `S = sigma / 2`, so a
//! bond `c S^a_i S^a_j` appears in the Pauli sum with coefficient `c / 4`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Perturbation {
    #[default]
    None,
    /// `delta * S^x S^x` on odd bonds `(2j-1, 2j)`.
    Intra,
    /// `delta * S^y S^y` on even bonds `(2j, 2j+1)`.
    Inter,
    /// `delta * S^y S^y` on every bond.
    Ising,
}

impl Perturbation {
    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::Intra => "intra",
            Perturbation::Inter => "inter",
            Perturbation::Ising => "ising",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Perturbation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Perturbation::None),
            "intra" => Ok(Perturbation::Intra),
            "inter" => Ok(Perturbation::Inter),
            "ising" => Ok(Perturbation::Ising),
            other => Err(Error::Model(format!("unknown perturbation '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Model(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Normalization of the perturbation strength.
///
/// `Spin` adds `delta * S S`. `Pauli` adds `delta * sigma sigma`, which is
/// `4 delta * S S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DeltaUnits {
    #[default]
    Spin,
    Pauli,
}

impl DeltaUnits {
    /// Factor converting `delta` in these units to the coefficient of `S S`.
    pub fn to_spin(self) -> f64 {
        match self {
            DeltaUnits::Spin => 1.0,
            DeltaUnits::Pauli => 4.0,
        }
    }
}

impl FromStr for DeltaUnits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spin" => Ok(DeltaUnits::Spin),
            "pauli" => Ok(DeltaUnits::Pauli),
            other => Err(Error::Model(format!("unknown delta units '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "L")]
    pub len: usize,
    pub theta: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub rescaled: bool,
    #[serde(default)]
    pub delta_units: DeltaUnits,
}

impl ModelSpec {
    pub fn new(len: usize, theta: f64) -> Self {
        Self {
            len,
            theta,
            delta: 0.0,
            perturbation: Perturbation::None,
            boundary: Boundary::Open,
            rescaled: false,
            delta_units: DeltaUnits::Spin,
        }
    }

    /// Kitaev point `theta = pi/2` with the given perturbation.
    pub fn kitaev(len: usize, perturbation: Perturbation, delta: f64) -> Self {
        Self { delta, perturbation, ..Self::new(len, std::f64::consts::FRAC_PI_2) }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_units(mut self, units: DeltaUnits) -> Self {
        self.delta_units = units;
        self
    }

    pub fn rescaled(mut self, on: bool) -> Self {
        self.rescaled = on;
        self
    }

    /// Perturbation strength as the coefficient of `S S`.
    pub fn spin_delta(&self) -> f64 {
        if self.perturbation == Perturbation::None {
            0.0
        } else {
            self.delta * self.delta_units.to_spin()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 2 || self.len % 2 != 0 {
            return Err(Error::Model(format!("L must be even and >= 2, got {}", self.len)));
        }
        if self.len > crate::pauli::MAX_SITES {
            return Err(Error::Model(format!("L = {} exceeds {}", self.len, crate::pauli::MAX_SITES)));
        }
        if !self.theta.is_finite() || !self.delta.is_finite() {
            return Err(Error::Model("theta and delta must be finite".into()));
        }
        if self.rescaled && (1.0 + self.spin_delta()).abs() < 1e-12 {
            return Err(Error::Model("rescaling by 1 + delta = 0".into()));
        }
        Ok(())
    }
}

/// Bonds `(i, j, is_odd)` of the chain; the periodic wrap `(L, 1)` is even.
pub fn bonds(len: usize, boundary: Boundary) -> Vec<(usize, usize, bool)> {
    let last = match boundary {
        Boundary::Open => len - 1,
        Boundary::Periodic => len,
    };
    (1..=last).map(|i| (i, i % len + 1, i % 2 == 1)).collect()
}

fn two_site(len: usize, coeff: f64, i: usize, j: usize, p: Pauli) -> Result<PauliSum> {
    Ok(PauliSum::term(len, coeff / 4.0, &[(i, p), (j, p)])?)
}

/// Builds `H_KH(theta) + V_delta`, optionally divided by `1 + delta`.
pub fn build_kh(spec: &ModelSpec) -> Result<PauliSum> {
    spec.validate()?;
    let len = spec.len;
    let k = spec.theta.sin();
    let j = spec.theta.cos();
    let mut terms = Vec::new();
    for (a, b, odd) in bonds(len, spec.boundary) {
        let cx = if odd { k + j } else { j };
        let cy = if odd { j } else { k + j };
        for (c, p) in [(cx, Pauli::X), (cy, Pauli::Y)] {
            if c != 0.0 {
                terms.extend(two_site(len, c, a, b, p)?.terms().iter().copied());
            }
        }
    }
    let mut h = PauliSum::from_terms(len, terms)?;
    if spec.perturbation != Perturbation::None {
        let v = build_perturbation(spec.perturbation, spec.spin_delta(), len, spec.boundary)?;
        h = h.add(&v)?;
    }
    if spec.rescaled {
        h = h.scale_real(1.0 / (1.0 + spec.spin_delta()));
    }
    Ok(h)
}

/// Perturbation `V_delta` with `delta` the coefficient of `S S`.
pub fn build_perturbation(
    kind: Perturbation,
    delta: f64,
    len: usize,
    boundary: Boundary,
) -> Result<PauliSum> {
    if len < 2 || len % 2 != 0 {
        return Err(Error::Model(format!("L must be even and >= 2, got {len}")));
    }
    let mut sum = PauliSum::zero(len)?;
    for (a, b, odd) in bonds(len, boundary) {
        let term = match (kind, odd) {
            (Perturbation::Intra, true) => Some(Pauli::X),
            (Perturbation::Inter, false) | (Perturbation::Ising, _) => Some(Pauli::Y),
            _ => None,
        };
        if let Some(p) = term {
            sum = sum.add(&two_site(len, delta, a, b, p)?)?;
        }
    }
    Ok(sum)
}

/// Cyclic relabeling `X -> Z, Y -> X, Z -> Y`.
pub fn rotate_frame(p: &PauliSum) -> PauliSum {
    p.map_letters(|l| match l {
        Pauli::I => Pauli::I,
        Pauli::X => Pauli::Z,
        Pauli::Y => Pauli::X,
        Pauli::Z => Pauli::Y,
    })
}

/// Symmetric site-pair couplings for `sum_{i<j} Jxx S^x S^x + Jzz S^z S^z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    jxx: DMatrix<f64>,
    jzz: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn new(jxx: DMatrix<f64>, jzz: DMatrix<f64>) -> Result<Self> {
        let n = jxx.nrows();
        if n < 2 || !jxx.is_square() || jzz.shape() != (n, n) {
            return Err(Error::Coupling("matrices must be square, equal sized, n >= 2".into()));
        }
        for (name, m) in [("Jxx", &jxx), ("Jzz", &jzz)] {
            for i in 0..n {
                if m[(i, i)] != 0.0 {
                    return Err(Error::Coupling(format!("{name} has nonzero diagonal at {}", i + 1)));
                }
                for j in 0..n {
                    if !m[(i, j)].is_finite() {
                        return Err(Error::Coupling(format!("{name}[{},{}] not finite", i + 1, j + 1)));
                    }
                    let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                    if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::Coupling(format!("{name} not symmetric at ({}, {})", i + 1, j + 1)));
                    }
                }
            }
        }
        Ok(Self { jxx, jzz })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n), DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.jxx.nrows()
    }

    pub fn jxx(&self) -> &DMatrix<f64> {
        &self.jxx
    }

    pub fn jzz(&self) -> &DMatrix<f64> {
        &self.jzz
    }

    /// Multiplies the XX and ZZ sectors by independent factors.
    pub fn scaled(&self, xx: f64, zz: f64) -> Self {
        Self { jxx: &self.jxx * xx, jzz: &self.jzz * zz }
    }

    /// Sites are 1-based.
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        (self.jxx[(i - 1, j - 1)], self.jzz[(i - 1, j - 1)])
    }

    /// CSV with header `i,j,Jxx,Jzz`, one row per pair `i < j`, 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,Jxx,Jzz\n");
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                out.push_str(&format!(
                    "{},{},{:e},{:e}\n",
                    i + 1,
                    j + 1,
                    self.jxx[(i, j)],
                    self.jzz[(i, j)]
                ));
            }
        }
        out
    }

    /// Parses the CSV format; missing pairs are zero, either order is accepted.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        let mut n = 0usize;
        for (k, rec) in rdr.deserialize::<(usize, usize, f64, f64)>().enumerate() {
            let (i, j, xx, zz) =
                rec.map_err(|e| Error::Coupling(format!("row {}: {e}", k + 1)))?;
            if i == 0 || j == 0 {
                return Err(Error::Coupling(format!("row {}: sites are 1-based", k + 1)));
            }
            if i == j {
                return Err(Error::Coupling(format!("row {}: diagonal entry ({i},{i})", k + 1)));
            }
            n = n.max(i).max(j);
            rows.push((i, j, xx, zz));
        }
        let mut jxx = DMatrix::zeros(n, n);
        let mut jzz = DMatrix::zeros(n, n);
        for (i, j, xx, zz) in rows {
            for (a, b) in [(i - 1, j - 1), (j - 1, i - 1)] {
                jxx[(a, b)] = xx;
                jzz[(a, b)] = zz;
            }
        }
        Self::new(jxx, jzz)
    }
}

/// `sum_{i<j} Jzz_ij S^z_i S^z_j + Jxx_ij S^x_i S^x_j`.
pub fn build_from_couplings(cm: &CouplingMatrix) -> Result<PauliSum> {
    let n = cm.n();
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let (xx, zz) = cm.get(i, j);
            for (c, p) in [(xx, Pauli::X), (zz, Pauli::Z)] {
                if c != 0.0 {
                    terms.extend(two_site(n, c, i, j, p)?.terms().iter().copied());
                }
            }
        }
    }
    Ok(PauliSum::from_terms(n, terms)?)
}
