//! Free-fermion oracle for the chain at the Kitaev point.
//!
//! Jordan-Wigner Majoranas `c_{2i-1} = (prod_{k<i} Z_k) X_i` and
//! `c_{2i} = (prod_{k<i} Z_k) Y_i` turn `X_{2j-1} X_{2j}` into
//! `-i c_{4j-2} c_{4j-1}` and `Y_{2j} Y_{2j+1}` into `i c_{4j-1} c_{4j+2}`.
//! At `theta = pi/2` only Majoranas `c_{4j-2}, c_{4j-1}` (chain A) appear;
//! chain B (`c_{4j-3}, c_{4j}`) is left with zero couplings.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Perturbation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chain {
    A,
    B,
}

/// One open Majorana chain `H = (i/2) sum_{a<b} h_ab c_a c_b`.
#[derive(Debug, Clone, Serialize)]
pub struct BdgSystem {
    pub chain: Chain,
    pub n: usize,
    /// Non-negative single-particle energies, ascending.
    pub energies: Vec<f64>,
    /// Vacuum energy `-sum(eps)/2`, so that `H = sum eps (n - 1/2)`.
    pub offset: f64,
    #[serde(skip)]
    pub form: DMatrix<f64>,
}

impl BdgSystem {
    /// Diagonalizes a real antisymmetric `2n x 2n` Majorana form.
    pub fn from_majorana_form(chain: Chain, form: DMatrix<f64>) -> Result<Self> {
        let d = form.nrows();
        if d % 2 != 0 || !form.is_square() {
            return Err(Error::Invalid("Majorana form must be square with even size".into()));
        }
        if (&form + form.transpose()).abs().max() > 1e-12 {
            return Err(Error::Invalid("Majorana form must be antisymmetric".into()));
        }
        if d == 0 {
            return Ok(Self { chain, n: 0, energies: Vec::new(), offset: 0.0, form });
        }
        let ih = form.map(|x| Complex64::new(0.0, x));
        let mut ev: Vec<f64> = SymmetricEigen::new(ih).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        // eigenvalues of i h come in +-eps pairs; keep the upper half
        let energies: Vec<f64> = ev[d / 2..].iter().map(|e| e.max(0.0)).collect();
        let offset = -0.5 * energies.iter().sum::<f64>();
        Ok(Self { chain, n: d / 2, energies, offset, form })
    }
}

/// Chains A and B of `H_KH(pi/2) + V_delta`, with `delta` the coefficient of
/// `S S`, for an open chain of `L` sites.
pub fn build_bdg(len: usize, delta: f64, perturbation: Perturbation) -> Result<(BdgSystem, BdgSystem)> {
    if len < 2 || len % 2 != 0 {
        return Err(Error::Model(format!("L must be even and >= 2, got {len}")));
    }
    let (intra, inter) = match perturbation {
        Perturbation::None => (0.0, 0.0),
        Perturbation::Intra => (delta, 0.0),
        Perturbation::Inter => (0.0, delta),
        Perturbation::Ising => {
            return Err(Error::Unsupported(
                "the Ising perturbation adds Y Y on odd bonds, which couples chain B and does \
                 not map onto a Kitaev chain"
                    .into(),
            ))
        }
    };
    let n = len / 2;
    // chain A ordering: (a_1, b_1, a_2, b_2, ...) with a_j = c_{4j-2}, b_j = c_{4j-1}
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        // (1 + intra)/4 X X = (i/2)(-(1 + intra)/2) a_j b_j
        let g = -(1.0 + intra) / 2.0;
        h[(2 * j, 2 * j + 1)] = g;
        h[(2 * j + 1, 2 * j)] = -g;
        if j + 1 < n {
            // (1 + inter)/4 Y Y = (i/2)((1 + inter)/2) b_j a_{j+1}
            let g = (1.0 + inter) / 2.0;
            h[(2 * j + 1, 2 * j + 2)] = g;
            h[(2 * j + 2, 2 * j + 1)] = -g;
        }
    }
    let a = BdgSystem::from_majorana_form(Chain::A, h)?;
    let b = BdgSystem::from_majorana_form(Chain::B, DMatrix::zeros(2 * n, 2 * n))?;
    Ok((a, b))
}

/// All `2^{n_A + n_B}` many-body energies, ascending, with the constant fixed
/// so that their mean equals `trace_per_state` (`Tr H / 2^L`).
pub fn many_body_spectrum(systems: &[&BdgSystem], trace_per_state: f64) -> Result<Vec<f64>> {
    let eps: Vec<f64> = systems.iter().flat_map(|s| s.energies.iter().copied()).collect();
    if eps.len() > 26 {
        return Err(Error::TooLarge { dim: 1 << eps.len().min(62), cap: 1 << 26 });
    }
    let constant = trace_per_state - 0.5 * eps.iter().sum::<f64>();
    let mut out: Vec<f64> = (0..1usize << eps.len())
        .map(|occ| constant + eps.iter().enumerate().filter(|(k, _)| occ >> k & 1 == 1).map(|(_, e)| e).sum::<f64>())
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub count: usize,
    pub max_dev: f64,
    pub pass: bool,
}

/// Largest deviation between two sorted multisets. With `truncate = Some(k)`
/// only the lowest `k` entries of each are compared; otherwise the sizes
/// must agree.
pub fn compare_spectra(a: &[f64], b: &[f64], tol: f64, truncate: Option<usize>) -> Result<Comparison> {
    let count = match truncate {
        Some(k) if k <= a.len() && k <= b.len() => k,
        Some(k) => return Err(Error::Invalid(format!("cannot truncate to {k} entries"))),
        None if a.len() == b.len() => a.len(),
        None => return Err(Error::Invalid(format!("cardinalities differ: {} vs {}", a.len(), b.len()))),
    };
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let max_dev = sa[..count].iter().zip(&sb[..count]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(Comparison { count, max_dev, pass: max_dev <= tol })
}

/// JSON-ready record of one spin-versus-fermion comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    #[serde(rename = "L")]
    pub len: usize,
    pub delta: f64,
    pub kind: Perturbation,
    pub max_dev: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_chain() {
        let mut h = DMatrix::zeros(2, 2);
        h[(0, 1)] = 0.5;
        h[(1, 0)] = -0.5;
        let s = BdgSystem::from_majorana_form(Chain::A, h).unwrap();
        assert_eq!(s.n, 1);
        assert!((s.energies[0] - 0.5).abs() < 1e-14);
        let e = many_body_spectrum(&[&s], 0.0).unwrap();
        assert!((e[0] + 0.25).abs() < 1e-14 && (e[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn empty_chain_gives_constant() {
        let s = BdgSystem::from_majorana_form(Chain::B, DMatrix::zeros(0, 0)).unwrap();
        assert_eq!(many_body_spectrum(&[&s], 0.3).unwrap(), vec![0.3]);
    }

    #[test]
    fn ising_is_rejected() {
        assert!(matches!(build_bdg(4, 0.2, Perturbation::Ising), Err(Error::Unsupported(_))));
    }

    #[test]
    fn comparisons() {
        let a = [0.0, 1.0, 2.0];
        assert_eq!(compare_spectra(&a, &a, 1e-8, None).unwrap().max_dev, 0.0);
        let b = [1e-6, 1.0 + 1e-6, 2.0 + 1e-6];
        assert!(!compare_spectra(&a, &b, 1e-8, None).unwrap().pass);
        assert!(compare_spectra(&a, &b[..2], 1e-8, None).is_err());
        assert_eq!(compare_spectra(&a, &b[..2], 1e-5, Some(2)).unwrap().count, 2);
    }

    #[test]
    fn boundary_point_mode_closes() {
        let e: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&l| build_bdg(l, 0.0, Perturbation::None).unwrap().0.energies[0])
            .collect();
        assert!(e[0] > e[1] && e[1] > e[2]);
    }
}
