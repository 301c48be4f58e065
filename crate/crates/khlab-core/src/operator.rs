//! Matrix realization of Pauli sums in the sigma^z product basis.
//!
//! Basis index `b` has bit `i - 1` clear when site `i` is up. Terms sharing an
//! X-mask are fused into one diagonal weight vector, so an apply costs one
//! pass over the amplitudes per distinct flip pattern.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Default upper bound on the number of sites realized as a sparse operator.
pub const DEFAULT_MAX_SITES: usize = 24;

/// Anything that can act on a vector of `dim()` amplitudes.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `out = A v`; `out` is overwritten.
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]);
}

#[derive(Debug, Clone)]
enum Weights {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

#[derive(Debug, Clone)]
struct FlipGroup {
    mask: usize,
    weights: Weights,
}

#[derive(Debug, Clone)]
pub struct SparseOperator {
    len: usize,
    groups: Vec<FlipGroup>,
    coeff_l1: f64,
    hermitian: bool,
}

impl SparseOperator {
    pub fn from_pauli_sum(p: &PauliSum) -> Result<Self> {
        Self::with_cap(p, DEFAULT_MAX_SITES)
    }

    /// As [`SparseOperator::from_pauli_sum`] with an explicit site cap.
    pub fn with_cap(p: &PauliSum, max_sites: usize) -> Result<Self> {
        let len = p.len();
        if len > max_sites {
            return Err(Error::TooLarge { dim: 1usize << len.min(63), cap: 1usize << max_sites });
        }
        let dim = 1usize << len;
        let mut masks: Vec<u64> = p.terms().iter().map(|(_, s)| s.x_mask()).collect();
        masks.sort_unstable();
        masks.dedup();
        let mut groups = Vec::with_capacity(masks.len());
        for mask in masks {
            let mut w = vec![Complex64::new(0.0, 0.0); dim];
            for (c, s) in p.terms().iter().filter(|(_, s)| s.x_mask() == mask) {
                for (b, wb) in w.iter_mut().enumerate() {
                    let (f, _) = s.apply_to_basis(b);
                    *wb += c * f;
                }
            }
            let weights = if w.iter().all(|z| z.im == 0.0) {
                Weights::Real(w.iter().map(|z| z.re).collect())
            } else {
                Weights::Complex(w)
            };
            groups.push(FlipGroup { mask: mask as usize, weights });
        }
        Ok(Self { len, groups, coeff_l1: p.coefficient_l1(), hermitian: p.is_hermitian() })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Upper bound on the spectral norm: sum of coefficient magnitudes.
    pub fn norm_bound(&self) -> f64 {
        self.coeff_l1
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// True when every matrix element is real.
    pub fn is_real(&self) -> bool {
        self.groups.iter().all(|g| matches!(g.weights, Weights::Real(_)))
    }

    /// `out += scale * A v`.
    pub fn apply_add(&self, v: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        debug_assert_eq!(v.len(), 1 << self.len);
        for g in &self.groups {
            let m = g.mask;
            match &g.weights {
                Weights::Real(w) => {
                    for (b, o) in out.iter_mut().enumerate() {
                        let src = b ^ m;
                        *o += scale * (v[src] * w[src]);
                    }
                }
                Weights::Complex(w) => {
                    for (b, o) in out.iter_mut().enumerate() {
                        let src = b ^ m;
                        *o += scale * (v[src] * w[src]);
                    }
                }
            }
        }
    }

    /// `<v|A|v>` without allocating.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for g in &self.groups {
            let m = g.mask;
            match &g.weights {
                Weights::Real(w) => {
                    for (b, vb) in v.iter().enumerate() {
                        acc += v[b ^ m].conj() * vb * w[b];
                    }
                }
                Weights::Complex(w) => {
                    for (b, vb) in v.iter().enumerate() {
                        acc += v[b ^ m].conj() * vb * w[b];
                    }
                }
            }
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.len;
        let mut m = DMatrix::zeros(dim, dim);
        for g in &self.groups {
            for b in 0..dim {
                let w = match &g.weights {
                    Weights::Real(w) => Complex64::new(w[b], 0.0),
                    Weights::Complex(w) => w[b],
                };
                m[(b ^ g.mask, b)] += w;
            }
        }
        m
    }

    /// Real part of the dense matrix; exact when [`SparseOperator::is_real`].
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        self.to_dense().map(|z| z.re)
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        1 << self.len
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        self.apply_add(v, out, Complex64::new(1.0, 0.0));
    }
}

/// Dense matrix wrapper, mainly for oracles.
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<Complex64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.0.nrows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.0[(i, j)] * v[j]).sum();
        }
    }
}

/// Shorthand for [`SparseOperator::from_pauli_sum`].
pub fn to_sparse(p: &PauliSum) -> Result<SparseOperator> {
    SparseOperator::from_pauli_sum(p)
}
