//! Eigenvalues, degeneracy multiplets, gaps and static ground-state diagnostics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, SparseOperator};
use crate::pauli::{Axis, PauliSum};

/// Default dimension cap for dense diagonalization.
pub const DENSE_CAP: usize = 1 << 12;

/// Default absolute tolerance for grouping degenerate levels.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplet {
    pub energy: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gaps {
    /// Splitting of the two lowest multiplets.
    pub delta_l: f64,
    /// Distance from the ground multiplet to the first excited sector.
    pub delta_delta: f64,
    /// Number of multiplet pairs among the lowest levels spaced by `delta_delta`.
    pub recurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub multiplets: Vec<Multiplet>,
}

impl SpectrumResult {
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, tol: f64) -> Self {
        let multiplets = degeneracy_structure(&eigenvalues, tol);
        Self { eigenvalues, multiplets }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn gaps(&self) -> Result<Gaps> {
        gaps(&self.multiplets)
    }
}

/// Dense eigen-decomposition, ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::TooLarge { dim, cap })
    } else {
        Ok(())
    }
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// All eigenvalues by dense diagonalization.
pub fn full_spectrum(h: &SparseOperator, cap: usize) -> Result<SpectrumResult> {
    check_cap(h.dim(), cap)?;
    let mut values: Vec<f64> = if h.is_real() {
        SymmetricEigen::new(h.to_dense_real()).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(SpectrumResult::from_eigenvalues(values, DEGENERACY_TOL))
}

/// All eigenpairs by dense diagonalization.
pub fn eigensystem(h: &SparseOperator, cap: usize) -> Result<Eigensystem> {
    check_cap(h.dim(), cap)?;
    let (vals, vecs) = if h.is_real() {
        let e = SymmetricEigen::new(h.to_dense_real());
        (e.eigenvalues, e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let e = SymmetricEigen::new(h.to_dense());
        (e.eigenvalues, e.eigenvectors)
    };
    let order = sorted_order(vals.as_slice());
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = DMatrix::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// Options for [`lowest_k`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_krylov: 200, max_restarts: 50, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct LowestK {
    pub spectrum: SpectrumResult,
    pub vectors: Vec<StateVector>,
    pub residuals: Vec<f64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Lowest eigenpair of `h` restricted to the complement of `locked`.
fn lanczos_lowest(
    h: &dyn LinearOperator,
    locked: &[Vec<Complex64>],
    start: Vec<Complex64>,
    opts: &LanczosOptions,
) -> Result<(f64, Vec<Complex64>, f64)> {
    let dim = h.dim();
    let mut start = start;
    let space = dim - locked.len();
    let m_max = opts.max_krylov.min(space).max(1);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..=opts.max_restarts {
        orthogonalize(&mut start, locked);
        let nrm = norm(&start);
        if nrm < 1e-12 {
            return Err(Error::NoConvergence("start vector lies in the locked space".into()));
        }
        let mut basis: Vec<Vec<Complex64>> = vec![start.iter().map(|x| x / nrm).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let best: (f64, DVector<f64>);
        loop {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let k = (0..m).min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap();
            let s = eig.eigenvectors.column(k).into_owned();
            let theta = eig.eigenvalues[k];
            let est = b * s[m - 1].abs();
            let exhausted = b < 1e-13 || m >= m_max;
            if est < 0.1 * opts.tol || exhausted {
                best = (theta, s);
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let (theta, s) = best;
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (sj, q) in s.iter().zip(&basis) {
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi += qi * *sj;
            }
        }
        orthogonalize(&mut v, locked);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        h.apply(&v, &mut w);
        let res: f64 = w.iter().zip(&v).map(|(a, b)| (a - b * theta).norm_sqr()).sum::<f64>().sqrt();
        if res <= opts.tol {
            return Ok((theta, v, res));
        }
        start = v;
    }
    Err(Error::NoConvergence(format!(
        "Lanczos did not reach residual {:.1e} within {} restarts",
        opts.tol, opts.max_restarts
    )))
}

/// The `k` lowest eigenpairs by Lanczos with full reorthogonalization and
/// locking, one pair per cycle so that degenerate copies are all found.
pub fn lowest_k(h: &dyn LinearOperator, k: usize, opts: &LanczosOptions) -> Result<LowestK> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::Invalid(format!("k = {k} must lie in 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for _ in 0..k {
        let start: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let (theta, v, res) = lanczos_lowest(h, &locked, start, opts)?;
        values.push(theta);
        residuals.push(res);
        locked.push(v);
    }
    let order = sorted_order(&values);
    let len = dim.trailing_zeros() as usize;
    let vectors = order
        .iter()
        .map(|&i| StateVector::from_amplitudes(len, locked[i].clone()))
        .collect::<Result<Vec<_>>>()?;
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    Ok(LowestK {
        spectrum: SpectrumResult::from_eigenvalues(sorted, DEGENERACY_TOL),
        vectors,
        residuals: order.iter().map(|&i| residuals[i]).collect(),
    })
}

/// Groups sorted eigenvalues into multiplets separated by more than `tol`.
pub fn degeneracy_structure(evals: &[f64], tol: f64) -> Vec<Multiplet> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for &e in evals {
        match out.last_mut() {
            Some((last, sum, n)) if e - *last <= tol => {
                *last = e;
                *sum += e;
                *n += 1;
            }
            _ => out.push((e, e, 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, n)| Multiplet { energy: sum / n as f64, multiplicity: n })
        .collect()
}

/// `Delta_L = E(m_1) - E(m_0)` and `Delta_delta = E(m_2) - E(m_0)`.
pub fn gaps(multiplets: &[Multiplet]) -> Result<Gaps> {
    if multiplets.len() < 2 {
        return Err(Error::Analysis("fewer than two multiplets".into()));
    }
    let delta_l = multiplets[1].energy - multiplets[0].energy;
    let delta_delta = multiplets.get(2).map_or(f64::NAN, |m| m.energy - multiplets[0].energy);
    let lowest: Vec<f64> = multiplets.iter().take(40).map(|m| m.energy).collect();
    let mut recurrences = 0;
    for (a, &ea) in lowest.iter().enumerate() {
        for &eb in &lowest[a + 1..] {
            if ((eb - ea) - delta_delta).abs() < 1e-6 {
                recurrences += 1;
            }
        }
    }
    Ok(Gaps { delta_l, delta_delta, recurrences })
}

/// Von Neumann entropy (natural log) of sites `1..=l`.
pub fn entanglement_entropy(state: &StateVector, l: usize) -> Result<f64> {
    let len = state.len();
    if l == 0 || l >= len {
        return Err(Error::Invalid(format!("cut l = {l} must lie in 1..{len}")));
    }
    // site 1 is the least significant bit, so the low l bits index subsystem A
    let da = 1usize << l;
    let db = 1usize << (len - l);
    let amps = state.amplitudes();
    let m = DMatrix::from_fn(da, db, |a, b| amps[a + da * b]);
    let sv = m.singular_values();
    Ok(sv
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum())
}

/// `P^D(q) = (2/L) sum_{k,l} <S^D_k S^D_l> e^{-iq(k-l)}` on `q = 2 pi m / L`.
pub fn structure_factor(state: &StateVector, axis: Axis) -> Result<Vec<(f64, f64)>> {
    let len = state.len();
    let mut corr = DMatrix::<f64>::zeros(len, len);
    for k in 1..=len {
        for l in k..=len {
            let v = if k == l {
                0.25
            } else {
                let op = PauliSum::term(len, 0.25, &[(k, axis.pauli()), (l, axis.pauli())])?;
                SparseOperator::from_pauli_sum(&op)?.expectation(state.amplitudes()).re
            };
            corr[(k - 1, l - 1)] = v;
            corr[(l - 1, k - 1)] = v;
        }
    }
    let out = (0..len)
        .map(|m| {
            let q = 2.0 * std::f64::consts::PI * m as f64 / len as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..len {
                for l in 0..len {
                    acc += corr[(k, l)] * Complex64::from_polar(1.0, -q * (k as f64 - l as f64));
                }
            }
            (q, 2.0 / len as f64 * acc.re)
        })
        .collect();
    Ok(out)
}
