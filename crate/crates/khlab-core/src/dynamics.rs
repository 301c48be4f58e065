//! Real-time propagation and two-time correlation analysis.
//!
//! States are propagated with classical fourth-order Runge-Kutta on
//! `d psi / dt = -i H psi`. Correlations use the form
//! `Gamma(t) = s <psi(t)| S^D_i |psi(t)>` valid for initial states that are
//! eigenstates of `S^D_i` with eigenvalue `s`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, SparseOperator};
use crate::pauli::Axis;
use crate::spectral::{Eigensystem, DEGENERACY_TOL};

/// Norm drift beyond this aborts a run.
pub const DRIFT_ABORT: f64 = 1e-4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    len: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes; the norm must be 1 within 1e-10.
    pub fn from_amplitudes(len: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << len {
            return Err(Error::Invalid(format!("{} amplitudes for L = {len}", amps.len())));
        }
        let s = Self { len, amps };
        if (s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    pub fn basis(len: usize, b: usize) -> Result<Self> {
        if b >= 1 << len {
            return Err(Error::Invalid(format!("basis index {b} out of range for L = {len}")));
        }
        let mut amps = vec![ZERO; 1 << len];
        amps[b] = Complex64::new(1.0, 0.0);
        Ok(Self { len, amps })
    }

    /// Product of single-site `sigma^D` eigenstates; `signs[i-1] = +1` or `-1`.
    pub fn product(axis: Axis, signs: &[i8]) -> Result<Self> {
        let len = signs.len();
        if len == 0 || len > 30 {
            return Err(Error::Invalid(format!("product state with L = {len}")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let site: Vec<[Complex64; 2]> = signs
            .iter()
            .map(|&s| {
                let s = f64::from(s.signum());
                match axis {
                    Axis::Z if s > 0.0 => [Complex64::new(1.0, 0.0), ZERO],
                    Axis::Z => [ZERO, Complex64::new(1.0, 0.0)],
                    Axis::X => [Complex64::new(h, 0.0), Complex64::new(s * h, 0.0)],
                    Axis::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, s * h)],
                }
            })
            .collect();
        let amps = (0..1usize << len)
            .map(|b| (0..len).map(|i| site[i][(b >> i) & 1]).product())
            .collect();
        Ok(Self { len, amps })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<sigma^D_site>`.
    pub fn sigma(&self, site: usize, axis: Axis) -> f64 {
        sigma_expectation(&self.amps, site, axis)
    }
}

/// `<psi| sigma^D_site |psi>` for raw amplitudes.
pub fn sigma_expectation(psi: &[Complex64], site: usize, axis: Axis) -> f64 {
    let m = 1usize << (site - 1);
    match axis {
        Axis::Z => psi
            .iter()
            .enumerate()
            .map(|(b, a)| if b & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum(),
        Axis::X => psi.iter().enumerate().map(|(b, a)| (psi[b ^ m].conj() * a).re).sum(),
        // sigma^y |b> = i (-1)^{bit} |b ^ m>
        Axis::Y => psi
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let v = psi[b ^ m].conj() * a;
                if b & m == 0 {
                    -v.im
                } else {
                    v.im
                }
            })
            .sum(),
    }
}

/// A sampled product state together with its site signs.
#[derive(Debug, Clone)]
pub struct ProductSample {
    pub index: usize,
    pub signs: Vec<i8>,
    pub state: StateVector,
}

/// Random sign pattern for sample `index`, keyed by `(seed, index)`.
pub fn sample_signs(len: usize, seed: u64, index: usize, fixed_edge: Option<i8>) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut signs: Vec<i8> = (0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    if let Some(s) = fixed_edge {
        signs[0] = s.signum();
    }
    signs
}

/// `n` product states of `sigma^D` eigenstates with independent random signs.
pub fn sample_product_states(
    axis: Axis,
    len: usize,
    n: usize,
    seed: u64,
    fixed_edge: Option<i8>,
) -> Result<Vec<ProductSample>> {
    if n == 0 {
        return Err(Error::Invalid("need at least one sample".into()));
    }
    (0..n)
        .map(|index| {
            let signs = sample_signs(len, seed, index, fixed_edge);
            let state = StateVector::product(axis, &signs)?;
            Ok(ProductSample { index, signs, state })
        })
        .collect()
}

/// Default RK4 step `0.1 / sum|c|`.
pub fn default_dt(h: &SparseOperator) -> f64 {
    let b = h.norm_bound();
    if b > 0.0 {
        0.1 / b
    } else {
        0.1
    }
}

/// Uniform sampling grid `t_k = k * interval`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub interval: f64,
    pub n: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_final]` with spacing `interval`.
    pub fn new(interval: f64, t_final: f64) -> Result<Self> {
        if !(interval > 0.0) || !(t_final >= 0.0) {
            return Err(Error::Invalid("time grid needs interval > 0 and T >= 0".into()));
        }
        let steps = (t_final / interval).round();
        if (steps * interval - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(Error::Invalid(format!("T = {t_final} is not a multiple of {interval}")));
        }
        Ok(Self { interval, n: steps as usize + 1 })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|k| k as f64 * self.interval).collect()
    }

    pub fn t_final(&self) -> f64 {
        (self.n - 1) as f64 * self.interval
    }
}

/// RK4 integrator for a fixed Hamiltonian.
pub struct Rk4<'a> {
    h: &'a SparseOperator,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Rk4<'a> {
    pub fn new(h: &'a SparseOperator) -> Self {
        let d = h.dim();
        Self { h, k: std::array::from_fn(|_| vec![ZERO; d]), tmp: vec![ZERO; d] }
    }

    /// One step of length `dt` in place.
    pub fn step(&mut self, psi: &mut [Complex64], dt: f64) {
        let mi = Complex64::new(0.0, -1.0);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        k1.fill(ZERO);
        self.h.apply_add(psi, k1, mi);
        for ((t, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *t = p + k * (0.5 * dt);
        }
        k2.fill(ZERO);
        self.h.apply_add(tmp, k2, mi);
        for ((t, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *t = p + k * (0.5 * dt);
        }
        k3.fill(ZERO);
        self.h.apply_add(tmp, k3, mi);
        for ((t, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *t = p + k * dt;
        }
        k4.fill(ZERO);
        self.h.apply_add(tmp, k4, mi);
        let c = dt / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * c;
        }
    }
}

/// Summary of one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub dt: f64,
    pub steps: usize,
    pub max_norm_drift: f64,
}

/// Propagates `psi0` over `grid`, calling `observe(k, t_k, psi)` at each
/// sample. The step is the largest value not above `dt_max` that divides
/// the sampling interval.
pub fn evolve_observed(
    h: &SparseOperator,
    psi0: &StateVector,
    dt_max: f64,
    grid: &TimeGrid,
    mut observe: impl FnMut(usize, f64, &[Complex64]),
) -> Result<EvolutionReport> {
    if psi0.dim() != h.dim() {
        return Err(Error::Invalid("state and Hamiltonian sizes differ".into()));
    }
    if !(dt_max > 0.0) {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let sub = (grid.interval / dt_max - 1e-9).ceil().max(1.0) as usize;
    let dt = grid.interval / sub as f64;
    let mut rk = Rk4::new(h);
    let mut psi = psi0.amplitudes().to_vec();
    let mut max_drift: f64 = 0.0;
    observe(0, 0.0, &psi);
    for k in 1..grid.n {
        for _ in 0..sub {
            rk.step(&mut psi, dt);
        }
        let t = k as f64 * grid.interval;
        let drift = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > DRIFT_ABORT {
            return Err(Error::NormDrift { drift, t, limit: DRIFT_ABORT });
        }
        observe(k, t, &psi);
    }
    Ok(EvolutionReport { dt, steps: sub * (grid.n - 1), max_norm_drift: max_drift })
}

/// States at `t = 0, dt, ..., t_final` (every `sample_every` steps).
pub fn evolve_rk4(
    h: &SparseOperator,
    psi0: &StateVector,
    dt: f64,
    t_final: f64,
    sample_every: usize,
) -> Result<(Vec<StateVector>, EvolutionReport)> {
    let grid = TimeGrid::new(dt * sample_every.max(1) as f64, t_final)?;
    let mut out = Vec::with_capacity(grid.n);
    let len = psi0.len();
    let report = evolve_observed(h, psi0, dt, &grid, |_, _, psi| {
        out.push(StateVector { len, amps: psi.to_vec() });
    })?;
    Ok((out, report))
}

/// `exp(-i H t) psi0` from a dense eigensystem.
pub fn exact_evolution(eig: &Eigensystem, psi0: &StateVector, t: f64) -> StateVector {
    let v = &eig.vectors;
    let dim = v.nrows();
    let c: Vec<Complex64> = (0..dim)
        .map(|n| (0..dim).map(|b| v[(b, n)].conj() * psi0.amps[b]).sum::<Complex64>())
        .collect();
    let phased: Vec<Complex64> = c
        .iter()
        .zip(&eig.values)
        .map(|(cn, e)| cn * Complex64::from_polar(1.0, -e * t))
        .collect();
    let amps = (0..dim).map(|b| (0..dim).map(|n| v[(b, n)] * phased[n]).sum()).collect();
    StateVector { len: psi0.len, amps }
}

/// Largest deviation between runs at `dt` and `dt / 2` on one trajectory.
pub fn step_certificate(h: &SparseOperator, psi0: &StateVector, dt: f64, grid: &TimeGrid) -> Result<f64> {
    let mut a: Vec<Vec<Complex64>> = Vec::new();
    evolve_observed(h, psi0, dt, grid, |_, _, p| a.push(p.to_vec()))?;
    let mut dev: f64 = 0.0;
    evolve_observed(h, psi0, dt / 2.0, grid, |k, _, p| {
        let d: f64 = p.iter().zip(&a[k]).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        dev = dev.max(d);
    })?;
    Ok(dev)
}

/// Correlation probe: site and axis of `S^D_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub site: usize,
    pub axis: Axis,
}

/// `Gamma_n(t) = s <S^D_i(t)>` for one initial state over `grid`.
pub fn autocorrelation(
    h: &SparseOperator,
    psi0: &StateVector,
    site: usize,
    axis: Axis,
    dt: f64,
    grid: &TimeGrid,
) -> Result<Vec<Complex64>> {
    let mut out = multi_autocorrelation(h, psi0, &[site], axis, dt, grid)?;
    Ok(out.pop().unwrap())
}

/// Correlations for several sites sharing one trajectory. Every probed site
/// must start in a `sigma^D` eigenstate.
pub fn multi_autocorrelation(
    h: &SparseOperator,
    psi0: &StateVector,
    sites: &[usize],
    axis: Axis,
    dt: f64,
    grid: &TimeGrid,
) -> Result<Vec<Vec<Complex64>>> {
    let mut s = Vec::with_capacity(sites.len());
    for &site in sites {
        if site == 0 || site > psi0.len() {
            return Err(Error::Invalid(format!("site {site} outside 1..={}", psi0.len())));
        }
        let m = psi0.sigma(site, axis);
        if (m.abs() - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!(
                "initial state is not an eigenstate of S^{axis}_{site} (<sigma> = {m})"
            )));
        }
        s.push(0.5 * m.signum());
    }
    let mut out = vec![Vec::with_capacity(grid.n); sites.len()];
    evolve_observed(h, psi0, dt, grid, |_, _, psi| {
        for (k, &site) in sites.iter().enumerate() {
            let v = s[k] * 0.5 * sigma_expectation(psi, site, axis);
            out[k].push(Complex64::new(v, 0.0));
        }
    })?;
    Ok(out)
}

/// Per-state correlation series with their mean and unbiased variance.
#[derive(Debug, Clone, Serialize)]
pub struct TtcSeries {
    pub site: usize,
    pub axis: Axis,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub per_state: Vec<Vec<Complex64>>,
    /// Eigenvalue `s = +-1/2` of each initial state at the probed site.
    pub signs: Vec<f64>,
    pub mean: Vec<Complex64>,
    pub variance: Vec<f64>,
}

impl TtcSeries {
    pub fn new(site: usize, axis: Axis, times: Vec<f64>, per_state: Vec<Vec<Complex64>>, signs: Vec<f64>)
        -> Result<Self> {
        let (mean, variance) = mean_and_variance(&per_state)?;
        if mean.len() != times.len() {
            return Err(Error::Invalid("series length differs from the time grid".into()));
        }
        Ok(Self { site, axis, times, per_state, signs, mean, variance })
    }

    pub fn n_states(&self) -> usize {
        self.per_state.len()
    }

    pub fn mean_re(&self) -> Vec<f64> {
        self.mean.iter().map(|z| z.re).collect()
    }

    /// `<S^D_i>(t)` per state, undoing the sign alignment.
    pub fn expectations(&self) -> Vec<Vec<f64>> {
        self.per_state
            .iter()
            .zip(&self.signs)
            .map(|(g, s)| g.iter().map(|z| z.re / s).collect())
            .collect()
    }

    /// Sign-aligned series `Gamma_n / |s|`, i.e. `<S^D_i>` multiplied by the
    /// initial sign.
    pub fn aligned(&self) -> Vec<Vec<f64>> {
        self.per_state
            .iter()
            .zip(&self.signs)
            .map(|(g, s)| g.iter().map(|z| z.re / s.abs()).collect())
            .collect()
    }
}

/// Pointwise mean and unbiased variance `sum |x - mean|^2 / (N - 1)`.
pub fn mean_and_variance(series: &[Vec<Complex64>]) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let first = series.first().ok_or_else(|| Error::Invalid("no series".into()))?;
    let m = first.len();
    if series.iter().any(|s| s.len() != m) {
        return Err(Error::Invalid("series lengths differ".into()));
    }
    let n = series.len() as f64;
    let mean: Vec<Complex64> = (0..m).map(|k| series.iter().map(|s| s[k]).sum::<Complex64>() / n).collect();
    let var = (0..m)
        .map(|k| {
            if series.len() < 2 {
                0.0
            } else {
                series.iter().map(|s| (s[k] - mean[k]).norm_sqr()).sum::<f64>() / (n - 1.0)
            }
        })
        .collect();
    Ok((mean, var))
}

/// Runs `n_states` sampled trajectories in parallel and returns one series
/// per probed site. Results do not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn sampled_correlations(
    h: &SparseOperator,
    axis: Axis,
    sites: &[usize],
    n_states: usize,
    seed: u64,
    fixed_edge: Option<i8>,
    dt: f64,
    grid: &TimeGrid,
) -> Result<Vec<TtcSeries>> {
    let samples = sample_product_states(axis, h.len(), n_states, seed, fixed_edge)?;
    let runs: Vec<Vec<Vec<Complex64>>> = samples
        .par_iter()
        .map(|s| multi_autocorrelation(h, &s.state, sites, axis, dt, grid))
        .collect::<Result<_>>()?;
    let times = grid.times();
    sites
        .iter()
        .enumerate()
        .map(|(k, &site)| {
            let per: Vec<Vec<Complex64>> = runs.iter().map(|r| r[k].clone()).collect();
            let signs = samples.iter().map(|s| 0.5 * f64::from(s.signs[site - 1])).collect();
            TtcSeries::new(site, axis, times.clone(), per, signs)
        })
        .collect()
}

/// Frequency-domain record of a set of real series.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencySpectrum {
    pub omega: Vec<f64>,
    /// `|(1/N) sum_n c_n(omega)|`.
    pub modulus_of_mean: Vec<f64>,
    pub mean_of_modulus: Vec<f64>,
    pub variance: Vec<f64>,
}

/// `c_m = (1/M) sum_k x_k e^{-2 pi i m k / M}` for all `m`.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let m = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter_mut().for_each(|c| *c /= m as f64);
    buf
}

/// `|sum |x|^2 / M - sum |c|^2|`, zero by Parseval's identity.
pub fn parseval_residual(x: &[f64]) -> f64 {
    let c = dft(x);
    let lhs = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let rhs: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    (lhs - rhs).abs()
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    let tol = 1e-9 * dt.abs().max(times.last().unwrap().abs());
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > tol) {
        return Err(Error::Invalid("time grid is not uniform".into()));
    }
    Ok(dt)
}

/// Transform on `omega_m = 2 pi m / T`, `m = 0..=M/2`, with `T = M dt`.
pub fn frequency_spectrum(times: &[f64], series: &[Vec<f64>]) -> Result<FrequencySpectrum> {
    let dt = check_uniform(times)?;
    let m = times.len();
    if series.is_empty() || series.iter().any(|s| s.len() != m) {
        return Err(Error::Invalid("series must match the time grid".into()));
    }
    let transforms: Vec<Vec<Complex64>> = series.iter().map(|s| dft(s)).collect();
    let half = m / 2 + 1;
    let n = series.len() as f64;
    let t_total = m as f64 * dt;
    let mut out = FrequencySpectrum {
        omega: (0..half).map(|k| 2.0 * std::f64::consts::PI * k as f64 / t_total).collect(),
        modulus_of_mean: Vec::with_capacity(half),
        mean_of_modulus: Vec::with_capacity(half),
        variance: Vec::with_capacity(half),
    };
    for k in 0..half {
        let sum: Complex64 = transforms.iter().map(|c| c[k]).sum();
        out.modulus_of_mean.push((sum / n).norm());
        let mods: Vec<f64> = transforms.iter().map(|c| c[k].norm()).collect();
        let mm = mods.iter().sum::<f64>() / n;
        out.mean_of_modulus.push(mm);
        out.variance.push(if series.len() < 2 {
            0.0
        } else {
            mods.iter().map(|v| (v - mm).powi(2)).sum::<f64>() / (n - 1.0)
        });
    }
    Ok(out)
}

/// Local maxima at `omega > 0` reaching `frac` of the largest value there.
pub fn count_peaks(omega: &[f64], values: &[f64], frac: f64) -> usize {
    let max = omega
        .iter()
        .zip(values)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    (1..values.len().saturating_sub(1))
        .filter(|&k| omega[k] > 0.0)
        .filter(|&k| values[k] >= frac * max && values[k] > values[k - 1] && values[k] >= values[k + 1])
        .count()
}

/// Exact infinite-time average of `Gamma = s <S^D_i(t)>`.
///
/// Degenerate multiplets (tolerance 1e-8) keep their off-diagonal blocks.
pub fn diagonal_ensemble(eig: &Eigensystem, psi0: &StateVector, site: usize, axis: Axis) -> Result<f64> {
    let v = &eig.vectors;
    let dim = v.nrows();
    if psi0.dim() != dim {
        return Err(Error::Invalid("state and eigensystem sizes differ".into()));
    }
    let m0 = psi0.sigma(site, axis);
    if (m0.abs() - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("initial state is not an eigenstate of S^{axis}_{site}")));
    }
    let s = 0.5 * m0.signum();
    let op = SparseOperator::from_pauli_sum(&crate::pauli::PauliSum::term(
        psi0.len(),
        0.5,
        &[(site, axis.pauli())],
    )?)?;
    let c: Vec<Complex64> =
        (0..dim).map(|n| (0..dim).map(|b| v[(b, n)].conj() * psi0.amps[b]).sum()).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut start = 0;
    let mut col = vec![ZERO; dim];
    let mut ocol = vec![ZERO; dim];
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.values[end] - eig.values[end - 1] <= DEGENERACY_TOL {
            end += 1;
        }
        // projected amplitude phi = sum_{n in block} c_n |n>
        col.fill(ZERO);
        for n in start..end {
            for b in 0..dim {
                col[b] += v[(b, n)] * c[n];
            }
        }
        op.apply(&col, &mut ocol);
        total += col.iter().zip(&ocol).map(|(a, b)| a.conj() * b).sum::<Complex64>();
        start = end;
    }
    Ok(s * total.re)
}

/// Mean of `x` over samples with `t` in `[a, b]`.
pub fn window_mean(times: &[f64], x: &[f64], a: f64, b: f64) -> f64 {
    let (s, n) = times
        .iter()
        .zip(x)
        .filter(|(t, _)| **t >= a && **t <= b)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    s / n as f64
}

/// Root-mean-square deviation from the window mean.
pub fn window_rms(times: &[f64], x: &[f64], a: f64, b: f64) -> f64 {
    let mu = window_mean(times, x, a, b);
    let (s, n) = times
        .iter()
        .zip(x)
        .filter(|(t, _)| **t >= a && **t <= b)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + (v - mu).powi(2), n + 1));
    (s / n as f64).sqrt()
}

/// Centered moving root-mean-square of `x` over `width` samples.
pub fn moving_rms(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = vec![0.0; x.len() + 1];
    for (k, v) in x.iter().enumerate() {
        prefix[k + 1] = prefix[k] + v * v;
    }
    (0..x.len())
        .map(|k| {
            let a = k.saturating_sub(half);
            let b = (k + half + 1).min(x.len());
            ((prefix[b] - prefix[a]) / (b - a) as f64).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeatAnalysis {
    pub carrier: f64,
    pub first_node: f64,
    pub nodes: Vec<f64>,
    pub revival_period: f64,
}

/// Carrier frequency, envelope nodes and revival period of a beating signal.
///
/// The carrier is the power centroid of the strongest spectral line within
/// 10% of its frequency. The envelope is a moving RMS over `4 pi / carrier`;
/// nodes are the minima of each stretch where it drops below 20% of the
/// global RMS.
pub fn beat_analysis(times: &[f64], x: &[f64]) -> Result<BeatAnalysis> {
    let dt = check_uniform(times)?;
    if x.len() != times.len() {
        return Err(Error::Invalid("series must match the time grid".into()));
    }
    let mu = x.iter().sum::<f64>() / x.len() as f64;
    let y: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let spec = frequency_spectrum(times, std::slice::from_ref(&y))?;
    let (k, _) = spec
        .modulus_of_mean
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Analysis("series too short".into()))?;
    // sidebands at carrier +- beat share the power; take the centroid of the band
    let band = 0.1 * spec.omega[k];
    let (mut num, mut den) = (0.0, 0.0);
    for (w, c) in spec.omega.iter().zip(&spec.modulus_of_mean) {
        if (w - spec.omega[k]).abs() <= band {
            num += w * c * c;
            den += c * c;
        }
    }
    let carrier = num / den;
    let width = ((4.0 * std::f64::consts::PI / carrier) / dt).round().max(1.0) as usize;
    let env = moving_rms(&y, width);
    let global = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let thresh = 0.2 * global;
    let mut nodes = Vec::new();
    let mut k = 0;
    while k < env.len() {
        if env[k] < thresh {
            let start = k;
            while k < env.len() && env[k] < thresh {
                k += 1;
            }
            // a stretch touching the ends is not a bounded minimum
            if start > 0 && k < env.len() {
                let arg = (start..k).min_by(|&a, &b| env[a].total_cmp(&env[b])).unwrap();
                nodes.push(times[arg]);
            }
        } else {
            k += 1;
        }
    }
    let first_node = *nodes.first().ok_or_else(|| Error::Analysis("no envelope node found".into()))?;
    let revival_period = if nodes.len() >= 2 {
        2.0 * (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64
    } else {
        4.0 * first_node
    };
    Ok(BeatAnalysis { carrier, first_node, nodes, revival_period })
}

/// Dense matrix exponential oracle `exp(-i H t)` by eigen-decomposition.
pub fn propagator_matrix(eig: &Eigensystem, t: f64) -> DMatrix<Complex64> {
    let v = &eig.vectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
    ));
    v * d * v.adjoint()
}
