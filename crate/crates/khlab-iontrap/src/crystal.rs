use khlab_core::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::TrapConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, restarts: 20, seed: 0 }
    }
}

impl SolverOptions {
    pub fn from_config(cfg: &TrapConfig) -> Self {
        Self { restarts: cfg.restarts, seed: cfg.seed, ..Self::default() }
    }
}

/// Equilibrium positions `(x, y, z)`, sorted by `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct IonCrystal {
    pub positions: Vec<[f64; 3]>,
    pub energy: f64,
    pub gradient_norm: f64,
    pub min_curvature: f64,
}

impl IonCrystal {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x,y,z\n");
        for (i, p) in self.positions.iter().enumerate() {
            out.push_str(&format!("{},{:.15e},{:.15e},{:.15e}\n", i + 1, p[0], p[1], p[2]));
        }
        out
    }
}

struct Potential {
    w2: [f64; 3],
}

impl Potential {
    fn energy(&self, r: &DVector<f64>) -> f64 {
        let n = r.len() / 3;
        let mut e = 0.0;
        for i in 0..n {
            for a in 0..3 {
                e += 0.5 * self.w2[a] * r[3 * i + a] * r[3 * i + a];
            }
            for j in i + 1..n {
                e += 1.0 / dist(r, i, j);
            }
        }
        e
    }

    fn gradient(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = r.len() / 3;
        let mut g = DVector::zeros(3 * n);
        for i in 0..n {
            for a in 0..3 {
                g[3 * i + a] += self.w2[a] * r[3 * i + a];
            }
            for j in i + 1..n {
                let d = dist(r, i, j);
                let inv3 = 1.0 / (d * d * d);
                for a in 0..3 {
                    let f = (r[3 * i + a] - r[3 * j + a]) * inv3;
                    g[3 * i + a] -= f;
                    g[3 * j + a] += f;
                }
            }
        }
        g
    }

    fn hessian(&self, r: &DVector<f64>) -> DMatrix<f64> {
        let n = r.len() / 3;
        let mut h = DMatrix::zeros(3 * n, 3 * n);
        for i in 0..n {
            for a in 0..3 {
                h[(3 * i + a, 3 * i + a)] += self.w2[a];
            }
            for j in i + 1..n {
                let d = dist(r, i, j);
                let (d2, d5) = (d * d, d.powi(5));
                for a in 0..3 {
                    for b in 0..3 {
                        let da = r[3 * i + a] - r[3 * j + a];
                        let db = r[3 * i + b] - r[3 * j + b];
                        let t = (3.0 * da * db - if a == b { d2 } else { 0.0 }) / d5;
                        h[(3 * i + a, 3 * i + b)] += t;
                        h[(3 * j + a, 3 * j + b)] += t;
                        h[(3 * i + a, 3 * j + b)] -= t;
                        h[(3 * j + a, 3 * i + b)] -= t;
                    }
                }
            }
        }
        h
    }
}

fn dist(r: &DVector<f64>, i: usize, j: usize) -> f64 {
    let (a, b) = (3 * i, 3 * j);
    let dx = r[a] - r[b];
    let dy = r[a + 1] - r[b + 1];
    let dz = r[a + 2] - r[b + 2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

struct Solution {
    r: DVector<f64>,
    energy: f64,
    gnorm: f64,
}

/// Levenberg-damped Newton with an Armijo backtrack; switches to plain Newton close to the minimum.
fn newton(pot: &Potential, mut r: DVector<f64>, opts: &SolverOptions) -> Option<Solution> {
    let mut mu = 0.0;
    let mut e = pot.energy(&r);
    for _ in 0..opts.max_iter {
        let g = pot.gradient(&r);
        let gnorm = g.norm();
        if !gnorm.is_finite() {
            return None;
        }
        if gnorm <= opts.tol {
            return Some(Solution { r, energy: e, gnorm });
        }
        let h = pot.hessian(&r);
        let scale = h.diagonal().amax().max(1.0);
        let step = loop {
            let mut m = h.clone();
            for k in 0..m.nrows() {
                m[(k, k)] += mu;
            }
            if let Some(ch) = m.cholesky() {
                break ch.solve(&(-&g));
            }
            mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
            if mu > 1e12 * scale {
                return None;
            }
        };
        let slope = g.dot(&step);
        if gnorm < 1e-6 && mu == 0.0 {
            r += step;
            e = pot.energy(&r);
            continue;
        }
        let mut alpha = 1.0;
        loop {
            let trial = &r + &step * alpha;
            let et = pot.energy(&trial);
            if et <= e + 1e-4 * alpha * slope {
                r = trial;
                e = et;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                // no descent along the damped direction, stiffen the damping
                mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
                break;
            }
        }
        if alpha == 1.0 {
            mu *= 0.1;
            if mu < 1e-14 * scale {
                mu = 0.0;
            }
        }
    }
    let g = pot.gradient(&r);
    let gnorm = g.norm();
    (gnorm <= opts.tol).then_some(Solution { r, energy: e, gnorm })
}

fn seed_positions(n: usize, wx: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let half = 0.5 * (n as f64).powf(0.6);
    let stretch = 1.0 + 0.1 * (rng.random::<f64>() - 0.5);
    let zig = 0.05 * (18.75 / wx).powf(2.0 / 3.0);
    let mut r = DVector::zeros(3 * n);
    for i in 0..n {
        let u = if n > 1 { 2.0 * i as f64 / (n - 1) as f64 - 1.0 } else { 0.0 };
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        r[3 * i] = sign * zig + 0.01 * (rng.random::<f64>() - 0.5);
        r[3 * i + 1] = 1e-3 * (rng.random::<f64>() - 0.5);
        r[3 * i + 2] = u * half * stretch;
    }
    r
}

/// Lowest-energy stable equilibrium over seeded restarts; saddles are discarded.
pub fn equilibrium_positions(cfg: &TrapConfig, opts: &SolverOptions) -> Result<IonCrystal> {
    cfg.validate()?;
    let n = cfg.n;
    let pot = Potential { w2: [cfg.wx_over_wz.powi(2), cfg.wy_over_wz.powi(2), 1.0] };
    let mut best: Option<(Solution, f64)> = None;
    let mut saddles = 0;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let Some(sol) = newton(&pot, seed_positions(n, cfg.wx_over_wz, &mut rng), opts) else {
            continue;
        };
        let curv = SymmetricEigen::new(pot.hessian(&sol.r)).eigenvalues.min();
        if curv <= 0.0 {
            saddles += 1;
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, _)) => sol.energy < b.energy - 1e-9 * b.energy.abs(),
        };
        if better {
            best = Some((sol, curv));
        }
    }
    let (sol, curv) = best.ok_or_else(|| {
        Error::NoConvergence(format!("no stable equilibrium in {} restarts ({saddles} saddles)", opts.restarts))
    })?;
    let mut positions: Vec<[f64; 3]> = (0..n).map(|i| [sol.r[3 * i], sol.r[3 * i + 1], sol.r[3 * i + 2]]).collect();
    positions.sort_by(|a, b| a[2].total_cmp(&b[2]));
    // fix the mirror images x -> -x and y -> -y
    for axis in 0..2 {
        let pivot = if positions[n / 2][axis].abs() > 1e-9 {
            Some(positions[n / 2][axis])
        } else {
            positions.iter().map(|p| p[axis]).find(|v| v.abs() > 1e-9)
        };
        if pivot.is_some_and(|v| v < 0.0) {
            positions.iter_mut().for_each(|p| p[axis] = -p[axis]);
        }
    }
    Ok(IonCrystal { positions, energy: sol.energy, gradient_norm: sol.gnorm, min_curvature: curv })
}

/// Normal modes of one transverse branch; frequencies descending, eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeData {
    pub frequencies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl ModeData {
    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::from("p,omega");
        for i in 1..=n {
            out.push_str(&format!(",m{i}"));
        }
        out.push('\n');
        for p in 0..n {
            out.push_str(&format!("{},{:.15e}", p + 1, self.frequencies[p]));
            for i in 0..n {
                out.push_str(&format!(",{:.15e}", self.vectors[(i, p)]));
            }
            out.push('\n');
        }
        out
    }
}

/// y-branch modes from the y-block of the Hessian.
pub fn transverse_modes(crystal: &IonCrystal, cfg: &TrapConfig) -> Result<ModeData> {
    let n = crystal.n();
    let p = &crystal.positions;
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] += cfg.wy_over_wz.powi(2);
        for j in i + 1..n {
            let d: [f64; 3] = std::array::from_fn(|a| p[i][a] - p[j][a]);
            let r2 = d.iter().map(|v| v * v).sum::<f64>();
            let t = (3.0 * d[1] * d[1] - r2) / r2.powf(2.5);
            k[(i, i)] += t;
            k[(j, j)] += t;
            k[(i, j)] -= t;
            k[(j, i)] -= t;
        }
    }
    let eig = SymmetricEigen::new(k);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &q) in order.iter().enumerate() {
        let lam = eig.eigenvalues[q];
        if lam <= 0.0 {
            return Err(Error::Analysis(format!("unstable transverse mode, w^2 = {lam:e}")));
        }
        frequencies.push(lam.sqrt());
        let mut v = eig.eigenvectors.column(q).into_owned();
        let lead = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() + 1e-12 { b } else { a });
        if lead < 0.0 {
            v = -v;
        }
        vectors.set_column(col, &v);
    }
    Ok(ModeData { frequencies, vectors })
}
