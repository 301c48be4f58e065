use khlab_core::dynamics::{
    default_dt, diagonal_ensemble, evolve_observed, exact_evolution, frequency_spectrum, parseval_residual,
    sample_product_states, sampled_correlations, window_mean, TimeGrid,
};
use khlab_core::hamiltonian::{build_kh, ModelSpec, Perturbation};
use khlab_core::operator::{to_sparse, SparseOperator};
use khlab_core::pauli::Axis;
use khlab_core::spectral::{eigensystem, full_spectrum, DENSE_CAP};

fn inter(len: usize, delta: f64) -> SparseOperator {
    to_sparse(&build_kh(&ModelSpec::kitaev(len, Perturbation::Inter, delta)).unwrap()).unwrap()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let spec = ModelSpec { delta: 0.4, perturbation: Perturbation::Inter, ..ModelSpec::new(6, 1.2) };
    let h = to_sparse(&build_kh(&spec).unwrap()).unwrap();
    let eig = eigensystem(&h, DENSE_CAP).unwrap();
    let psi0 = sample_product_states(Axis::Y, 6, 1, 11, None).unwrap().remove(0).state;
    let grid = TimeGrid::new(0.4, 20.0).unwrap();
    let exact: Vec<_> = grid.times().iter().map(|&t| exact_evolution(&eig, &psi0, t)).collect();
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let mut e: f64 = 0.0;
            evolve_observed(&h, &psi0, dt, &grid, |k, _, p| {
                let d = p.iter().zip(exact[k].amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
                e = e.max(d.sqrt());
            })
            .unwrap();
            e
        })
        .collect();
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
}

#[test]
fn norm_is_conserved_at_default_step() {
    let h = inter(8, 0.4);
    let psi0 = sample_product_states(Axis::Z, 8, 1, 5, None).unwrap().remove(0).state;
    let grid = TimeGrid::new(1.0, 200.0).unwrap();
    let r = evolve_observed(&h, &psi0, default_dt(&h), &grid, |_, _, _| {}).unwrap();
    assert!(r.max_norm_drift <= 1e-6, "{}", r.max_norm_drift);
}

#[test]
fn sampled_signs_are_unbiased() {
    let n = 4096;
    let s = sample_product_states(Axis::Z, 8, n, 2024, None).unwrap();
    for site in 0..8 {
        let mean = s.iter().map(|p| f64::from(p.signs[site])).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "site {site}: {mean}");
    }
}

#[test]
fn parseval_on_correlation_data() {
    let h = inter(6, 0.4);
    let grid = TimeGrid::new(0.1, 50.0).unwrap();
    let ttc = sampled_correlations(&h, Axis::Y, &[1], 4, 3, None, default_dt(&h), &grid).unwrap();
    for s in ttc[0].expectations() {
        assert!(parseval_residual(&s) < 1e-8);
    }
    let fs = frequency_spectrum(&grid.times(), &ttc[0].aligned()).unwrap();
    assert_eq!(fs.omega.len(), grid.n / 2 + 1);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let h = inter(6, 0.4);
    let grid = TimeGrid::new(0.5, 20.0).unwrap();
    let run = || sampled_correlations(&h, Axis::Y, &[1, 3], 6, 17, None, 0.05, &grid).unwrap();
    let a = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(run);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mean, y.mean);
        assert_eq!(x.variance, y.variance);
    }
}

#[test]
fn diagonal_ensemble_matches_late_window() {
    let (len, delta, n) = (8, 0.4, 48);
    let h = inter(len, delta);
    let eig = eigensystem(&h, DENSE_CAP).unwrap();
    let samples = sample_product_states(Axis::Y, len, n, 99, None).unwrap();
    let grid = TimeGrid::new(0.5, 400.0).unwrap();
    let ttc = sampled_correlations(&h, Axis::Y, &[1, 4], n, 99, None, default_dt(&h), &grid).unwrap();
    for (k, site) in [1usize, 4].into_iter().enumerate() {
        let de = samples.iter().map(|s| diagonal_ensemble(&eig, &s.state, site, Axis::Y).unwrap()).sum::<f64>()
            / n as f64;
        let win = window_mean(&ttc[k].times, &ttc[k].mean_re(), 200.0, 400.0);
        assert!((de - win).abs() < 1e-2, "site {site}: DE {de}, window {win}");
        if site == 4 {
            assert!(de.abs() < 1e-2);
        }
    }
}

#[test]
fn edge_coherence_revives_after_zero_mode_period() {
    let (len, delta) = (8, 0.4);
    let h = inter(len, delta);
    let dl = full_spectrum(&h, DENSE_CAP).unwrap().gaps().unwrap().delta_l;
    let period = 2.0 * std::f64::consts::PI / dl;
    let grid = TimeGrid::new(0.25, (period + 10.0).ceil()).unwrap();
    let ttc = sampled_correlations(&h, Axis::Y, &[1], 32, 8, None, default_dt(&h), &grid).unwrap();
    let abs: Vec<f64> = ttc[0].mean.iter().map(|z| z.norm()).collect();
    let early = window_mean(&ttc[0].times, &abs, 0.0, 5.0);
    let late = window_mean(&ttc[0].times, &abs, period - 2.5, period + 2.5);
    assert!(late >= 0.8 * early, "early {early}, at revival {late}");
}
