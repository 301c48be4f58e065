use khlab_core::fermion::{build_bdg, compare_spectra, many_body_spectrum};
use khlab_core::hamiltonian::{build_kh, ModelSpec, Perturbation};
use khlab_core::operator::to_sparse;
use khlab_core::spectral::{full_spectrum, DENSE_CAP};

fn compare(len: usize, delta: f64, pert: Perturbation) -> f64 {
    let h = build_kh(&ModelSpec::kitaev(len, pert, delta)).unwrap();
    let spin = full_spectrum(&to_sparse(&h).unwrap(), DENSE_CAP).unwrap().eigenvalues;
    let (a, b) = build_bdg(len, delta, pert).unwrap();
    let fermi = many_body_spectrum(&[&a, &b], h.identity_coefficient().re).unwrap();
    compare_spectra(&spin, &fermi, 1e-8, None).unwrap().max_dev
}

#[test]
fn spin_and_fermion_spectra_agree() {
    for len in [4usize, 6, 8] {
        for delta in [0.0, 0.2, 0.4] {
            for pert in [Perturbation::None, Perturbation::Intra, Perturbation::Inter] {
                let d = compare(len, delta, pert);
                assert!(d <= 1e-8, "L = {len}, delta = {delta}, {pert:?}: {d:e}");
            }
        }
    }
}

#[test]
fn lowest_levels_agree_under_inter() {
    let len = 8;
    let h = build_kh(&ModelSpec::kitaev(len, Perturbation::Inter, 0.4)).unwrap();
    let spin = full_spectrum(&to_sparse(&h).unwrap(), DENSE_CAP).unwrap().eigenvalues;
    let (a, b) = build_bdg(len, 0.4, Perturbation::Inter).unwrap();
    let fermi = many_body_spectrum(&[&a, &b], 0.0).unwrap();
    let c = compare_spectra(&spin, &fermi, 1e-8, Some(2 << (len / 2))).unwrap();
    assert!(c.pass);
}

#[test]
fn edge_mode_decays_geometrically() {
    let delta = 0.4;
    let eps: Vec<f64> = (2..=8)
        .map(|n| build_bdg(2 * n, delta, Perturbation::Inter).unwrap().0.energies[0])
        .collect();
    let ratios: Vec<f64> = eps.windows(2).map(|w| w[1] / w[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(ratios.iter().all(|r| (r / mean - 1.0).abs() < 0.1), "{ratios:?}");
    assert!(mean < 1.0);
}

#[test]
fn intra_shift_reduces_topological_window() {
    // raising the onsite coupling toward the hopping closes the edge mode gap from above
    let e0 = build_bdg(12, 0.0, Perturbation::Intra).unwrap().0.energies[0];
    let e1 = build_bdg(12, 0.4, Perturbation::Intra).unwrap().0.energies[0];
    assert!(e1 > e0);
}
