use std::f64::consts::FRAC_PI_2;

use khlab_core::hamiltonian::{
    build_from_couplings, build_kh, rotate_frame, Boundary, CouplingMatrix, ModelSpec, Perturbation,
};
use khlab_core::operator::to_sparse;
use khlab_core::pauli::{Pauli, PauliSum};
use khlab_core::spectral::{degeneracy_structure, full_spectrum, DENSE_CAP};
use nalgebra::DMatrix;

fn spectrum(h: &PauliSum) -> Vec<f64> {
    full_spectrum(&to_sparse(h).unwrap(), DENSE_CAP).unwrap().eigenvalues
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn two_site_spectrum() {
    let e = spectrum(&build_kh(&ModelSpec::new(2, FRAC_PI_2)).unwrap());
    assert!(max_dev(&e, &[-0.25, -0.25, 0.25, 0.25]) < 1e-12);
}

#[test]
fn every_term_is_hermitian() {
    for pert in [Perturbation::None, Perturbation::Intra, Perturbation::Inter, Perturbation::Ising] {
        for b in [Boundary::Open, Boundary::Periodic] {
            let spec = ModelSpec { delta: 0.3, perturbation: pert, ..ModelSpec::new(6, 0.9) }.with_boundary(b);
            assert!(build_kh(&spec).unwrap().is_hermitian());
        }
    }
}

#[test]
fn kitaev_point_degeneracy_divides_levels() {
    for len in [4usize, 6, 8] {
        let e = spectrum(&build_kh(&ModelSpec::new(len, FRAC_PI_2)).unwrap());
        let g = 1usize << (len / 2);
        let m = degeneracy_structure(&e, 1e-8);
        assert_eq!(m[0].multiplicity, g, "L = {len}");
        assert!(m.iter().all(|m| m.multiplicity % g == 0), "L = {len}");
    }
}

#[test]
fn periodic_ground_multiplet() {
    let spec = ModelSpec::new(8, FRAC_PI_2).with_boundary(Boundary::Periodic);
    let e = spectrum(&build_kh(&spec).unwrap());
    assert_eq!(degeneracy_structure(&e, 1e-8)[0].multiplicity, 8);
}

#[test]
fn rescaled_spectrum_is_consistent() {
    for len in [4usize, 6, 8] {
        let spec = ModelSpec::kitaev(len, Perturbation::Inter, 0.4);
        let plain = spectrum(&build_kh(&spec).unwrap());
        let scaled: Vec<f64> =
            spectrum(&build_kh(&spec.rescaled(true)).unwrap()).iter().map(|e| e * 1.4).collect();
        assert!(max_dev(&plain, &scaled) < 1e-10);
    }
}

fn distinct(e: &[f64]) -> Vec<f64> {
    degeneracy_structure(e, 1e-8).iter().map(|m| m.energy).collect()
}

/// `sum K2 S^y_i S^y_{i+1} + K1 S^x_i` on `n` open sites.
fn transverse_field_ising(n: usize, k1: f64, k2: f64) -> PauliSum {
    let mut h = PauliSum::zero(n).unwrap();
    for i in 1..=n {
        h = h.add(&PauliSum::term(n, k1 / 2.0, &[(i, Pauli::X)]).unwrap()).unwrap();
        if i < n {
            h = h.add(&PauliSum::term(n, k2 / 4.0, &[(i, Pauli::Y), (i + 1, Pauli::Y)]).unwrap()).unwrap();
        }
    }
    h
}

#[test]
fn inter_spectrum_matches_transverse_field_ising() {
    for len in [4usize, 6, 8, 10] {
        for delta in [0.0, 0.4] {
            let kh = distinct(&spectrum(&build_kh(&ModelSpec::kitaev(len, Perturbation::Inter, delta)).unwrap()));
            let tfim = distinct(&spectrum(&transverse_field_ising(len / 2, 0.5, 1.0 + delta)));
            assert_eq!(kh.len(), tfim.len(), "L = {len}, delta = {delta}");
            assert!(max_dev(&kh, &tfim) < 1e-10, "L = {len}, delta = {delta}");
        }
    }
}

#[test]
fn rotation_preserves_spectrum_and_multiplets() {
    let h = build_kh(&ModelSpec::new(6, FRAC_PI_2)).unwrap();
    let a = spectrum(&h);
    let b = spectrum(&rotate_frame(&h));
    assert!(max_dev(&a, &b) < 1e-10);
    let (ma, mb) = (degeneracy_structure(&a, 1e-8), degeneracy_structure(&b, 1e-8));
    assert_eq!(ma.len(), mb.len());
    for (x, y) in ma.iter().zip(&mb) {
        assert_eq!(x.multiplicity, y.multiplicity);
        assert!((x.energy - y.energy).abs() < 1e-10);
    }
}

#[test]
fn coupling_model_reproduces_rotated_ising_target() {
    let n = 4;
    let mut xx = DMatrix::zeros(n, n);
    let mut zz = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let odd = i % 2 == 0;
        let jx = if odd { 1.0 } else { 2.0 };
        xx[(i, i + 1)] = jx;
        xx[(i + 1, i)] = jx;
        if odd {
            zz[(i, i + 1)] = 1.0;
            zz[(i + 1, i)] = 1.0;
        }
    }
    let cm = CouplingMatrix::new(xx, zz).unwrap();
    let a = spectrum(&build_from_couplings(&cm).unwrap());
    let target = rotate_frame(&build_kh(&ModelSpec::kitaev(n, Perturbation::Ising, 1.0)).unwrap());
    let b = spectrum(&target);
    assert!(max_dev(&a, &b) < 1e-10);
}
