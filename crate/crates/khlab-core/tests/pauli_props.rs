use khlab_core::operator::{to_sparse, LinearOperator};
use khlab_core::pauli::{PauliString, PauliSum};
use num_complex::Complex64;
use proptest::prelude::*;

fn letters(len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('I'), Just('X'), Just('Y'), Just('Z')], len)
        .prop_map(|v| v.into_iter().collect())
}

fn triple() -> impl Strategy<Value = (String, String, String)> {
    (1usize..=8).prop_flat_map(|l| (letters(l), letters(l), letters(l)))
}

fn small_sum(len: usize) -> impl Strategy<Value = PauliSum> {
    proptest::collection::vec((letters(len), -1.0f64..1.0, -1.0f64..1.0), 1..5).prop_map(move |terms| {
        PauliSum::from_terms(
            len,
            terms.into_iter().map(|(l, re, im)| (Complex64::new(re, im), PauliString::from_letters(&l).unwrap())),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in triple()) {
        let (a, b, c) = (
            PauliString::from_letters(&a).unwrap(),
            PauliString::from_letters(&b).unwrap(),
            PauliString::from_letters(&c).unwrap(),
        );
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn products_stay_in_the_group((a, b, _c) in triple()) {
        let a = PauliString::from_letters(&a).unwrap();
        let b = PauliString::from_letters(&b).unwrap();
        let p = a.multiply(&b).unwrap();
        prop_assert_eq!(p.len(), a.len());
        prop_assert!(p.phase().power() < 4);
        // every string squares to the identity up to its phase squared
        let sq = a.multiply(&a).unwrap();
        prop_assert!(sq.is_identity() && sq.phase().power() == 0);
        prop_assert_eq!(a.commutes_with(&b), b.commutes_with(&a));
    }

    #[test]
    fn sparse_realization_is_a_homomorphism(
        (p, q, v) in (1usize..=6).prop_flat_map(|l| (
            small_sum(l),
            small_sum(l),
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << l),
        ))
    ) {
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let dim = v.len();
        let sp = to_sparse(&p).unwrap();
        let sq = to_sparse(&q).unwrap();
        let spq = to_sparse(&p.mul(&q).unwrap()).unwrap();
        let mut qv = vec![Complex64::new(0.0, 0.0); dim];
        let mut pqv = vec![Complex64::new(0.0, 0.0); dim];
        let mut direct = vec![Complex64::new(0.0, 0.0); dim];
        sq.apply(&v, &mut qv);
        sp.apply(&qv, &mut pqv);
        spq.apply(&v, &mut direct);
        let err = pqv.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12, "deviation {}", err);
    }

    #[test]
    fn frobenius_norm_matches_dense(p in (1usize..=5).prop_flat_map(small_sum)) {
        let d = to_sparse(&p).unwrap().to_dense();
        let dense = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((dense - p.frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn text_format_round_trips(p in (1usize..=6).prop_flat_map(small_sum)) {
        let back = PauliSum::from_text(&p.to_text(), Some(p.len())).unwrap();
        prop_assert!(back.approx_eq(&p, 1e-15));
    }
}
