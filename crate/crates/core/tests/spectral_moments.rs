use dee::random::random_sparse_symmetric;
use dee::spectral::{eig_sym, induced_measure, SpectralMeasure};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_equal_diagonal_powers(seed in any::<u64>(), n in 2usize..24, m in 1u32..16) {
        let a = random_sparse_symmetric(n, 4, seed).unwrap();
        let e = eig_sym(&a.to_dense()).unwrap();
        for j in 0..n {
            let mut ej = vec![0.0; n];
            ej[j] = 1.0;
            let mu = induced_measure(&e, &ej, e.default_merge_tol()).unwrap();
            prop_assert!((mu.total_weight() - 1.0).abs() < 1e-12);
            let want = a.power_diag_exact(j, m).unwrap();
            prop_assert!((mu.moment(m) - want).abs() <= 1e-8 * want.abs().max(1.0));
        }
    }

    #[test]
    fn reconstruction_recovers_matrix(seed in any::<u64>()) {
        let a = random_sparse_symmetric(12, 3, seed).unwrap().to_dense();
        let e = eig_sym(&a).unwrap();
        prop_assert!((e.reconstruct_with(|l| l) - &a).amax() < 1e-12);
        for w in e.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn mixing_is_linear_in_moments(t in 0.0f64..1.0, m in 1u32..10) {
        let p = SpectralMeasure::new(vec![(0.9, 0.25), (-0.2, 0.75)]).unwrap();
        let q = SpectralMeasure::new(vec![(0.5, 0.5), (-0.8, 0.5)]).unwrap();
        let mix = p.mix(&q, t, 1e-12).unwrap();
        let want = (1.0 - t) * p.moment(m) + t * q.moment(m);
        prop_assert!((mix.moment(m) - want).abs() < 1e-14);
    }
}

#[test]
fn degenerate_eigenvalues_merge() {
    let a = dee::sparse::SparseSymmetricMatrix::identity(4).unwrap();
    let e = eig_sym(&a.to_dense()).unwrap();
    let mu = induced_measure(&e, &[0.5, 0.5, 0.5, 0.5], e.default_merge_tol()).unwrap();
    assert_eq!(mu.len(), 1);
    assert!((mu.atoms()[0].1 - 1.0).abs() < 1e-15);
}

#[test]
fn csv_has_header() {
    let mu = SpectralMeasure::new(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
    assert_eq!(mu.to_csv(), "eigenvalue,weight\n1,0.5\n-1,0.5\n");
}
