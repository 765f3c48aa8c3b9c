use std::f64::consts::PI;

use dee::qpe::{
    choose_params, eigenphase, eigenstate_expected_power, estimate_diag, estimate_offdiag,
    mass_within, perturbation_shift, qpe_distribution_analytic, qpe_statevector,
    EstimatorBackend, DEFAULT_QUBIT_CAP,
};
use dee::random::random_sparse_symmetric;
use dee::sparse::{DeeInstance, SparseSymmetricMatrix};
use dee::spectral::{eig_sym, induced_measure};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn normalized(seed: u64, n: usize) -> DMatrix<f64> {
    let a = random_sparse_symmetric(n, 3, seed).unwrap();
    a.to_dense() / a.norm_bound()
}

fn total_variation(x: &[f64], y: &[f64]) -> f64 {
    0.5 * x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[test]
fn budget_examples() {
    assert_eq!(choose_params(8, 0.1, 0.1).unwrap().p, 24);
    let p = choose_params(1, 1.0, 0.1).unwrap();
    assert_eq!(p.p, 12);
    assert!((p.theta - 1.0 / 13.0).abs() < 1e-15);
    assert!((p.eta - 1.0 / (13.0 * PI)).abs() < 1e-15);
    assert_eq!(choose_params(3, 0.3, 0.01).unwrap().k, 1060);
}

#[test]
fn every_atom_meets_phase_contract() {
    for (m, eps) in [(1, 1.0), (2, 0.5), (4, 0.25), (8, 0.1)] {
        let params = choose_params(m, eps, 0.01).unwrap();
        for seed in 0..5 {
            let a = normalized(seed, 8);
            for &l in &eig_sym(&a).unwrap().eigenvalues {
                let mass = mass_within(eigenphase(l), params.p, params.eta);
                assert!(mass > 1.0 - params.theta, "m={m} lambda={l} mass={mass}");
            }
        }
    }
}

#[test]
fn eigenstate_moments_within_bias_bound() {
    for (m, eps) in [(1, 1.0), (2, 0.5), (3, 0.5)] {
        let params = choose_params(m, eps, 0.01).unwrap();
        let bound = params.moment_error_bound();
        assert!(bound < eps / 3.0);
        for &l in &[1.0, -1.0, 0.0, 0.5, -0.731, 0.999, 1e-3] {
            let e = eigenstate_expected_power(l, params.p, m).unwrap();
            assert!((e - l.powi(m as i32)).abs() <= bound, "m={m} l={l}");
        }
    }
}

#[test]
fn backends_agree() {
    for seed in 0..6 {
        for n in [2, 4, 8] {
            let a = normalized(seed, n);
            let mut psi = vec![0.0; n];
            psi[seed as usize % n] = 1.0;
            let e = eig_sym(&a).unwrap();
            let mu = induced_measure(&e, &psi, e.default_merge_tol()).unwrap();
            for p in [4, 8] {
                let sv = qpe_statevector(&a, &psi, p, DEFAULT_QUBIT_CAP).unwrap();
                let an = qpe_distribution_analytic(&mu, p).unwrap();
                assert!((an.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(total_variation(&sv, &an) < 1e-6, "seed={seed} n={n} p={p}");
            }
        }
    }
}

#[test]
fn perturbations_stay_within_bound() {
    let a = normalized(3, 4);
    let psi = [1.0, 0.0, 0.0, 0.0];
    for delta in [1e-2, 1e-3, 1e-4] {
        for seed in 0..20 {
            let r = perturbation_shift(&a, &psi, 6, 3, delta, seed).unwrap();
            assert!(r.distance <= delta);
            assert!(r.within_bound(), "delta={delta} seed={seed} {r:?}");
        }
    }
}

#[test]
fn diagonal_estimates_near_exact() {
    let a = SparseSymmetricMatrix::diagonal(&[1.0, -1.0]).unwrap();
    let inst = DeeInstance::new(a, 0, 2, 0.0, 0.25, 1.0).unwrap();
    let params = choose_params(2, 0.25, 0.01).unwrap();
    let d = estimate_diag(&inst, &params, EstimatorBackend::AnalyticSpectral, 3).unwrap();
    assert!((d.estimate - 1.0).abs() <= 0.25);
}

#[test]
fn statistical_accuracy_on_random_matrices() {
    let (m, eps) = (4, 0.25);
    let params = choose_params(m, eps, 0.05).unwrap();
    let mut ok = 0;
    for trial in 0..100u64 {
        let a = random_sparse_symmetric(16, 3, 1000 + trial).unwrap();
        let j = (trial % 16) as usize;
        let b = a.norm_bound();
        let inst = DeeInstance::new(a, j, m, 0.0, eps, b).unwrap();
        let d = estimate_diag(&inst, &params, EstimatorBackend::AnalyticSpectral, trial).unwrap();
        if (d.estimate - inst.exact_value().unwrap()).abs() <= inst.gap() {
            ok += 1;
        }
    }
    assert!(ok >= 95, "{ok} of 100");
}

#[test]
fn offdiagonal_estimates() {
    let k3 = SparseSymmetricMatrix::adjacency_from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let params = choose_params(2, 0.25, 0.01).unwrap();
    let b = k3.norm_bound();
    let exact = k3.power_entry_exact(0, 1, 2).unwrap();
    let x = estimate_offdiag(&k3, b, 0, 1, &params, EstimatorBackend::AnalyticSpectral, 8).unwrap();
    let y = estimate_offdiag(&k3, b, 1, 0, &params, EstimatorBackend::AnalyticSpectral, 8).unwrap();
    let tol = 0.25 * b.powi(2);
    assert!((x - exact).abs() <= tol && (y - exact).abs() <= tol);
    assert!((x - y).abs() <= 2.0 * tol);

    let id = SparseSymmetricMatrix::identity(3).unwrap();
    let z = estimate_offdiag(&id, 1.0, 0, 2, &params, EstimatorBackend::AnalyticSpectral, 1).unwrap();
    assert!(z.abs() <= 0.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimates_are_bit_reproducible(seed in any::<u64>()) {
        let a = random_sparse_symmetric(6, 2, seed).unwrap();
        let b = a.norm_bound();
        let inst = DeeInstance::new(a, 0, 2, 0.0, 0.5, b).unwrap();
        let params = choose_params(2, 0.5, 0.1).unwrap();
        for backend in [EstimatorBackend::AnalyticSpectral, EstimatorBackend::statevector()] {
            let x = estimate_diag(&inst, &params, backend, seed).unwrap();
            let y = estimate_diag(&inst, &params, backend, seed).unwrap();
            prop_assert_eq!(x.estimate.to_bits(), y.estimate.to_bits());
            prop_assert_eq!(x.side, y.side);
        }
    }

    #[test]
    fn mixture_moment_is_weighted_eigenstate_moments(seed in any::<u64>(), m in 1u32..6) {
        let a = normalized(seed, 5);
        let e = eig_sym(&a).unwrap();
        let mu = induced_measure(&e, &[0.0, 1.0, 0.0, 0.0, 0.0], e.default_merge_tol()).unwrap();
        let p = 8;
        let dist = qpe_distribution_analytic(&mu, p).unwrap();
        let whole = dee::qpe::expected_power(&dist, p, m).unwrap();
        let parts: f64 = mu
            .atoms()
            .iter()
            .map(|&(l, w)| w * eigenstate_expected_power(l, p, m).unwrap())
            .sum();
        prop_assert!((whole - parts).abs() < 1e-10);
    }
}
