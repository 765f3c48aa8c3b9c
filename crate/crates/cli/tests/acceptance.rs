//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;
use std::time::Instant;

use dee::circuit::{accept_probability, build_mirror_circuit, Circuit, Gate};
use dee::gateset::{fuse_uniform_scale, reduce_integer, rewrite_to_th, sequence_matrix};
use dee::hardness::{moment_separation, reduce, symmetric_overlap, verify_induced_measure, ClockOperator};
use dee::qpe::{
    choose_params, derive_seed, eigenphase, eigenstate_expected_power, estimate_diag, mass_within,
    perturbation_shift, qpe_distribution_analytic, qpe_statevector, EstimatorBackend,
};
use dee::random::{random_real_circuit, random_sparse_symmetric, random_th_circuit};
use dee::sparse::{DeeInstance, SparseSymmetricMatrix};
use dee::spectral::{eig_sym, induced_measure};
use nalgebra::DMatrix;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn dense_power(a: &DMatrix<f64>, m: u32) -> DMatrix<f64> {
    (0..m).fold(DMatrix::identity(a.nrows(), a.ncols()), |p, _| p * a)
}

/// 50 matrices with `N <= 64` and at most 8 nonzeros per row.
fn corpus() -> Vec<SparseSymmetricMatrix> {
    (0..50u64)
        .map(|t| {
            let n = 4 + (t as usize * 13) % 61;
            let per_row = 1 + (t as usize % 6);
            // symmetrizing can push a row past the cap, so redraw until it fits
            (0..)
                .map(|r| random_sparse_symmetric(n, per_row, 7000 + 1000 * r + t).unwrap())
                .find(|a| a.max_row_nnz() <= 8)
                .unwrap()
        })
        .collect()
}

fn normalized(seed: u64, n: usize) -> DMatrix<f64> {
    let a = random_sparse_symmetric(n, 3, seed).unwrap();
    a.to_dense() / a.norm_bound()
}

// Relative error is measured against max(|value|, ||A||^m): diagonal entries
// of odd powers can cancel to nearly zero, and no floating-point method is
// accurate relative to a cancelled result.
fn rel_err(got: f64, want: f64, rho_m: f64) -> f64 {
    (got - want).abs() / want.abs().max(rho_m).max(f64::MIN_POSITIVE)
}

fn c1_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mats = corpus();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (t, a) in mats.iter().enumerate() {
        let dense = a.to_dense();
        let rho = eig_sym(&dense).unwrap().spectral_radius();
        for m in [1 + (t as u32 % 20), 20] {
            let p = dense_power(&dense, m);
            for j in 0..a.dim() {
                let got = a.power_diag_exact(j, m).unwrap();
                worst = worst.max(rel_err(got, p[(j, j)], rho.powi(m as i32)));
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mats.len() == 50 && worst <= 1e-9 && secs < 10.0,
        format!("{} matrices, {count} entries, worst rel err {worst:.2e}, {secs:.2}s", mats.len()),
    )
}

fn c2_moment_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    for (t, a) in corpus().iter().enumerate() {
        let e = eig_sym(&a.to_dense()).unwrap();
        let rho = e.spectral_radius();
        let m = 1 + (t as u32 % 20);
        for j in 0..a.dim() {
            let mut ej = vec![0.0; a.dim()];
            ej[j] = 1.0;
            let mu = induced_measure(&e, &ej, e.default_merge_tol()).unwrap();
            let want = a.power_diag_exact(j, m).unwrap();
            worst = worst.max(rel_err(mu.moment(m), want, rho.powi(m as i32)));
        }
    }
    verdict(worst <= 1e-8, format!("worst rel err {worst:.2e}"))
}

fn c3_qpe_contract() -> Verdict {
    let budgets = [(1, 1.0), (2, 0.5), (4, 0.25), (8, 0.1)];
    let mut worst_slack = f64::INFINITY;
    let mut atoms = 0;
    for seed in 0..20u64 {
        let a = normalized(100 + seed, 2 + (seed as usize % 15));
        let e = eig_sym(&a).unwrap();
        for &(m, eps) in &budgets {
            let params = choose_params(m, eps, 0.01).unwrap();
            for &l in &e.eigenvalues {
                let mass = mass_within(eigenphase(l), params.p, params.eta);
                worst_slack = worst_slack.min(mass - (1.0 - params.theta));
                atoms += 1;
            }
        }
    }
    verdict(worst_slack > 0.0, format!("{atoms} atom checks, min mass - (1 - theta) = {worst_slack:.3e}"))
}

fn c4_backend_cross_validation() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for seed in 0..10u64 {
        for n in [2usize, 3, 4, 6, 8] {
            let a = normalized(200 + seed, n);
            let e = eig_sym(&a).unwrap();
            let mut psi: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * (seed + 2) as f64).sin()).collect();
            let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|x| *x /= norm);
            let mu = induced_measure(&e, &psi, e.default_merge_tol()).unwrap();
            for p in [1, 3, 5, 8] {
                let sv = qpe_statevector(&a, &psi, p, 22).unwrap();
                let an = qpe_distribution_analytic(&mu, p).unwrap();
                let tv = 0.5 * sv.iter().zip(&an).map(|(x, y)| (x - y).abs()).sum::<f64>();
                worst = worst.max(tv);
                runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst < 1e-6 && secs < 60.0, format!("{runs} runs, worst TV {worst:.2e}, {secs:.2}s"))
}

fn c5_eigenstate_moment_bound() -> Verdict {
    let mut eigenvalues = vec![1.0, -1.0, 0.0, 0.5, -0.5];
    for seed in 0..6u64 {
        eigenvalues.extend(eig_sym(&normalized(300 + seed, 6)).unwrap().eigenvalues);
    }
    let mut worst_ratio: f64 = 0.0;
    for m in 1..=8u32 {
        let params = choose_params(m, 1.0, 0.01).unwrap();
        let bound = 2.0 * params.theta + 2.0 * std::f64::consts::PI * f64::from(m) * params.eta;
        for &l in &eigenvalues {
            let e = eigenstate_expected_power(l, params.p, m).unwrap();
            worst_ratio = worst_ratio.max((e - l.powi(m as i32)).abs() / bound);
        }
    }
    verdict(
        worst_ratio <= 1.0,
        format!("{} atoms, m = 1..8, worst |E - lambda^m| / bound = {worst_ratio:.3e}", eigenvalues.len()),
    )
}

fn c6_end_to_end() -> Verdict {
    let start = Instant::now();
    let eps = 0.25;
    let mut ok = 0;
    for t in 0..100u64 {
        let n = 2 + (t as usize % 15);
        let m = 1 + (t as u32 % 6);
        let a = random_sparse_symmetric(n, 3, 400 + t).unwrap();
        let b = a.norm_bound();
        let inst = DeeInstance::new(a, t as usize % n, m, 0.0, eps, b).unwrap();
        let params = choose_params(m, eps, 0.01).unwrap();
        let d = estimate_diag(&inst, &params, EstimatorBackend::AnalyticSpectral, derive_seed(t, 6))
            .unwrap();
        if (d.estimate - inst.exact_value().unwrap()).abs() <= inst.gap() {
            ok += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(ok >= 97, format!("{ok}/100 within eps b^m, {secs:.1}s"))
}

fn c7_perturbation() -> Verdict {
    let p = 8;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for delta in [1e-2, 1e-3, 1e-4] {
        for s in 0..20u64 {
            let n = 2 + (s as usize % 7);
            let a = normalized(500 + s, n);
            let mut psi = vec![0.0; n];
            psi[s as usize % n] = 1.0;
            let r = perturbation_shift(&a, &psi, p, 1 + (s as u32 % 4), delta, s).unwrap();
            if !r.within_bound() || r.distance > delta {
                violations += 1;
            }
            worst_ratio = worst_ratio.max(r.shift() / r.bound);
        }
    }
    verdict(violations == 0, format!("60 runs at p = {p}, {violations} violations, worst shift/bound {worst_ratio:.2e}"))
}

const ALPHAS: [f64; 5] = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];

fn rotation_family(alpha1_sq: f64, k: usize) -> Circuit {
    let angle = alpha1_sq.sqrt().asin();
    let mut gates = vec![Gate::Rotation { qubit: 0, angle }];
    while gates.len() < k {
        gates.push(Gate::PauliX(1));
    }
    Circuit::new(2, gates).unwrap()
}

fn c8_overlap_identity() -> Verdict {
    let mut circuits: Vec<Circuit> = ALPHAS.iter().map(|&a| rotation_family(a, 2)).collect();
    circuits.extend((0..8).map(|s| random_real_circuit(3, 4, 800 + s).unwrap()));
    let mut worst: f64 = 0.0;
    for y in &circuits {
        let x = [false, false];
        let clock = ClockOperator::from_circuit(y).unwrap();
        let sum = symmetric_overlap(&clock, &x).unwrap() + accept_probability(y, &x, y.n_qubits() - 2).unwrap();
        worst = worst.max((sum - 1.0).abs());
    }
    verdict(worst <= 1e-10, format!("{} circuits, worst |overlap + accept - 1| = {worst:.2e}", circuits.len()))
}

fn c9_measure_equality() -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 1..=4 {
        for &alpha in &ALPHAS {
            let clock = ClockOperator::from_circuit(&rotation_family(alpha, k)).unwrap();
            if verify_induced_measure(&clock, &[false, false]).is_err() {
                failures.push(format!("M={} a={alpha:.3}", clock.period()));
            }
            checked += 1;
        }
    }
    verdict(failures.is_empty(), format!("M in {{3, 5, 7, 9}}, {checked} measures, mismatches {failures:?}"))
}

fn c10_moment_formula() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut separated = true;
    let mut e0_ok = true;
    for k in 1..=5 {
        for &alpha in &ALPHAS {
            let inst = reduce(&rotation_family(alpha, k), &[false, false]).unwrap();
            let exact = inst.dee.exact_value().unwrap();
            worst = worst.max((exact - inst.predicted_value().unwrap()).abs());
            if inst.period >= 7 {
                let t = 0.25 / inst.period as f64;
                if (alpha == 1.0 / 3.0 && exact <= t) || (alpha == 2.0 / 3.0 && exact >= -t) {
                    separated = false;
                }
            }
        }
    }
    let mut e0s = Vec::new();
    for period in [7usize, 9, 11] {
        match moment_separation(period, period.pow(3) as u32) {
            Ok(s) => {
                e0_ok &= s.threshold_holds();
                e0s.push(format!("E0({period})={:.6}", s.e0));
            }
            Err(_) => e0_ok = false,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && e0_ok && separated && secs < 60.0,
        format!("worst |exact - (1-2a)E0| {worst:.2e}, {}, separated {separated}, {secs:.2}s", e0s.join(" ")),
    )
}

fn toffoli_family() -> Vec<(Circuit, f64)> {
    let toff = Gate::Toffoli { c1: 1, c2: 2, target: 0 };
    let mixed = vec![Gate::Hadamard(1), Gate::Hadamard(2), toff];
    let mut flipped = mixed.clone();
    flipped.push(Gate::PauliX(0));
    vec![
        (Circuit::new(3, vec![Gate::PauliX(1)]).unwrap(), 0.0),
        (Circuit::new(3, mixed).unwrap(), 0.25),
        (Circuit::new(3, flipped).unwrap(), 0.75),
        (Circuit::new(3, vec![Gate::PauliX(0)]).unwrap(), 1.0),
    ]
}

fn c11_gate_set() -> Verdict {
    let mut entries_ok = true;
    let mut worst_product: f64 = 0.0;
    let mut separated = 0;
    for (y, alpha) in toffoli_family() {
        let inst = reduce_integer(&y, &[false]).unwrap();
        entries_ok &= inst
            .observable
            .matrix
            .upper_triangle()
            .all(|(_, _, v)| v == 1.0 || v == -1.0);
        let u = build_mirror_circuit(&y);
        let fused = fuse_uniform_scale(&rewrite_to_th(&u).unwrap()).unwrap();
        worst_product = worst_product.max((sequence_matrix(&fused, 3) - u.matrix()).amax());
        let exact = inst.dee.exact_value().unwrap();
        let (g, gap) = (inst.dee.g(), inst.dee.gap());
        let ok = if alpha <= 1.0 / 3.0 { exact >= g + gap } else { exact <= g - gap };
        separated += usize::from(ok && (inst.alpha1_sq - alpha).abs() < 1e-12);
    }
    for s in 0..20 {
        let c = random_th_circuit(3, 10, 1100 + s).unwrap();
        let fused = fuse_uniform_scale(&rewrite_to_th(&c).unwrap()).unwrap();
        worst_product = worst_product.max((sequence_matrix(&fused, 3) - c.matrix()).amax());
        for e in &fused {
            entries_ok &= e.matrix(3).iter().all(|&v| v == 0.0 || v.abs() == FRAC_1_SQRT_2);
        }
    }
    verdict(
        entries_ok && worst_product <= 1e-12 && separated >= 3,
        format!("entries in {{-1,0,1}}: {entries_ok}, worst product err {worst_product:.2e}, {separated}/4 circuits separated"),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = random_sparse_symmetric(12, 3, 1200).unwrap();
    let matrix = write(d, "a.mtx", &a.to_file_string());
    let graph = write(d, "c4.graph", "4 4\n0 1\n1 2\n2 3\n3 0\n");
    let angle = (1.0f64 / 3.0).sqrt().asin();
    let circuit = write(d, "y.circ", &format!("QUBITS 2\nROT 0 {angle}\nX 1\n"));
    let commands: Vec<Vec<String>> = vec![
        vec!["estimate", "--matrix", &matrix, "--j", "3", "--m", "4", "--epsilon", "0.25", "--g", "0", "--seed", "9"],
        vec!["estimate", "--matrix", &matrix, "--i", "1", "--j", "3", "--m", "2", "--epsilon", "0.5", "--g", "0", "--seed", "9"],
        vec!["estimate", "--matrix", &matrix, "--j", "0", "--m", "1", "--epsilon", "1", "--g", "0", "--backend", "statevector"],
        vec!["exact", "--matrix", &matrix, "--j", "2", "--m", "5"],
        vec!["paths", "--graph", &graph, "--j", "0", "--m", "4", "--seed", "3"],
        vec!["reduce", "--circuit", &circuit, "--input", "0"],
        vec!["verify-bounds", "--seed", "5", "--trials", "4"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let mut identical = 0;
    for cmd in &commands {
        let outs: Vec<_> = [None, Some("1"), Some("3"), Some("8")]
            .iter()
            .map(|threads| {
                let mut args = vec!["dee".to_string()];
                args.extend(cmd.iter().cloned());
                if let Some(t) = threads {
                    args.extend(["--threads".to_string(), t.to_string()]);
                }
                dee_cli::run(args)
            })
            .collect();
        if outs[0].code == 0 && outs.iter().all(|o| o == &outs[0]) {
            identical += 1;
        }
    }
    verdict(
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across 1, 3, 8 and default workers", commands.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("moment identity", c2_moment_identity),
        ("phase-estimation contract", c3_qpe_contract),
        ("backend cross-validation", c4_backend_cross_validation),
        ("per-eigenstate moment bound", c5_eigenstate_moment_bound),
        ("end-to-end estimator", c6_end_to_end),
        ("perturbation propagation", c7_perturbation),
        ("overlap identity", c8_overlap_identity),
        ("measure equality", c9_measure_equality),
        ("moment formula and thresholds", c10_moment_formula),
        ("integer gate set", c11_gate_set),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!(
            "criterion {:>2} {:<30} {}  {}",
            k + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
