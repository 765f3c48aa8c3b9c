//! Randomized checks of the estimator's error bounds.

use dee::numeric::pairwise_sum;
use dee::qpe::{
    derive_seed, draw_samples, eigenphase, eigenstate_expected_power, exact_expected_power,
    hoeffding_failure_bound, hoeffding_samples, mass_within, perturbation_shift, z_power,
    EstimatorBackend, OutcomeSampler, PhaseBudget,
};
use dee::random::random_sparse_symmetric;
use dee::spectral::eig_sym;

use crate::args::{FileConfig, VerifyArgs};
use crate::{CliError, CommandOutput, Report, EXIT_CHECK_FAILED};

const MAX_DIM: usize = 16;
const MAX_P: u32 = 10;
/// Register size for the perturbation runs, which need full unitaries.
const PERTURB_P: u32 = 8;
const PERTURB_DIM: usize = 4;
const PERTURBATIONS: u64 = 20;
const HOEFFDING_EPS: f64 = 0.5;
const HOEFFDING_FAIL: f64 = 0.2;
const HOEFFDING_RUNS: u64 = 200;

struct Row {
    name: String,
    bound: f64,
    measured: f64,
}

impl Row {
    fn new(name: impl Into<String>, bound: f64, measured: f64) -> Self {
        Self {
            name: name.into(),
            bound,
            measured,
        }
    }

    fn passed(&self) -> bool {
        self.measured <= self.bound
    }
}

fn dim_for(trial: u64) -> usize {
    2 + (trial as usize * 5) % (MAX_DIM - 1)
}

pub(crate) fn verify_bounds(a: &VerifyArgs, f: &FileConfig) -> Result<CommandOutput, CliError> {
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let trials = a.trials.or(f.trials).unwrap_or(10);
    let p = a.p.or(f.p).unwrap_or(MAX_P);
    let deltas = a
        .delta
        .clone()
        .or_else(|| f.delta.clone())
        .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(4..=MAX_P).contains(&p) {
        return Err(CliError::Usage(format!("--p must lie in 4..={MAX_P}, got {p}")));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d <= 2.0)) {
        return Err(CliError::Usage(format!("--delta values must lie in (0, 2], got {d}")));
    }
    let budget = PhaseBudget::for_control_qubits(p)?;
    let mut rows = Vec::new();

    let matrices = (0..trials as u64)
        .map(|t| random_sparse_symmetric(dim_for(t), 3, derive_seed(seed, t)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut eigenvalues = Vec::new();
    for a in &matrices {
        let dense = a.to_dense() / a.norm_bound();
        eigenvalues.extend(eig_sym(&dense)?.eigenvalues);
    }

    let worst_miss = eigenvalues
        .iter()
        .map(|&l| 1.0 - mass_within(eigenphase(l), p, budget.eta))
        .fold(0.0, f64::max);
    rows.push(Row::new("phase miss probability", budget.theta, worst_miss));

    for m in 1..=4u32 {
        let mut worst: f64 = 0.0;
        for &l in &eigenvalues {
            let e = eigenstate_expected_power(l, p, m)?;
            worst = worst.max((e - l.powi(m as i32)).abs());
        }
        rows.push(Row::new(format!("eigenstate bias m={m}"), budget.moment_error_bound(m), worst));
    }

    let m = 2;
    let mut worst: f64 = 0.0;
    for a in &matrices {
        let b = a.norm_bound();
        for j in 0..a.dim() {
            let mut ej = vec![0.0; a.dim()];
            ej[j] = 1.0;
            let e = exact_expected_power(a, b, &ej, p, m)?;
            let exact = a.power_diag_exact(j, m)? / b.powi(m as i32);
            worst = worst.max((e - exact).abs());
        }
    }
    rows.push(Row::new(format!("diagonal bias m={m}"), budget.moment_error_bound(m), worst));

    let k = hoeffding_samples(HOEFFDING_EPS, HOEFFDING_FAIL);
    let a0 = &matrices[0];
    let b0 = a0.norm_bound();
    let mut e0 = vec![0.0; a0.dim()];
    e0[0] = 1.0;
    let mean = exact_expected_power(a0, b0, &e0, p, m)?;
    let sampler = OutcomeSampler::new(a0, b0, &e0, p, EstimatorBackend::AnalyticSpectral)?;
    let mut misses = 0u64;
    for run in 0..HOEFFDING_RUNS {
        let samples = draw_samples(&sampler, p, k, derive_seed(seed, 1_000_000 + run))?;
        let powers: Vec<f64> = samples.iter().map(|s| z_power(s.z, m)).collect();
        if (pairwise_sum(&powers) / k as f64 - mean).abs() >= HOEFFDING_EPS / 3.0 {
            misses += 1;
        }
    }
    rows.push(Row::new(
        format!("sampling failure k={k}"),
        hoeffding_failure_bound(HOEFFDING_EPS, k),
        misses as f64 / HOEFFDING_RUNS as f64,
    ));

    let pa = random_sparse_symmetric(PERTURB_DIM, 2, derive_seed(seed, 2_000_000))?;
    let dense = pa.to_dense() / pa.norm_bound();
    let mut psi = vec![0.0; PERTURB_DIM];
    psi[0] = 1.0;
    let pp = p.min(PERTURB_P);
    for &delta in &deltas {
        let mut shift: f64 = 0.0;
        let mut distance: f64 = 0.0;
        let mut bound = 0.0;
        for s in 0..PERTURBATIONS {
            let r = perturbation_shift(&dense, &psi, pp, 3, delta, derive_seed(seed, 3_000_000 + s))?;
            shift = shift.max(r.shift());
            distance = distance.max(r.distance);
            bound = r.bound;
        }
        rows.push(Row::new(format!("unitary distance delta={delta:e}"), delta, distance));
        rows.push(Row::new(format!("moment shift delta={delta:e}"), bound, shift));
    }

    let failures = rows.iter().filter(|r| !r.passed()).count();
    let mut report = Report::new("verify-bounds");
    report.push("seed", seed);
    report.push("trials", trials);
    report.push("p", p);
    report.push_num("eta", budget.eta);
    report.push_num("theta", budget.theta);
    report.push("perturbation_p", pp);
    report.line(format!("{:<32} {:>12} {:>12}  status", "check", "bound", "measured"));
    for r in &rows {
        report.line(format!(
            "{:<32} {:>12.5e} {:>12.5e}  {}",
            r.name,
            r.bound,
            r.measured,
            if r.passed() { "pass" } else { "FAIL" }
        ));
    }
    report.push("failures", failures);
    report.push("result", if failures == 0 { "pass" } else { "fail" });
    Ok(CommandOutput {
        report,
        files: Vec::new(),
        code: if failures == 0 { 0 } else { EXIT_CHECK_FAILED },
    })
}
