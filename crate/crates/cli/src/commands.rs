use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dee::circuit::{parse_bits, Circuit};
use dee::gateset::reduce_integer;
use dee::hardness::reduce;
use dee::qpe::{
    choose_params, estimate_diag_with_samples, estimate_offdiag, z_power, EstimatorBackend,
    QpeParams, DEFAULT_QUBIT_CAP,
};
use dee::sparse::{DeeDecision, DeeInstance, Side, SparseSymmetricMatrix};
use dee::spectral::{eig_sym, induced_measure};
use sha2::{Digest, Sha256};

use crate::args::{
    BackendArg, Command, EstimateArgs, ExactArgs, FileConfig, PathsArgs, ReduceArgs,
};
use crate::report::fmt_num;
use crate::{check_writable, read_file, CliError, CommandOutput, Report};

/// Largest dimension for which reports include exact oracle values.
const EXACT_REPORT_DIM: usize = 128;
/// Largest dimension for dense spectral cross-checks.
const DENSE_DIM: usize = 1024;

pub(crate) fn dispatch(command: &Command, file: &FileConfig) -> Result<CommandOutput, CliError> {
    match command {
        Command::Estimate(a) => estimate(a, file),
        Command::Exact(a) => exact(a, file),
        Command::Reduce(a) => reduce_cmd(a, file),
        Command::VerifyBounds(a) => crate::verify::verify_bounds(a, file),
        Command::Paths(a) => paths(a, file),
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{name}")))
}

fn output_path(flag: &Option<PathBuf>, file: &Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    let p = flag.clone().or_else(|| file.clone());
    if let Some(p) = &p {
        check_writable(p)?;
    }
    Ok(p)
}

fn load_matrix(path: &Path) -> Result<SparseSymmetricMatrix, CliError> {
    SparseSymmetricMatrix::parse(&read_file(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_graph(path: &Path) -> Result<SparseSymmetricMatrix, CliError> {
    SparseSymmetricMatrix::parse_graph(&read_file(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    Circuit::parse(&read_file(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn backend(choice: BackendArg, cap: Option<u32>) -> EstimatorBackend {
    match choice {
        BackendArg::Analytic => EstimatorBackend::AnalyticSpectral,
        BackendArg::Statevector => EstimatorBackend::Statevector {
            qubit_cap: cap.unwrap_or(DEFAULT_QUBIT_CAP),
        },
    }
}

/// SHA-256 over the matrix file text and the instance parameters.
fn instance_hash(matrix: &SparseSymmetricMatrix, fields: &[(&str, String)]) -> String {
    let mut h = Sha256::new();
    h.update(matrix.to_file_string().as_bytes());
    for (k, v) in fields {
        h.update(format!("{k}={v}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

fn push_params(r: &mut Report, p: &QpeParams) {
    r.push("p", p.p);
    r.push_num("eta", p.eta);
    r.push_num("theta", p.theta);
    r.push("k", p.k);
    r.push_num("delta", p.delta);
}

fn push_backend(r: &mut Report, b: EstimatorBackend) {
    r.push("backend", b.name());
    if let EstimatorBackend::Statevector { qubit_cap } = b {
        r.push("qubit_cap", qubit_cap);
    }
}

fn side_name(side: Option<Side>) -> &'static str {
    match side {
        Some(Side::AboveG) => "above",
        Some(Side::BelowG) => "below",
        None => "inside gap",
    }
}

fn estimate(a: &EstimateArgs, f: &FileConfig) -> Result<CommandOutput, CliError> {
    let path = required(a.matrix.clone().or_else(|| f.matrix.clone()), "matrix")?;
    let j = required(a.j.or(f.j), "j")?;
    let i = a.i.or(f.i);
    let m = required(a.m.or(f.m), "m")?;
    let epsilon = required(a.epsilon.or(f.epsilon), "epsilon")?;
    let g = required(a.g.or(f.g), "g")?;
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let fail_prob = a.fail_prob.or(f.fail_prob).unwrap_or(0.01);
    let be = backend(
        a.backend.or(f.backend).unwrap_or(BackendArg::Analytic),
        a.qubit_cap.or(f.qubit_cap),
    );
    let samples_csv = output_path(&a.samples_csv, &f.samples_csv)?;
    let offdiag = i.filter(|&i| i != j);
    if offdiag.is_some() && samples_csv.is_some() {
        return Err(CliError::Usage("--samples-csv applies to diagonal estimates only".into()));
    }

    let matrix = load_matrix(&path)?;
    let b = a.b.or(f.b).unwrap_or_else(|| matrix.norm_bound());
    let instance = DeeInstance::new(matrix, j, m, g, epsilon, b)?;
    if let Some(i) = offdiag {
        if i >= instance.matrix().dim() {
            return Err(dee::Error::IndexOutOfRange {
                index: i,
                dim: instance.matrix().dim(),
            }
            .into());
        }
    }
    let params = choose_params(m, epsilon, fail_prob)?;

    let mut fields = vec![
        ("j", j.to_string()),
        ("m", m.to_string()),
        ("g", fmt_num(g)),
        ("epsilon", fmt_num(epsilon)),
        ("b", fmt_num(b)),
    ];
    if let Some(i) = offdiag {
        fields.push(("i", i.to_string()));
    }
    let mut r = Report::new("estimate");
    r.push("instance_hash", instance_hash(instance.matrix(), &fields));
    r.push("dim", instance.matrix().dim());
    r.push("nnz", instance.matrix().nnz());
    r.push("max_row_nnz", instance.matrix().max_row_nnz());
    if let Some(i) = offdiag {
        r.push("i", i);
    }
    for (k, v) in &fields {
        r.push(k, v);
    }
    r.push_num("fail_prob", fail_prob);
    r.push("seed", seed);
    push_backend(&mut r, be);
    push_params(&mut r, &params);
    r.push_num("error_bound", instance.gap());

    let mut files = Vec::new();
    let (decision, exact) = match offdiag {
        Some(i) => {
            let est = estimate_offdiag(instance.matrix(), b, i, j, &params, be, seed)?;
            let exact = instance.matrix().power_entry_exact(i, j, m)?;
            (DeeDecision::from_estimate(est, g), exact)
        }
        None => {
            let (d, samples) = estimate_diag_with_samples(&instance, &params, be, seed)?;
            if let Some(p) = samples_csv {
                let mut csv = String::from("a,z,z_pow_m\n");
                for s in &samples {
                    let _ = writeln!(csv, "{},{},{}", s.a, s.z, z_power(s.z, m));
                }
                files.push((p, csv));
            }
            (d, instance.exact_value()?)
        }
    };
    r.push_num("estimate", decision.estimate);
    r.push("decision", decision.side);
    if instance.matrix().dim() <= EXACT_REPORT_DIM {
        r.push_num("exact", exact);
        let promised = if exact >= g + instance.gap() {
            Some(Side::AboveG)
        } else if exact <= g - instance.gap() {
            Some(Side::BelowG)
        } else {
            None
        };
        r.push("exact_side", side_name(promised));
        let ok = (decision.estimate - exact).abs() <= instance.gap();
        r.push("within_error_bound", if ok { "yes" } else { "no" });
    }
    Ok(CommandOutput {
        report: r,
        files,
        code: 0,
    })
}

fn exact(a: &ExactArgs, f: &FileConfig) -> Result<CommandOutput, CliError> {
    let path = required(a.matrix.clone().or_else(|| f.matrix.clone()), "matrix")?;
    let j = required(a.j.or(f.j), "j")?;
    let i = a.i.or(f.i).unwrap_or(j);
    let m = required(a.m.or(f.m), "m")?;
    if m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let measure_csv = output_path(&a.measure_csv, &f.measure_csv)?;
    let matrix = load_matrix(&path)?;
    let value = matrix.power_entry_exact(i, j, m)?;

    let mut r = Report::new("exact");
    let fields = [("i", i.to_string()), ("j", j.to_string()), ("m", m.to_string())];
    r.push("instance_hash", instance_hash(&matrix, &fields));
    r.push("dim", matrix.dim());
    r.push("nnz", matrix.nnz());
    r.push_num("norm_bound", matrix.norm_bound());
    for (k, v) in &fields {
        r.push(k, v);
    }
    r.push_num("value", value);

    let mut files = Vec::new();
    if matrix.dim() <= DENSE_DIM {
        let decomp = eig_sym(&matrix.to_dense())?;
        let mut ej = vec![0.0; matrix.dim()];
        ej[j] = 1.0;
        let measure = induced_measure(&decomp, &ej, decomp.default_merge_tol())?;
        if i == j {
            r.push_num("spectral_moment", measure.moment(m));
        }
        r.push_num("spectral_norm", decomp.spectral_radius());
        if let Some(p) = measure_csv {
            files.push((p, measure.to_csv()));
        }
    } else if measure_csv.is_some() {
        return Err(CliError::Usage(format!(
            "spectral measure needs a dense eigendecomposition; dimension {} exceeds {DENSE_DIM}",
            matrix.dim()
        )));
    }
    Ok(CommandOutput {
        report: r,
        files,
        code: 0,
    })
}

fn reduce_cmd(a: &ReduceArgs, f: &FileConfig) -> Result<CommandOutput, CliError> {
    let path = required(a.circuit.clone().or_else(|| f.circuit.clone()), "circuit")?;
    let bits = required(a.input.clone().or_else(|| f.input.clone()), "input")?;
    let integer = a.integer || f.integer.unwrap_or(false);
    let out_matrix = output_path(&a.out_matrix, &f.out_matrix)?;
    let out_meta = output_path(&a.out_meta, &f.out_meta)?;
    let x = parse_bits(&bits)?;
    let y = load_circuit(&path)?;
    if x.len() > y.n_qubits() {
        return Err(CliError::Usage(format!(
            "input has {} bits but the circuit has {} qubits",
            x.len(),
            y.n_qubits()
        )));
    }

    let mut r = Report::new("reduce");
    let mut meta = Report::default();
    let (instance, alpha1_sq, period) = if integer {
        let inst = reduce_integer(&y, &x)?;
        let t = inst.thresholds;
        meta.push("mode", "integer");
        meta.push_num("scale", inst.observable.scale());
        meta.push_num("e0", t.separation.e0);
        meta.push_num("e1", t.separation.e1);
        (inst.dee.clone(), inst.alpha1_sq, inst.period())
    } else {
        let inst = reduce(&y, &x)?;
        let sep = inst.separation()?;
        meta.push("mode", "clock");
        meta.push_num("e0", sep.e0);
        meta.push_num("e1", sep.e1);
        meta.push_num("e0_bound", sep.required());
        meta.push("e0_bound_holds", if sep.threshold_holds() { "yes" } else { "no" });
        (inst.dee.clone(), inst.alpha1_sq, inst.period)
    };
    meta.push("M", period);
    meta.push("m", instance.m());
    meta.push("j_state", instance.j());
    meta.push("dim", instance.matrix().dim());
    meta.push_num("epsilon", instance.epsilon());
    meta.push_num("g", instance.g());
    meta.push_num("b", instance.b());
    meta.push_num("alpha1_sq", alpha1_sq);

    let fields = [
        ("input", bits.clone()),
        ("mode", meta.get("mode").unwrap_or_default().to_string()),
    ];
    r.push("instance_hash", instance_hash(instance.matrix(), &fields));
    r.push("input", &bits);
    r.push("qubits", y.n_qubits());
    r.push("circuit_gates", y.len());
    let meta_text = meta.render();
    for line in meta_text.lines() {
        r.line(line);
    }
    let exact = instance.exact_value()?;
    r.push_num("exact", exact);
    r.push_num("exact_unscaled", exact / instance.scale());
    r.push_num("lower_threshold", instance.g() - instance.gap());
    r.push_num("upper_threshold", instance.g() + instance.gap());
    let promise = match instance.promised_side()? {
        Some(_) => "holds",
        None => "inside gap",
    };
    r.push("promise", promise);
    r.push("verdict", if exact < instance.g() { "accept" } else { "reject" });

    let mut files = Vec::new();
    if let Some(p) = out_matrix {
        files.push((p, instance.matrix().to_file_string()));
    }
    if let Some(p) = out_meta {
        files.push((p, meta_text));
    }
    Ok(CommandOutput {
        report: r,
        files,
        code: 0,
    })
}

fn paths(a: &PathsArgs, f: &FileConfig) -> Result<CommandOutput, CliError> {
    let path = required(a.graph.clone().or_else(|| f.graph.clone()), "graph")?;
    let j = required(a.j.or(f.j), "j")?;
    let m = required(a.m.or(f.m), "m")?;
    let epsilon = a.epsilon.or(f.epsilon).unwrap_or(0.25);
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let fail_prob = a.fail_prob.or(f.fail_prob).unwrap_or(0.01);
    let be = backend(a.backend.or(f.backend).unwrap_or(BackendArg::Analytic), None);
    let graph = load_graph(&path)?;
    let b = graph.norm_bound();
    let instance = DeeInstance::new(graph, j, m, 0.0, epsilon, b)?;
    let params = choose_params(m, epsilon, fail_prob)?;
    let (decision, _) = estimate_diag_with_samples(&instance, &params, be, seed)?;

    let mut r = Report::new("paths");
    let fields = [("j", j.to_string()), ("m", m.to_string()), ("epsilon", fmt_num(epsilon))];
    r.push("instance_hash", instance_hash(instance.matrix(), &fields));
    r.push("vertices", instance.matrix().dim());
    r.push("edges", instance.matrix().nnz() / 2);
    r.push_num("max_degree", b);
    for (k, v) in &fields {
        r.push(k, v);
    }
    r.push_num("fail_prob", fail_prob);
    r.push("seed", seed);
    push_backend(&mut r, be);
    push_params(&mut r, &params);
    r.push_num("closed_walks", instance.exact_value()?);
    r.push_num("estimate", decision.estimate);
    r.push_num("error_bar", instance.gap());
    let ok = (decision.estimate - instance.exact_value()?).abs() <= instance.gap();
    r.push("within_error_bar", if ok { "yes" } else { "no" });
    Ok(CommandOutput {
        report: r,
        files: Vec::new(),
        code: 0,
    })
}
