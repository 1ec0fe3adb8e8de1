use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lcnu_core::blockenc::{encode_decomposition, BlockEncoding, EncodingReport};
use lcnu_core::carleman::{assemble, convergence_study, FineReference, PolynomialModel, SystemJson};
use lcnu_core::circuit::{build_uj, sigma_string_dense, GateCircuit, SigmaString};
use lcnu_core::decompose::{pad_to_power_of_two, term_count_study, AnyDecomposition, SigmaSymbol, Symbol, TermsJson};
use lcnu_core::simverify::{circuit_block, circuit_unitary};
use lcnu_core::tensorcore::{DenseComplexMatrix, SparseComplexMatrix, C64};
use lcnu_core::vqprobe::{log_slope, train, variance_scan, Ansatz, CostKind, VarianceRow};
use serde::{Deserialize, Serialize};

use crate::args::{
    ConvergeArgs, DecomposeArgs, EncodeArgs, LinearizeArgs, SynthesizeArgs, TermcountArgs, TrainArgs, VarscanArgs,
    VerifyArgs,
};
use crate::output::{csv_bytes, read_json, sidecar, Run};

/// A check ran to completion and the result exceeded the tolerance.
#[derive(Debug)]
pub struct VerificationFailed {
    pub max_error: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "verification failed: max_block_error {:e} exceeds tolerance {:e}",
            self.max_error, self.tolerance
        )
    }
}

impl std::error::Error for VerificationFailed {}

fn load_model(path: &Path) -> Result<(SystemJson, PolynomialModel)> {
    let sys: SystemJson = read_json(path, "system")?;
    let model = sys
        .to_model()
        .with_context(|| format!("invalid system {}", path.display()))?;
    Ok((sys, model))
}

fn load_matrix(path: &Path) -> Result<SparseComplexMatrix> {
    read_json(path, "matrix")
}

fn load_terms(path: &Path) -> Result<AnyDecomposition> {
    let json: TermsJson = read_json(path, "terms")?;
    AnyDecomposition::try_from(&json).with_context(|| format!("invalid terms {}", path.display()))
}

fn finite_positive(value: f64, field: &str) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        bail!("field '{field}': must be positive and finite, got {value}");
    }
    Ok(())
}

pub fn linearize(a: &LinearizeArgs) -> Result<()> {
    if !a.time.is_finite() {
        bail!("field 'time': must be finite");
    }
    let (_, model) = load_model(&a.system)?;
    let order = a.order as usize;
    let sys = assemble(&model.at(a.time), order).context("assembling Carleman matrix")?;
    let mut run = Run::new("linearize", a, vec![a.system.clone()], None)?;
    run.write_json(&a.out, sys.matrix())?;
    if sys.forcing().iter().any(|f| *f != C64::default()) {
        let forcing = SparseComplexMatrix::column(sys.forcing());
        run.write_json(&sidecar(&a.out, "forcing.json"), &forcing)?;
    }
    run.finish()?;
    println!("order {order}: D = {}, nnz = {}", sys.dimension(), sys.nnz());
    Ok(())
}

#[derive(Serialize)]
struct ConvergeCsvRow {
    #[serde(rename = "N")]
    order: usize,
    #[serde(rename = "D")]
    dimension: usize,
    nnz: usize,
    max_error: f64,
    runtime_ms: f64,
}

pub fn converge(a: &ConvergeArgs) -> Result<()> {
    finite_positive(a.dt, "dt")?;
    let (sys, model) = load_model(&a.system)?;
    let phi0 = sys
        .initial_state()
        .ok_or_else(|| anyhow!("field 'phi0': required by converge"))?;
    let reference = FineReference {
        model: &model,
        phi0: &phi0,
        refinement: a.refinement as usize,
    };
    let rows = convergence_study(&model, &phi0, &reference, &a.orders.0, (a.tspan.0, a.tspan.1), a.dt)
        .context("convergence study")?;
    for r in rows.iter().filter(|r| r.diverged_at.is_some()) {
        eprintln!(
            "order {} diverged at t = {}",
            r.order,
            r.diverged_at.unwrap_or(f64::NAN)
        );
    }
    let csv: Vec<ConvergeCsvRow> = rows
        .iter()
        .map(|r| ConvergeCsvRow {
            order: r.order,
            dimension: r.dimension,
            nnz: r.nnz,
            max_error: r.max_error,
            runtime_ms: r.runtime_ms,
        })
        .collect();
    let mut run = Run::new("converge", a, vec![a.system.clone()], None)?;
    run.write_csv(&a.out, &csv)?;
    run.finish()
}

pub fn decompose(a: &DecomposeArgs) -> Result<()> {
    let m = pad_to_power_of_two(&load_matrix(&a.matrix)?).context("field 'matrix'")?;
    let d = AnyDecomposition::decompose(&m, a.basis, a.merge).context("decomposition")?;
    let mut run = Run::new("decompose", a, vec![a.matrix.clone()], None)?;
    run.write_json(&a.out, &d)?;
    run.finish()?;
    println!("{} {} terms on {} qubits", d.len(), a.basis.as_str(), d.qubits());
    Ok(())
}

pub fn termcount(a: &TermcountArgs) -> Result<()> {
    let mut inputs: Vec<(String, SparseComplexMatrix)> = Vec::new();
    for path in &a.matrices {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        inputs.push((label, load_matrix(path)?));
    }
    if let (Some(system), Some(orders)) = (&a.system, &a.orders) {
        let (_, model) = load_model(system)?;
        for &order in &orders.0 {
            let sys = assemble(&model.at(1.0), order).context("assembling Carleman matrix")?;
            inputs.push((format!("N={order}"), sys.matrix().clone()));
        }
    }
    let rows = term_count_study(&inputs).context("term counts")?;
    let mut paths = a.matrices.clone();
    paths.extend(a.system.clone());
    match &a.out {
        Some(out) => {
            let mut run = Run::new("termcount", a, paths, None)?;
            run.write_csv(out, &rows)?;
            run.finish()
        }
        None => {
            print!("{}", String::from_utf8(csv_bytes(&rows)?)?);
            Ok(())
        }
    }
}

/// One synthesized unitary completion.
#[derive(Debug, Serialize, Deserialize)]
pub struct TermCircuit {
    pub string: String,
    pub coeff: (f64, f64),
    pub circuit: GateCircuit,
}

/// Output of `synthesize`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CircuitsFile {
    pub n: usize,
    pub circuits: Vec<TermCircuit>,
}

fn sigma_terms(d: &AnyDecomposition, field: &str) -> Result<Vec<(String, C64, SigmaString)>> {
    let AnyDecomposition::Sigma(s) = d else {
        bail!("field '{field}': expected sigma basis, found {}", d.basis().as_str());
    };
    s.terms()
        .iter()
        .map(|t| Ok((t.label(), t.coeff, SigmaString::try_from(t)?)))
        .collect()
}

pub fn synthesize(a: &SynthesizeArgs) -> Result<()> {
    let d = load_terms(&a.terms)?;
    let circuits = sigma_terms(&d, "basis")?
        .into_iter()
        .map(|(string, coeff, s)| TermCircuit {
            string,
            coeff: (coeff.re, coeff.im),
            circuit: build_uj(&s),
        })
        .collect::<Vec<_>>();
    let file = CircuitsFile {
        n: d.qubits(),
        circuits,
    };
    let mut run = Run::new("synthesize", a, vec![a.terms.clone()], None)?;
    run.write_json(&a.out, &file)?;
    run.finish()?;
    println!("{} circuits", file.circuits.len());
    Ok(())
}

fn print_report(report: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

pub fn encode(a: &EncodeArgs) -> Result<()> {
    let (d, target, inputs) = match (&a.matrix, &a.terms) {
        (Some(path), _) => {
            let basis = a
                .basis
                .ok_or_else(|| anyhow!("field 'basis': required with --matrix"))?;
            let m = pad_to_power_of_two(&load_matrix(path)?).context("field 'matrix'")?;
            let d = AnyDecomposition::decompose(&m, basis, a.merge).context("decomposition")?;
            (d, m, vec![path.clone()])
        }
        (None, Some(path)) => {
            let d = load_terms(path)?;
            if a.basis.is_some_and(|b| b != d.basis()) {
                bail!("field 'basis': terms file is {}", d.basis().as_str());
            }
            let m = d.reconstruct();
            (d, m, vec![path.clone()])
        }
        (None, None) => bail!("one of --matrix or --terms is required"),
    };
    if d.is_empty() {
        bail!("field 'matrix': zero matrix has no block encoding");
    }
    let enc = encode_decomposition(&d).context("encoding")?;
    let mut run = Run::new("encode", a, inputs, None)?;
    run.write_json(&a.out, &enc)?;
    let mut failure = None;
    if a.verify {
        let report = enc.verify(&target).context("simulating encoding")?;
        if let Some(path) = &a.report {
            run.write_json(path, &report)?;
        }
        print_report(&report)?;
        failure = check(&report, a.tol);
    } else {
        println!(
            "lambda {} on {} qubits, {} gates",
            enc.lambda,
            enc.qubits,
            enc.circuit.len()
        );
    }
    run.finish()?;
    failure.map_or(Ok(()), |f| Err(f.into()))
}

fn check(report: &EncodingReport, tol: f64) -> Option<VerificationFailed> {
    (report.max_block_error.is_nan() || report.max_block_error >= tol).then_some(VerificationFailed {
        max_error: report.max_block_error,
        tolerance: tol,
    })
}

#[derive(Debug, Serialize)]
struct TermCheck {
    string: String,
    max_block_error: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    kind: &'static str,
    checked: usize,
    max_block_error: f64,
    tolerance: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_expected: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    terms: Vec<TermCheck>,
}

fn simulated_block(c: &GateCircuit, ancillae: &[usize]) -> Result<DenseComplexMatrix> {
    Ok(if ancillae.is_empty() {
        circuit_unitary(c)?
    } else {
        circuit_block(c, ancillae)?
    })
}

fn verify_circuits(file: CircuitsFile, d: &AnyDecomposition, tol: f64) -> Result<VerifyReport> {
    let expected: BTreeMap<String, SigmaString> = sigma_terms(d, "against")?
        .into_iter()
        .map(|(label, _, s)| (label, s))
        .collect();
    let mut found = BTreeMap::new();
    for (i, tc) in file.circuits.iter().enumerate() {
        let s = SigmaSymbol::parse_string(&tc.string)
            .ok_or_else(|| anyhow!("field 'circuits[{i}].string': cannot parse '{}'", tc.string))?;
        let label = SigmaSymbol::format_string(&s);
        let Some(st) = expected.get(&label) else {
            bail!("field 'circuits[{i}].string': '{label}' is not a term of the reference");
        };
        let block =
            simulated_block(&tc.circuit, tc.circuit.ancillae()).with_context(|| format!("simulating circuits[{i}]"))?;
        let h = sigma_string_dense(st);
        if block.shape() != h.shape() {
            bail!(
                "field 'circuits[{i}].circuit': block is {:?}, expected {:?}",
                block.shape(),
                h.shape()
            );
        }
        found.insert(label, block.max_abs_diff(&h));
    }
    if let Some(missing) = expected.keys().find(|k| !found.contains_key(*k)) {
        bail!("field 'circuits': no circuit for term '{missing}'");
    }
    let max = found.values().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        kind: "circuits",
        checked: found.len(),
        max_block_error: max,
        tolerance: tol,
        passed: max < tol,
        lambda: None,
        lambda_expected: None,
        terms: found
            .into_iter()
            .map(|(string, max_block_error)| TermCheck {
                string,
                max_block_error,
            })
            .collect(),
    })
}

fn verify_encoding(enc: BlockEncoding, d: &AnyDecomposition, tol: f64) -> Result<VerifyReport> {
    if enc.basis != d.basis() {
        bail!(
            "field 'basis': encoding is {}, reference terms are {}",
            enc.basis.as_str(),
            d.basis().as_str()
        );
    }
    let h = d.reconstruct();
    if enc.layout.system.len() != d.qubits() {
        bail!(
            "field 'layout.system': {} qubits, reference has {}",
            enc.layout.system.len(),
            d.qubits()
        );
    }
    let report = enc.verify(&h).context("simulating encoding")?;
    let expected = d.one_norm();
    let lambda_gap = (enc.lambda - expected).abs() / expected.max(1.0);
    let max = report.max_block_error.max(lambda_gap);
    Ok(VerifyReport {
        kind: "encoding",
        checked: 1,
        max_block_error: max,
        tolerance: tol,
        passed: max < tol,
        lambda: Some(enc.lambda),
        lambda_expected: Some(expected),
        terms: Vec::new(),
    })
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    finite_positive(a.tol, "tol")?;
    let d = load_terms(&a.against)?;
    let raw: serde_json::Value = read_json(&a.circuits, "circuits")?;
    let report = if raw.get("layout").is_some() {
        let enc: BlockEncoding = serde_json::from_value(raw).context("invalid encoding")?;
        verify_encoding(enc, &d, a.tol)?
    } else {
        let file: CircuitsFile = serde_json::from_value(raw).context("invalid circuits file")?;
        verify_circuits(file, &d, a.tol)?
    };
    let mut run = Run::new("verify", a, vec![a.circuits.clone(), a.against.clone()], None)?;
    run.write_json(&a.report, &report)?;
    run.finish()?;
    print_report(&report)?;
    if !report.passed {
        return Err(VerificationFailed {
            max_error: report.max_block_error,
            tolerance: a.tol,
        }
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    cost: f64,
}

pub fn probe_train(a: &TrainArgs) -> Result<()> {
    let ansatz = Ansatz::hardware_efficient(a.qubits as usize, a.layers as usize)?;
    let trace = train(&ansatz, a.cost, a.lr, a.iters as usize, a.seed)?;
    let rows: Vec<TraceRow> = trace
        .costs
        .iter()
        .enumerate()
        .map(|(iter, &cost)| TraceRow { iter, cost })
        .collect();
    let mut run = Run::new("probe train", a, Vec::new(), Some(a.seed))?;
    run.write_csv(&a.out, &rows)?;
    run.finish()?;
    println!(
        "{} cost {:.6} -> {:.6}",
        a.cost.as_str(),
        trace.costs[0],
        trace.costs[trace.costs.len() - 1]
    );
    Ok(())
}

#[derive(Serialize)]
struct VarianceCsvRow {
    n: usize,
    kind: CostKind,
    variance: f64,
}

pub fn probe_varscan(a: &VarscanArgs) -> Result<()> {
    let counts: Vec<usize> = a.qubits.iter().map(|&q| q as usize).collect();
    let rows = variance_scan(&counts, a.layers as usize, a.samples as usize, a.seed)?;
    let csv: Vec<VarianceCsvRow> = rows
        .iter()
        .map(|r| VarianceCsvRow {
            n: r.n,
            kind: r.kind,
            variance: r.variance,
        })
        .collect();
    let mut run = Run::new("probe varscan", a, Vec::new(), Some(a.seed))?;
    run.write_csv(&a.out, &csv)?;
    run.finish()?;
    for kind in [CostKind::Global, CostKind::Local] {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r: &&VarianceRow| r.kind == kind)
            .map(|r| (r.n as f64, r.variance))
            .collect();
        if let Ok(slope) = log_slope(&pts) {
            println!("{} slope of ln Var vs n: {slope:.4}", kind.as_str());
        }
    }
    Ok(())
}
