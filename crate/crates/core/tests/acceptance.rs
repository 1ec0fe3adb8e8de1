//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines reach stdout. Criteria listed in
//! `KNOWN_RED` still print FAIL when they fail but do not change the exit code
//! unless `LCNU_ACCEPTANCE_STRICT=1` is set.

mod common;

use std::time::{Duration, Instant};

use lcnu_core::blockenc::{block_encode, encode_decomposition};
use lcnu_core::carleman::{
    assemble, carleman_dimension, convergence_study, integrate_model, integrate_nonlinear, CoefficientTerm,
    FineReference, PolynomialModel, PolynomialSystem, Reference,
};
use lcnu_core::circuit::{
    build_uj, build_uja, complement_dense, merge_cnx, orthogonal_complement, row_pattern_synthesis, sigma_string_dense,
    unitary_completion, Control, Gate, SigmaString,
};
use lcnu_core::decompose::examples::{a1, a2, a3, hermitian_h};
use lcnu_core::decompose::{
    merge_identity_pairs, pauli_decompose, sigma_decompose, AnyDecomposition, Basis, PauliSymbol, SigmaSymbol, Symbol,
};
use lcnu_core::simverify::{apply, Statevector};
use lcnu_core::tensorcore::{c64, DenseComplexMatrix, SparseComplexMatrix, C64};
use lcnu_core::vqprobe::{evaluate_cost, log_slope, partial_derivative, train, variance_scan, Ansatz, CostKind};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

const KNOWN_RED: &[u32] = &[9];

const COEFF_TOL: f64 = 1e-12;
const RECONSTRUCT_TOL: f64 = 1e-12;
const ACTION_TOL: f64 = 1e-10;
const MERGE_TOL: f64 = 1e-12;
const BLOCK_TOL: f64 = 1e-10;
const LINEAR_TOL: f64 = 1e-8;
const REFERENCE_TOL: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

const SLOPE_RATIO: f64 = 1.5;
const GLOBAL_FLOOR: f64 = 0.9;
const LOCAL_CEILING: f64 = 0.5;

const BUDGET_1: Duration = Duration::from_millis(1);
const BUDGET_3: Duration = Duration::from_secs(10);
const BUDGET_6: Duration = Duration::from_secs(60);
const BUDGET_8: Duration = Duration::from_secs(30);
const BUDGET_9: Duration = Duration::from_secs(600);

const SEED: u64 = 20_240_601;

/// Sub-checks of one criterion; it passes only if all of them do.
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, elapsed: Duration, budget: Duration) {
        self.note(format!("{:.3?} of {:?}", elapsed, budget));
        self.expect(elapsed < budget, format!("runtime {elapsed:.3?} over {budget:?}"));
    }
}

fn re(x: f64) -> C64 {
    c64(x, 0.0)
}

fn rng(offset: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(SEED + offset)
}

fn sigma_strings(len: usize) -> Vec<SigmaString> {
    (0..len)
        .fold(vec![Vec::new()], |acc: Vec<Vec<SigmaSymbol>>, _| {
            acc.iter()
                .flat_map(|p| {
                    SigmaSymbol::all().iter().map(move |&s| {
                        let mut v = p.clone();
                        v.push(s);
                        v
                    })
                })
                .collect()
        })
        .into_iter()
        .map(|v| SigmaString::new(v).expect("non-empty"))
        .collect()
}

fn nonzero_sparse(rng: &mut Xoshiro256PlusPlus, n: usize) -> SparseComplexMatrix {
    loop {
        let density = rng.random_range(0.1..0.7);
        let complex = rng.random_bool(0.5);
        let m = common::random_sparse(rng, n, density, complex);
        if !m.is_zero() {
            return m;
        }
    }
}

fn worked_pauli_example(c: &mut Checks) {
    let h = hermitian_h();
    pauli_decompose(&h).expect("warm-up");
    let start = Instant::now();
    let d = pauli_decompose(&h).expect("4x4 input");
    let elapsed = start.elapsed();
    let expected = [("IZ", 0.5), ("XX", 0.25), ("YY", -0.25), ("ZI", 0.5)];
    let map = d.to_map();
    c.expect(map.len() == expected.len(), format!("{} terms", map.len()));
    for (label, v) in expected {
        let got = map.get(label).copied().unwrap_or_default();
        c.expect((got - re(v)).norm() < COEFF_TOL, format!("{label} = {got}"));
    }
    c.note(format!("terms {:?}", map.keys().collect::<Vec<_>>()));
    c.within(elapsed, BUDGET_1);
}

fn example_matrices(c: &mut Checks) {
    let inputs = [("A1", a1()), ("A2", a2()), ("A3", a3())];
    let mut pauli_counts = Vec::new();
    let mut sigma_counts = Vec::new();
    for (name, m) in &inputs {
        let p = pauli_decompose(m).expect("4x4");
        let s = sigma_decompose(m).expect("4x4");
        pauli_counts.push(p.len());
        sigma_counts.push(s.len());
        c.expect(
            s.len() == m.nnz(),
            format!("{name}: sigma {} vs nnz {}", s.len(), m.nnz()),
        );
        let ep = p.reconstruct().max_abs_diff(m).expect("same shape");
        let es = s.reconstruct().max_abs_diff(m).expect("same shape");
        c.expect(ep < RECONSTRUCT_TOL, format!("{name} pauli reconstruction {ep:e}"));
        c.expect(es < RECONSTRUCT_TOL, format!("{name} sigma reconstruction {es:e}"));
    }
    c.expect(pauli_counts == [4, 12, 16], format!("pauli counts {pauli_counts:?}"));
    c.expect(sigma_counts == [2, 7, 10], format!("sigma counts {sigma_counts:?}"));
    let mut a1_coeffs: Vec<C64> = sigma_decompose(&a1())
        .expect("4x4")
        .terms()
        .iter()
        .map(|t| t.coeff)
        .collect();
    a1_coeffs.sort_by(|x, y| x.re.total_cmp(&y.re));
    c.expect(
        a1_coeffs == [re(2.0), re(7.0)],
        format!("A1 sigma coefficients {a1_coeffs:?}"),
    );
    c.note(format!("pauli {pauli_counts:?} sigma {sigma_counts:?}"));
}

fn sigma_growth(c: &mut Checks) {
    let start = Instant::now();
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = r.random_range(1..=3);
        let m = nonzero_sparse(&mut r, n);
        let s = sigma_decompose(&m).expect("power of two");
        let merged = merge_identity_pairs(&s);
        c.expect(
            s.len() == m.nnz(),
            format!("sample {i}: {} terms vs nnz {}", s.len(), m.nnz()),
        );
        c.expect(
            merged.len() <= m.nnz(),
            format!("sample {i}: merged {} vs nnz {}", merged.len(), m.nnz()),
        );
        worst = worst.max(merged.reconstruct().max_abs_diff(&m).expect("same shape"));
    }
    c.expect(worst < RECONSTRUCT_TOL, format!("merged reconstruction {worst:e}"));
    for n in 1..=3 {
        for _ in 0..10 {
            let complex = r.random_bool(0.5);
            let m = common::random_dense(&mut r, n, complex);
            let p = pauli_decompose(&m).expect("power of two");
            c.expect(p.len() == 1 << (2 * n), format!("dense n={n}: {} pauli terms", p.len()));
        }
    }
    c.note("200 sparse, 30 dense");
    c.within(start.elapsed(), BUDGET_3);
}

fn completion_identities(c: &mut Checks) {
    use PauliSymbol::{I, X};
    use SigmaSymbol::*;
    let table = [
        (I2, I, None),
        (Plus, X, Some(Minus)),
        (Minus, X, Some(Plus)),
        (Pm, I, Some(Mp)),
        (Mp, I, Some(Pm)),
    ];
    for (sym, bar, complement) in table {
        let s = SigmaString::new(vec![sym]).expect("non-empty");
        c.expect(unitary_completion(&s) == [bar], format!("{sym:?} completion"));
        c.expect(orthogonal_complement(&s) == [complement], format!("{sym:?} complement"));
        let expected = match complement {
            Some(k) => sigma_string_dense(&SigmaString::new(vec![k]).expect("non-empty")),
            None => DenseComplexMatrix::zeros(2, 2),
        };
        c.expect(complement_dense(&s) == expected, format!("{sym:?} dense complement"));
    }

    let strings = sigma_strings(3);
    c.expect(strings.len() == 125, format!("{} strings", strings.len()));
    for s in &strings {
        let h = sigma_string_dense(s);
        let hp = complement_dense(s);
        let sum = hp
            .matmul(&hp.transpose())
            .and_then(|a| a.add(&h.matmul(&h.transpose())?))
            .expect("square");
        c.expect(
            sum == DenseComplexMatrix::identity(8),
            format!("completeness fails for {s:?}"),
        );
    }

    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for len in 1..=3 {
        for s in sigma_strings(len) {
            let u = build_uj(&s);
            let h = sigma_string_dense(&s);
            let hp = complement_dense(&s);
            for _ in 0..20 {
                let psi = common::random_state(&mut r, len);
                let mut input = psi.clone();
                input.extend(std::iter::repeat_n(C64::default(), psi.len()));
                let out = apply(&u, &Statevector::from_amplitudes(len + 1, input).expect("length"))
                    .expect("width")
                    .into_amplitudes();
                let expected: Vec<C64> = h
                    .matvec(&psi)
                    .expect("dim")
                    .into_iter()
                    .chain(hp.matvec(&psi).expect("dim"))
                    .collect();
                for (a, b) in out.iter().zip(&expected) {
                    worst = worst.max((a - b).norm());
                }
                cases += 1;
            }
        }
    }
    c.expect(worst < ACTION_TOL, format!("action error {worst:e}"));
    c.note(format!("action over {cases} states, max error {worst:.1e}"));
}

fn example_circuits(c: &mut Checks) {
    use SigmaSymbol::*;
    let fig4 = SigmaString::new(vec![Minus, Pm, I2]).expect("non-empty");
    let expect4 = [
        Gate::x(0),
        Gate::x(1),
        Gate::mcx(0, vec![Control::closed(1), Control::open(2)]).expect("valid"),
    ];
    c.expect(build_uj(&fig4).gates() == expect4, "first example circuit");

    let fig5 = SigmaString::new(vec![Plus, Pm, I2, Minus, Plus]).expect("non-empty");
    let expect5 = [
        Gate::x(0),
        Gate::x(1),
        Gate::x(4),
        Gate::x(5),
        Gate::mcx(
            0,
            vec![Control::open(1), Control::open(2), Control::closed(4), Control::open(5)],
        )
        .expect("valid"),
    ];
    c.expect(build_uj(&fig5).gates() == expect5, "second example circuit");

    let unmerged = row_pattern_synthesis(&[0b100, 0b101], 3).expect("valid patterns");
    c.expect(
        unmerged.len() == 2 && unmerged.gates().iter().all(|g| g.qubits().len() == 4),
        "two three-control gates before merging",
    );
    let merged = merge_cnx(&unmerged);
    c.expect(
        merged.gates() == build_uja(&fig4).gates(),
        "merge gives the two-control gate",
    );
    let diff = unmerged.dense_product().max_abs_diff(&merged.dense_product());
    c.expect(diff < MERGE_TOL, format!("merged unitary differs by {diff:e}"));
    c.note(format!("merge unitary diff {diff:.1e}"));
}

fn encoding_soundness(c: &mut Checks) {
    let start = Instant::now();
    let h = hermitian_h();
    for basis in [Basis::Pauli, Basis::Sigma] {
        let enc = block_encode(&h, basis, false).expect("encodable");
        let report = enc.verify(&h).expect("simulable");
        c.expect(
            report.max_block_error < BLOCK_TOL,
            format!("{basis:?} worked example {:e}", report.max_block_error),
        );
        c.note(format!("{} lambda {}", basis.as_str(), report.lambda));
    }
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = r.random_range(1..=3);
        let m = nonzero_sparse(&mut r, n);
        for (basis, merge) in [(Basis::Pauli, false), (Basis::Sigma, false), (Basis::Sigma, true)] {
            let d = AnyDecomposition::decompose(&m, basis, merge).expect("power of two");
            let enc = encode_decomposition(&d).expect("encodable");
            let l1: f64 = match &d {
                AnyDecomposition::Pauli(p) => p.terms().iter().map(|t| t.coeff.norm()).sum(),
                AnyDecomposition::Sigma(s) => s.terms().iter().map(|t| t.coeff.norm()).sum(),
            };
            c.expect(
                (enc.lambda - l1).abs() < 1e-12 * l1.max(1.0),
                format!("sample {i}: lambda {} vs {l1}", enc.lambda),
            );
            let report = enc.verify(&m).expect("simulable");
            worst = worst.max(report.max_block_error);
        }
    }
    c.expect(worst < BLOCK_TOL, format!("random block error {worst:e}"));
    c.note(format!("100 random, max error {worst:.1e}"));
    c.within(start.elapsed(), BUDGET_6);
}

fn scalar_quadratic() -> PolynomialSystem {
    let m = |v: f64| SparseComplexMatrix::new(1, 1, [(0, 0, re(v))]).expect("1x1");
    PolynomialSystem::new(1, vec![SparseComplexMatrix::zeros(1, 1), m(-1.0), m(0.5)]).expect("valid")
}

fn carleman_structure(c: &mut Checks) {
    let quad = scalar_quadratic();
    for order in 1..=10 {
        let nnz = assemble(&quad, order).expect("small").nnz();
        c.expect(nnz == 2 * order - 1, format!("N={order}: nnz {nnz}"));
    }

    for d in 1..=4usize {
        let linear = PolynomialSystem::new(
            d,
            vec![
                SparseComplexMatrix::zeros(d, 1),
                SparseComplexMatrix::identity(d).scale(re(0.5)),
            ],
        )
        .expect("valid");
        for order in 1..=8usize {
            let geometric: usize = (1..=order).map(|i| d.pow(i as u32)).sum();
            let formula = carleman_dimension(d, order).expect("small");
            c.expect(
                formula == geometric,
                format!("d={d} N={order}: {formula} vs {geometric}"),
            );
            let assembled = assemble(&linear, order).expect("small").dimension();
            c.expect(
                assembled == geometric,
                format!("d={d} N={order}: assembled {assembled}"),
            );
        }
    }

    let m1 = SparseComplexMatrix::new(
        2,
        2,
        [(0, 0, re(-0.5)), (0, 1, re(1.0)), (1, 0, re(-1.0)), (1, 1, re(-0.5))],
    )
    .expect("2x2");
    let model = PolynomialModel::new(
        2,
        1,
        vec![CoefficientTerm {
            order: 1,
            time_power: 0,
            matrix: m1,
        }],
    )
    .expect("valid");
    let phi0 = [re(1.0), re(0.5)];
    let exact = |t: f64| {
        let (s, co, e) = (t.sin(), t.cos(), (-0.5 * t).exp());
        [re(e * (co * 1.0 + s * 0.5)), re(e * (-s * 1.0 + co * 0.5))]
    };
    let span = (0.0, 2.0);
    let dt = 1e-3;
    let direct = integrate_nonlinear(&model, &phi0, span, dt, 1).expect("finite");
    let mut worst_direct = 0.0f64;
    let mut worst_exact = 0.0f64;
    for order in 1..=8 {
        let traj = integrate_model(&model, order, &phi0, span, dt).expect("finite");
        for i in 0..traj.len() {
            let got = traj.first_block(i);
            let t = traj.times()[i];
            for ((g, d), e) in got.iter().zip(direct.first_block(i)).zip(exact(t)) {
                worst_direct = worst_direct.max((g - d).norm());
                worst_exact = worst_exact.max((g - e).norm());
            }
        }
    }
    c.expect(worst_direct < LINEAR_TOL, format!("linear vs direct {worst_direct:e}"));
    c.expect(
        worst_exact < LINEAR_TOL,
        format!("linear vs closed form {worst_exact:e}"),
    );
    c.note(format!(
        "linear N=1..8 vs direct {worst_direct:.1e}, vs closed form {worst_exact:.1e}"
    ));
}

fn bernoulli_convergence(c: &mut Checks) {
    let start = Instant::now();
    let model = PolynomialModel::bernoulli_demo();
    let phi0 = [re(1.0)];
    let span = (0.0, 1.0);
    let dt = 1e-3;
    let reference = FineReference {
        model: &model,
        phi0: &phi0,
        refinement: 8,
    };
    let grid: Vec<f64> = integrate_model(&model, 1, &phi0, span, dt)
        .expect("finite")
        .times()
        .to_vec();
    let fine = reference.evaluate(&grid).expect("finite");
    let ref_err = grid
        .iter()
        .zip(&fine)
        .map(|(&t, v)| (v[0] - re(1.0 / (1.0 + t * t))).norm())
        .fold(0.0, f64::max);
    c.expect(ref_err < REFERENCE_TOL, format!("reference vs closed form {ref_err:e}"));

    let rows = convergence_study(&model, &phi0, &reference, &[1, 2, 3, 4, 5], span, dt).expect("study");
    for row in &rows {
        c.expect(row.diverged_at.is_none(), format!("N={} diverged", row.order));
    }
    for w in rows.windows(2) {
        c.expect(
            w[1].max_error < w[0].max_error,
            format!(
                "N={} error {:e} not below N={} error {:e}",
                w[1].order, w[1].max_error, w[0].order, w[0].max_error
            ),
        );
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("bernoulli_convergence.csv");
    let written = csv::Writer::from_path(&path).and_then(|mut w| {
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    });
    c.expect(written.is_ok(), format!("csv write failed: {written:?}"));
    let errors: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.max_error)).collect();
    c.note(format!("errors {} -> {}", errors.join(" "), path.display()));
    c.within(start.elapsed(), BUDGET_8);
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

fn barren_plateau(c: &mut Checks) {
    let start = Instant::now();
    let rows = variance_scan(&[2, 4, 6, 8], 6, 500, SEED).expect("scan");
    let points = |kind: CostKind| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.kind == kind)
            .map(|r| (r.n as f64, r.variance))
            .collect()
    };
    let global = log_slope(&points(CostKind::Global)).expect("positive variances");
    let local = log_slope(&points(CostKind::Local)).expect("positive variances");
    c.expect(global < 0.0, format!("global slope {global:.3} not negative"));
    c.expect(
        global.abs() >= SLOPE_RATIO * local.abs(),
        format!("slope ratio {:.2} below {SLOPE_RATIO}", global.abs() / local.abs()),
    );
    c.note(format!("slopes global {global:.3} local {local:.3}"));

    let template = Ansatz::hardware_efficient(6, 6).expect("valid");
    let finals: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|s| {
            let g = train(&template, CostKind::Global, 0.1, 200, SEED + s).expect("valid rate");
            let l = train(&template, CostKind::Local, 0.1, 200, SEED + s).expect("valid rate");
            (*g.costs.last().expect("non-empty"), *l.costs.last().expect("non-empty"))
        })
        .collect();
    let global_median = median(finals.iter().map(|f| f.0).collect());
    let local_median = median(finals.iter().map(|f| f.1).collect());
    c.expect(
        global_median > GLOBAL_FLOOR,
        format!("median final global cost {global_median:.3} not above {GLOBAL_FLOOR}"),
    );
    c.expect(
        local_median < LOCAL_CEILING,
        format!("median final local cost {local_median:.3} not below {LOCAL_CEILING}"),
    );
    c.note(format!(
        "median final global {global_median:.3} local {local_median:.3}"
    ));
    c.within(start.elapsed(), BUDGET_9);
}

fn gradient_correctness(c: &mut Checks) {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..=5);
        let layers = r.random_range(1..=4);
        let a = Ansatz::hardware_efficient(n, layers)
            .expect("valid")
            .with_random_theta(r.random());
        let kind = if r.random_bool(0.5) {
            CostKind::Global
        } else {
            CostKind::Local
        };
        let index = r.random_range(0..a.parameter_count());
        let shift = partial_derivative(&a, kind, index);
        let shifted = |delta: f64| {
            let mut theta = a.theta().to_vec();
            theta[index] += delta;
            evaluate_cost(&a.with_theta(theta).expect("same length"), kind)
        };
        let fd = (shifted(FD_STEP) - shifted(-FD_STEP)) / (2.0 * FD_STEP);
        worst = worst.max((shift - fd).abs());
    }
    c.expect(worst < GRADIENT_TOL, format!("max shift/fd gap {worst:e}"));
    c.note(format!("100 samples, max gap {worst:.1e}"));
}

type Criterion = (u32, &'static str, fn(&mut Checks));

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "worked Pauli decomposition", worked_pauli_example),
        (2, "example matrix term counts", example_matrices),
        (3, "Sigma linear growth", sigma_growth),
        (4, "unitary completion identities", completion_identities),
        (5, "example circuits and merge", example_circuits),
        (6, "block-encoding soundness", encoding_soundness),
        (7, "Carleman structure", carleman_structure),
        (8, "Bernoulli convergence", bernoulli_convergence),
        (9, "barren-plateau contrast", barren_plateau),
        (10, "gradient correctness", gradient_correctness),
    ];
    let strict = std::env::var("LCNU_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut blocking = 0;
    for (id, title, run) in criteria {
        let mut checks = Checks::new();
        run(&mut checks);
        let passed = checks.failures.is_empty();
        let status = if passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {title}: {}", checks.notes.join("; "));
        for f in &checks.failures {
            println!("    failed: {f}");
        }
        if !passed {
            if KNOWN_RED.contains(&id) && !strict {
                println!("    known red, not counted toward the exit code");
            } else {
                blocking += 1;
            }
        }
    }
    if blocking > 0 {
        eprintln!("{blocking} criteria failed");
        std::process::exit(1);
    }
}
