//! Randomized properties of circuit synthesis, simulation and block encoding.

mod common;

use std::f64::consts::PI;

use common::{random_state, square_strategy};
use lcnu_core::blockenc::{block_encode, build_prep, build_select_pauli, build_select_sigma};
use lcnu_core::circuit::{
    build_uj, build_uja, complement_dense, hht_row_patterns, merge_cnx, row_pattern_synthesis, sigma_string_dense,
    Control, Gate, GateCircuit, Polarity, SigmaString, SingleQubitGate,
};
use lcnu_core::decompose::{Basis, PauliSymbol, SigmaSymbol, Symbol, Term, TermDecomposition};
use lcnu_core::simverify::{apply, circuit_unitary, extract_block, Statevector};
use lcnu_core::tensorcore::{c64, C64};
use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn polarity(open: bool) -> Polarity {
    if open {
        Polarity::Open
    } else {
        Polarity::Closed
    }
}

fn single_strategy(width: usize) -> impl Strategy<Value = Gate> {
    (0..width, 0..6usize, -PI..PI).prop_map(|(t, kind, theta)| {
        let g = match kind {
            0 => SingleQubitGate::I,
            1 => SingleQubitGate::X,
            2 => SingleQubitGate::Y,
            3 => SingleQubitGate::Z,
            4 => SingleQubitGate::Rx(theta),
            _ => SingleQubitGate::Ry(theta),
        };
        Gate::single(t, g)
    })
}

fn mcx_strategy(width: usize) -> impl Strategy<Value = Gate> {
    subsequence((0..width).collect::<Vec<_>>(), 2..=width)
        .prop_shuffle()
        .prop_flat_map(|qs| {
            let k = qs.len() - 1;
            (Just(qs), proptest::collection::vec(any::<bool>(), k))
        })
        .prop_map(|(qs, open)| {
            let controls = qs[1..]
                .iter()
                .zip(open)
                .map(|(&qubit, o)| Control {
                    qubit,
                    polarity: polarity(o),
                })
                .collect();
            Gate::mcx(qs[0], controls).unwrap()
        })
}

/// A one- or two-qubit unitary taken from a small entangling circuit.
fn opaque_strategy(width: usize) -> impl Strategy<Value = Gate> {
    (
        subsequence((0..width).collect::<Vec<_>>(), 1..=2).prop_shuffle(),
        -PI..PI,
        -PI..PI,
    )
        .prop_map(|(qs, a, b)| {
            let k = qs.len();
            let mut gates = vec![Gate::single(0, SingleQubitGate::Ry(a))];
            if k == 2 {
                gates.push(Gate::mcx(1, vec![Control::closed(0)]).unwrap());
            }
            gates.push(Gate::single(k - 1, SingleQubitGate::Rx(b)));
            let m = GateCircuit::from_gates(k, vec![], gates).unwrap().dense_product();
            Gate::opaque(qs, m).unwrap()
        })
}

fn circuit_strategy() -> impl Strategy<Value = GateCircuit> {
    (2..=6usize).prop_flat_map(|w| {
        let gate = prop_oneof![single_strategy(w), mcx_strategy(w), opaque_strategy(w)];
        proptest::collection::vec(gate, 0..12).prop_map(move |gates| GateCircuit::from_gates(w, vec![], gates).unwrap())
    })
}

/// C^nX sequences on the ancilla (qubit 0), biased towards full-width patterns so merges occur.
fn cnx_sequence_strategy() -> impl Strategy<Value = GateCircuit> {
    (1..=4usize).prop_flat_map(|n| {
        let system: Vec<usize> = (1..=n).collect();
        let gate = (
            subsequence(system.clone(), 0..=n),
            proptest::collection::vec(any::<bool>(), n),
            any::<bool>(),
        )
            .prop_map(move |(subset, open, full)| {
                let qubits = if full { (1..=n).collect() } else { subset };
                let controls: Vec<Control> = qubits
                    .iter()
                    .map(|&qubit| Control {
                        qubit,
                        polarity: polarity(open[qubit - 1]),
                    })
                    .collect();
                if controls.is_empty() {
                    Gate::x(0)
                } else {
                    Gate::mcx(0, controls).unwrap()
                }
            });
        proptest::collection::vec(gate, 0..10)
            .prop_map(move |gates| GateCircuit::from_gates(n + 1, vec![0], gates).unwrap())
    })
}

fn sigma_string_strategy(max_len: usize) -> impl Strategy<Value = SigmaString> {
    proptest::collection::vec(0..5usize, 1..=max_len)
        .prop_map(|ix| SigmaString::new(ix.into_iter().map(|i| SigmaSymbol::all()[i]).collect()).unwrap())
}

fn all_sigma_strings(len: usize) -> Vec<SigmaString> {
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
        .map(|v| SigmaString::new(v).unwrap())
        .collect()
}

fn coefficient_strategy() -> impl Strategy<Value = C64> {
    (0.05f64..2.0, -PI..PI).prop_map(|(r, phi)| C64::from_polar(r, phi))
}

fn phase(c: C64) -> C64 {
    c / c.norm()
}

#[test]
fn completion_block_is_the_sigma_string() {
    for len in 1..=3 {
        for s in all_sigma_strings(len) {
            let u = circuit_unitary(&build_uj(&s)).unwrap();
            let block = extract_block(&u, &[0]).unwrap();
            assert_eq!(block, sigma_string_dense(&s), "{s:?}");
            assert!(u.is_unitary(1e-12));
        }
    }
}

#[test]
fn completion_acts_on_split_register() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(28);
    for s in all_sigma_strings(2) {
        let u = build_uj(&s);
        let (h, hp) = (sigma_string_dense(&s), complement_dense(&s));
        for _ in 0..20 {
            let psi = random_state(&mut rng, 2);
            let mut input = psi.clone();
            input.extend([C64::default(); 4]);
            let out = apply(&u, &Statevector::from_amplitudes(3, input).unwrap()).unwrap();
            let expected: Vec<C64> = h
                .matvec(&psi)
                .unwrap()
                .into_iter()
                .chain(hp.matvec(&psi).unwrap())
                .collect();
            for (a, b) in out.amplitudes().iter().zip(&expected) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #[test]
    fn simulation_matches_dense_product(c in circuit_strategy(), seed in any::<u64>()) {
        let dense = c.dense_product();
        prop_assert!(circuit_unitary(&c).unwrap().max_abs_diff(&dense) < 1e-12);
        let psi = random_state(&mut Xoshiro256PlusPlus::seed_from_u64(seed), c.qubits());
        let out = apply(&c, &Statevector::from_amplitudes(c.qubits(), psi.clone()).unwrap()).unwrap();
        for (a, b) in out.amplitudes().iter().zip(dense.matvec(&psi).unwrap()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_inverts(c in circuit_strategy()) {
        let mut both = c.clone();
        both.append(&c.adjoint()).unwrap();
        let id = lcnu_core::tensorcore::DenseComplexMatrix::identity(1 << c.qubits());
        prop_assert!(both.dense_product().max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn merge_preserves_unitary(c in cnx_sequence_strategy()) {
        let merged = merge_cnx(&c);
        prop_assert!(merged.len() <= c.len());
        prop_assert!(merged.dense_product().max_abs_diff(&c.dense_product()) < 1e-12);
    }

    #[test]
    fn pattern_synthesis_merges_to_rule(s in sigma_string_strategy(4)) {
        let patterns = hht_row_patterns(&s);
        let synthesized = row_pattern_synthesis(&patterns, s.len()).unwrap();
        let rule = build_uja(&s);
        prop_assert!(synthesized.dense_product().max_abs_diff(&rule.dense_product()) < 1e-12);
        let merged = merge_cnx(&synthesized);
        prop_assert_eq!(merged.gates(), rule.gates());
    }

    #[test]
    fn prep_is_orthogonal(coeffs in proptest::collection::vec(coefficient_strategy(), 1..=16)) {
        let prep = build_prep(&coeffs).unwrap();
        prop_assert!(prep.is_unitary(1e-12));
        let lambda: f64 = coeffs.iter().map(|c| c.norm()).sum();
        for (i, c) in coeffs.iter().enumerate() {
            prop_assert!((prep[(i, 0)].re - (c.norm() / lambda).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_select_is_block_diagonal(
        picks in subsequence((0..16usize).collect::<Vec<_>>(), 1..=8),
        coeffs in proptest::collection::vec(coefficient_strategy(), 8),
    ) {
        let terms: Vec<Term<PauliSymbol>> = picks
            .iter()
            .zip(&coeffs)
            .map(|(&p, &c)| Term::new(c, vec![PauliSymbol::all()[p / 4], PauliSymbol::all()[p % 4]]))
            .collect();
        let d = TermDecomposition::new(2, terms).unwrap();
        let u = circuit_unitary(&build_select_pauli(&d).unwrap()).unwrap();
        let branches = u.rows() / 4;
        for i in 0..branches {
            for j in 0..branches {
                for r in 0..4 {
                    for c in 0..4 {
                        let expected = match d.terms().get(i) {
                            Some(t) if i == j => t.operator().get(r, c) * phase(t.coeff),
                            None if i == j => if r == c { c64(1.0, 0.0) } else { C64::default() },
                            _ => C64::default(),
                        };
                        prop_assert!((u[(i * 4 + r, j * 4 + c)] - expected).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_select_applies_each_branch(
        picks in subsequence((0..25usize).collect::<Vec<_>>(), 1..=8),
        coeffs in proptest::collection::vec(coefficient_strategy(), 8),
    ) {
        let terms: Vec<Term<SigmaSymbol>> = picks
            .iter()
            .zip(&coeffs)
            .map(|(&p, &c)| Term::new(c, vec![SigmaSymbol::all()[p / 5], SigmaSymbol::all()[p % 5]]))
            .collect();
        let d = TermDecomposition::new(2, terms).unwrap();
        let select = build_select_sigma(&d).unwrap();
        let u = circuit_unitary(&select).unwrap();
        let k = select.qubits() - 3;
        // Rows and columns with completion ancilla 0: index = branch · 8 + system.
        for (i, t) in d.terms().iter().enumerate() {
            let h = t.operator();
            for r in 0..4 {
                for c in 0..4 {
                    let got = u[(i * 8 + r, i * 8 + c)];
                    prop_assert!((got - h.get(r, c) * phase(t.coeff)).norm() < 1e-12);
                }
            }
        }
        prop_assert!(u.is_unitary(1e-12));
        prop_assert_eq!(u.rows(), 1 << (k + 3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn block_encodings_recover_normalized_matrix(h in square_strategy(3)) {
        prop_assume!(!h.is_zero());
        for (basis, merge) in [(Basis::Pauli, false), (Basis::Sigma, false), (Basis::Sigma, true)] {
            let enc = block_encode(&h, basis, merge).unwrap();
            let report = enc.verify(&h).unwrap();
            prop_assert!(report.max_block_error < 1e-10, "{:?}: {}", basis, report.max_block_error);
            if enc.qubits <= 7 {
                prop_assert!(circuit_unitary(&enc.circuit).unwrap().is_unitary(1e-10));
            }
        }
    }
}
