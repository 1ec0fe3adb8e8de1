//! PREP · SELECT · PREP† block encodings from Pauli or Sigma decompositions.
//!
//! Register layout, qubit 0 first: the selection register, then (Sigma only) the
//! shared completion ancilla, then the system register.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    build_uj, build_uja, CircuitError, Control, Gate, GateCircuit, Polarity, SigmaString, SingleQubitGate,
};
use crate::decompose::{AnyDecomposition, Basis, DecomposeError, PauliSymbol, SigmaSymbol, TermDecomposition};
use crate::simverify::{circuit_block, circuit_unitary, SimError};
use crate::tensorcore::{c64, DenseComplexMatrix, SparseComplexMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot encode a zero matrix or an empty coefficient list")]
    ZeroNorm,
}

/// Qubits needed to index `m` branches.
pub fn selection_qubits(m: usize) -> usize {
    m.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Real orthogonal matrix whose first column is `(√(|α_i|/λ))_i`, zero-padded
/// to a power of two. Built as a Householder reflection taking `e₀` to that column.
pub fn build_prep(coefficients: &[C64]) -> Result<DenseComplexMatrix, EncodeError> {
    let lambda: f64 = coefficients.iter().map(|a| a.norm()).sum();
    if coefficients.is_empty() || lambda.is_nan() || lambda <= 0.0 {
        return Err(EncodeError::ZeroNorm);
    }
    let dim = 1usize << selection_qubits(coefficients.len());
    let mut a = vec![0.0; dim];
    for (slot, c) in a.iter_mut().zip(coefficients) {
        *slot = (c.norm() / lambda).sqrt();
    }
    let mut w = a.clone();
    w[0] -= 1.0;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    Ok(DenseComplexMatrix::from_fn(dim, dim, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        if ww < 1e-30 {
            c64(id, 0.0)
        } else {
            c64(id - 2.0 * w[r] * w[c] / ww, 0.0)
        }
    }))
}

fn phase_of(c: C64) -> C64 {
    c / c.norm()
}

/// Controls on the selection register `first..first+k` that fire on value `i`.
fn selection_controls(i: usize, k: usize, first: usize) -> Vec<Control> {
    (0..k)
        .map(|s| Control {
            qubit: first + s,
            polarity: if (i >> (k - 1 - s)) & 1 == 1 {
                Polarity::Closed
            } else {
                Polarity::Open
            },
        })
        .collect()
}

/// Block-diagonal `Σ_i |i⟩⟨i| ⊗ e^{iφ_i} P_i` as one opaque gate; padded branches apply identity.
pub fn build_select_pauli(d: &TermDecomposition<PauliSymbol>) -> Result<GateCircuit, EncodeError> {
    let n = d.qubits();
    let k = selection_qubits(d.len());
    let sys = 1usize << n;
    let branches = 1usize << k;
    let mut matrix = DenseComplexMatrix::zeros(branches * sys, branches * sys);
    for i in 0..branches {
        let block = match d.terms().get(i) {
            Some(t) => t.operator().scale(phase_of(t.coeff)),
            None => SparseComplexMatrix::identity(sys),
        };
        for &(r, c, v) in block.entries() {
            matrix[(i * sys + r, i * sys + c)] = v;
        }
    }
    let mut c = GateCircuit::with_ancillae(k + n, (0..k).collect())?;
    c.push(Gate::opaque((0..k + n).collect(), matrix)?)?;
    Ok(c)
}

/// Diagonal phase `diag(e^{iφ_0}, …)` on the selection register, or on the
/// completion ancilla as a global phase when there is a single branch.
fn selection_phase(phases: &[C64], k: usize, fallback: usize) -> Result<Gate, EncodeError> {
    let dim = 1usize << k;
    let diag: Vec<C64> = (0..dim)
        .map(|i| phases.get(i).copied().unwrap_or(c64(1.0, 0.0)))
        .collect();
    if k == 0 {
        let p = diag[0];
        let m = DenseComplexMatrix::from_fn(2, 2, |r, c| if r == c { p } else { C64::default() });
        return Ok(Gate::opaque(vec![fallback], m)?);
    }
    let m = DenseComplexMatrix::from_fn(dim, dim, |r, c| if r == c { diag[r] } else { C64::default() });
    Ok(Gate::opaque((0..k).collect(), m)?)
}

/// Gate-level SELECT over unitary-completion circuits: every `U_j` gate gains the
/// selection controls for branch `j`, followed by the coefficient phases.
pub fn build_select_sigma(d: &TermDecomposition<SigmaSymbol>) -> Result<GateCircuit, EncodeError> {
    let n = d.qubits();
    let k = selection_qubits(d.len());
    let width = k + 1 + n;
    let map: Vec<usize> = (0..=n).map(|q| k + q).collect();
    let mut c = GateCircuit::with_ancillae(width, (0..=k).collect())?;
    for (i, t) in d.terms().iter().enumerate() {
        let uj = build_uj(&SigmaString::try_from(t)?).remap(width, &map)?;
        c.append(&uj.add_controls(&selection_controls(i, k, 0))?)?;
    }
    let phases: Vec<C64> = d.terms().iter().map(|t| phase_of(t.coeff)).collect();
    c.push(selection_phase(&phases, k, k)?)?;
    Ok(c)
}

pub fn build_select(d: &AnyDecomposition) -> Result<GateCircuit, EncodeError> {
    match d {
        AnyDecomposition::Pauli(p) => build_select_pauli(p),
        AnyDecomposition::Sigma(s) => build_select_sigma(s),
    }
}

/// Controlled `⊗ term` through per-qubit ancillae: fan the control out with CNOTs,
/// apply each single-qubit factor controlled by its own ancilla, then fan back in.
/// Layout: control 0, ancilla `i` at `1 + 2i`, target `i` at `2 + 2i`.
pub fn select_fanout(term: &[PauliSymbol]) -> Result<GateCircuit, EncodeError> {
    let n = term.len();
    let anc = |i: usize| 1 + 2 * i;
    let tgt = |i: usize| 2 + 2 * i;
    let mut c = GateCircuit::with_ancillae(1 + 2 * n, (0..n).map(anc).collect())?;
    let fan: Vec<Gate> = (0..n)
        .map(|i| Gate::mcx(anc(i), vec![Control::closed(0)]))
        .collect::<Result<_, _>>()?;
    for g in &fan {
        c.push(g.clone())?;
    }
    for (i, &p) in term.iter().enumerate() {
        let single = match p {
            PauliSymbol::I => continue,
            PauliSymbol::X => SingleQubitGate::X,
            PauliSymbol::Y => SingleQubitGate::Y,
            PauliSymbol::Z => SingleQubitGate::Z,
        };
        c.push(Gate::single(tgt(i), single).with_controls(&[Control::closed(anc(i))])?)?;
    }
    for g in fan.iter().rev() {
        c.push(g.clone())?;
    }
    Ok(c)
}

/// Controlled `U_j` with the completion flips fanned out through per-qubit ancillae.
/// Layout: completion ancilla 0, control 1, ancilla `i` at `2 + 2i`, target `i` at `3 + 2i`.
pub fn select_fanout_uj(s: &SigmaString) -> Result<GateCircuit, EncodeError> {
    let n = s.len();
    let anc = |i: usize| 2 + 2 * i;
    let tgt = |i: usize| 3 + 2 * i;
    let mut ancillae = vec![0];
    ancillae.extend((0..n).map(anc));
    let mut c = GateCircuit::with_ancillae(2 + 2 * n, ancillae)?;
    let fan: Vec<Gate> = (0..n)
        .map(|i| Gate::mcx(anc(i), vec![Control::closed(1)]))
        .collect::<Result<_, _>>()?;
    for g in &fan {
        c.push(g.clone())?;
    }
    c.push(Gate::mcx(0, vec![Control::closed(1)])?)?;
    for (i, sym) in s.symbols().iter().enumerate() {
        if sym.flips() {
            c.push(Gate::mcx(tgt(i), vec![Control::closed(anc(i))])?)?;
        }
    }
    for g in fan.iter().rev() {
        c.push(g.clone())?;
    }
    let mut map = vec![0];
    map.extend((0..n).map(tgt));
    let uja = build_uja(s).remap(2 + 2 * n, &map)?;
    c.append(&uja.add_controls(&[Control::closed(1)])?)?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub selection: Vec<usize>,
    pub completion: Option<usize>,
    pub system: Vec<usize>,
}

impl RegisterLayout {
    /// Every qubit that must start and end in `|0⟩`.
    pub fn ancillae(&self) -> Vec<usize> {
        self.selection.iter().copied().chain(self.completion).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub basis: Basis,
    pub qubits: usize,
    pub layout: RegisterLayout,
    pub circuit: GateCircuit,
    pub lambda: f64,
}

/// PREP, SELECT, PREP† for an existing decomposition.
pub fn encode_decomposition(d: &AnyDecomposition) -> Result<BlockEncoding, EncodeError> {
    let coeffs: Vec<C64> = match d {
        AnyDecomposition::Pauli(p) => p.terms().iter().map(|t| t.coeff).collect(),
        AnyDecomposition::Sigma(s) => s.terms().iter().map(|t| t.coeff).collect(),
    };
    let prep = build_prep(&coeffs)?;
    let lambda = d.one_norm();
    let select = build_select(d)?;
    let n = d.qubits();
    let k = selection_qubits(coeffs.len());
    let width = select.qubits();
    let completion = (d.basis() == Basis::Sigma).then_some(k);
    let layout = RegisterLayout {
        selection: (0..k).collect(),
        completion,
        system: (width - n..width).collect(),
    };
    let mut circuit = GateCircuit::with_ancillae(width, layout.ancillae())?;
    if k > 0 {
        let prep_gate = Gate::opaque((0..k).collect(), prep)?;
        circuit.push(prep_gate.clone())?;
        circuit.append(&select)?;
        circuit.push(prep_gate.adjoint())?;
    } else {
        circuit.append(&select)?;
    }
    Ok(BlockEncoding {
        basis: d.basis(),
        qubits: width,
        layout,
        circuit,
        lambda,
    })
}

/// Decomposes `h` in `basis` and encodes it; `merge` fuses Sigma projector pairs first.
pub fn block_encode(h: &SparseComplexMatrix, basis: Basis, merge: bool) -> Result<BlockEncoding, EncodeError> {
    let d = AnyDecomposition::decompose(h, basis, merge)?;
    if d.is_empty() {
        return Err(EncodeError::ZeroNorm);
    }
    encode_decomposition(&d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingReport {
    pub lambda: f64,
    pub max_block_error: f64,
    pub qubits: usize,
    pub gate_count: usize,
}

impl BlockEncoding {
    /// Simulated `⟨0_anc| U |0_anc⟩`.
    pub fn block(&self) -> Result<DenseComplexMatrix, EncodeError> {
        let ancillae = self.layout.ancillae();
        if ancillae.is_empty() {
            return Ok(circuit_unitary(&self.circuit)?);
        }
        Ok(circuit_block(&self.circuit, &ancillae)?)
    }

    /// Compares the simulated block with `h / λ`.
    pub fn verify(&self, h: &SparseComplexMatrix) -> Result<EncodingReport, EncodeError> {
        let target = h.to_dense().scale(c64(1.0 / self.lambda, 0.0));
        let block = self.block()?;
        Ok(EncodingReport {
            lambda: self.lambda,
            max_block_error: block.max_abs_diff(&target),
            qubits: self.qubits,
            gate_count: self.circuit.len(),
        })
    }
}
