//! Exact statevector and full-unitary simulation of gate circuits.

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Gate, GateCircuit};
use crate::tensorcore::{c64, DenseComplexMatrix, C64};

/// Widest circuit whose full unitary is materialized.
pub const DENSE_QUBIT_CAP: usize = 12;
/// Widest circuit whose ancilla-zero block is computed column by column.
pub const BLOCK_QUBIT_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit acts on {circuit} qubits but the state has {state}")]
    WidthMismatch { circuit: usize, state: usize },
    #[error("amplitude count {0} is not 2^{1}")]
    BadLength(usize, usize),
    #[error("{qubits} qubits exceeds the dense simulation cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("ancilla set is empty")]
    NoAncillae,
    #[error("qubit {qubit} out of range for {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("matrix of dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(qubits: usize) -> Self {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::default(); 1 << qubits];
        amps[index] = c64(1.0, 0.0);
        Self { qubits, amps }
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<C64>) -> Result<Self, SimError> {
        if amps.len() != 1usize << qubits {
            return Err(SimError::BadLength(amps.len(), qubits));
        }
        Ok(Self { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Probability that `qubit` reads 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let bit = 1 << (self.qubits - 1 - qubit);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Multiplies amplitude `i` by `factors[i]`.
    pub fn scale_each(&mut self, factors: &[f64]) {
        for (a, f) in self.amps.iter_mut().zip(factors) {
            *a *= f;
        }
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    /// Applies one gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        for q in gate.qubits() {
            if q >= self.qubits {
                return Err(SimError::QubitOutOfRange {
                    qubit: q,
                    qubits: self.qubits,
                });
            }
        }
        match gate {
            Gate::Single { target, gate } => {
                let m = gate.matrix();
                let t = self.bit(*target);
                for i in 0..self.amps.len() {
                    if i & t == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | t]);
                        self.amps[i] = m[0][0] * a + m[0][1] * b;
                        self.amps[i | t] = m[1][0] * a + m[1][1] * b;
                    }
                }
            }
            Gate::MultiControlledX { target, controls } => {
                let t = self.bit(*target);
                let (mut mask, mut value) = (0usize, 0usize);
                for c in controls {
                    let b = self.bit(c.qubit);
                    mask |= b;
                    value |= b * c.polarity.fires_on();
                }
                for i in 0..self.amps.len() {
                    if i & t == 0 && i & mask == value {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::Opaque { qubits, matrix } => {
                let bits: Vec<usize> = qubits.iter().map(|&q| self.bit(q)).collect();
                let mask = bits.iter().fold(0, |m, b| m | b);
                let k = bits.len();
                let offsets: Vec<usize> = (0..1usize << k)
                    .map(|l| {
                        bits.iter()
                            .enumerate()
                            .filter(|(i, _)| (l >> (k - 1 - i)) & 1 == 1)
                            .fold(0, |acc, (_, &b)| acc | b)
                    })
                    .collect();
                let mut local = vec![C64::default(); offsets.len()];
                for base in 0..self.amps.len() {
                    if base & mask != 0 {
                        continue;
                    }
                    for (l, &o) in offsets.iter().enumerate() {
                        local[l] = self.amps[base | o];
                    }
                    for (r, &o) in offsets.iter().enumerate() {
                        self.amps[base | o] = (0..local.len()).map(|c| matrix[(r, c)] * local[c]).sum();
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the circuit on `state`, gates in list order.
pub fn apply(c: &GateCircuit, state: &Statevector) -> Result<Statevector, SimError> {
    if c.qubits() != state.qubits {
        return Err(SimError::WidthMismatch {
            circuit: c.qubits(),
            state: state.qubits,
        });
    }
    let mut s = state.clone();
    for g in c.gates() {
        s.apply_gate(g)?;
    }
    Ok(s)
}

/// Full unitary, one simulated basis state per column.
pub fn circuit_unitary(c: &GateCircuit) -> Result<DenseComplexMatrix, SimError> {
    let n = c.qubits();
    if n > DENSE_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            qubits: n,
            cap: DENSE_QUBIT_CAP,
        });
    }
    let dim = 1usize << n;
    let columns: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|k| apply(c, &Statevector::basis(n, k)).map(Statevector::into_amplitudes))
        .collect::<Result<_, _>>()?;
    let mut u = DenseComplexMatrix::zeros(dim, dim);
    for (k, col) in columns.iter().enumerate() {
        u.set_column(k, col);
    }
    Ok(u)
}

/// Maps a system index into the full register with every ancilla bit at 0.
fn system_embedding(total: usize, ancillae: &[usize]) -> Result<Vec<usize>, SimError> {
    if ancillae.is_empty() {
        return Err(SimError::NoAncillae);
    }
    if let Some(&q) = ancillae.iter().find(|&&q| q >= total) {
        return Err(SimError::QubitOutOfRange {
            qubit: q,
            qubits: total,
        });
    }
    let system: Vec<usize> = (0..total).filter(|q| !ancillae.contains(q)).collect();
    let s = system.len();
    Ok((0..1usize << s)
        .map(|idx| {
            system
                .iter()
                .enumerate()
                .filter(|(i, _)| (idx >> (s - 1 - i)) & 1 == 1)
                .fold(0, |acc, (_, &q)| acc | (1 << (total - 1 - q)))
        })
        .collect())
}

/// `⟨0_anc| U |0_anc⟩` on the remaining qubits, in their original order.
pub fn extract_block(u: &DenseComplexMatrix, ancillae: &[usize]) -> Result<DenseComplexMatrix, SimError> {
    let dim = u.rows();
    if !dim.is_power_of_two() || u.cols() != dim {
        return Err(SimError::NotPowerOfTwo(dim));
    }
    let embed = system_embedding(dim.trailing_zeros() as usize, ancillae)?;
    let s = embed.len();
    Ok(DenseComplexMatrix::from_fn(s, s, |r, c| u[(embed[r], embed[c])]))
}

/// Ancilla-zero block of a circuit without materializing the full unitary.
pub fn circuit_block(c: &GateCircuit, ancillae: &[usize]) -> Result<DenseComplexMatrix, SimError> {
    let n = c.qubits();
    if n > BLOCK_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            qubits: n,
            cap: BLOCK_QUBIT_CAP,
        });
    }
    let embed = system_embedding(n, ancillae)?;
    let columns: Vec<Vec<C64>> = embed
        .par_iter()
        .map(|&k| {
            let out = apply(c, &Statevector::basis(n, k))?;
            Ok(embed.iter().map(|&r| out.amplitudes()[r]).collect())
        })
        .collect::<Result<_, SimError>>()?;
    let s = embed.len();
    let mut block = DenseComplexMatrix::zeros(s, s);
    for (k, col) in columns.iter().enumerate() {
        block.set_column(k, col);
    }
    Ok(block)
}
