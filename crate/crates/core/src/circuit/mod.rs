//! Gate-level circuit IR and the Sigma-string synthesis rules built on it.
//!
//! Qubit 0 is the most significant bit of a basis index. Gate lists are in
//! application order, so a circuit's matrix is the product of its gates in
//! reverse list order.

mod json;
mod synth;

pub use json::{CircuitJson, GateJson};
pub use synth::{
    build_uj, build_uja, build_ujb, complement_dense, hht_row_patterns, merge_cnx, orthogonal_complement,
    row_pattern_synthesis, sigma_string_dense, unitary_completion, SigmaString,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorcore::{c64, DenseComplexMatrix, TensorError, C64};

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("qubit {qubit} out of range for a {qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("qubit {0} used more than once in a gate")]
    RepeatedQubit(usize),
    #[error("opaque gate on {qubits} qubits needs a {expected}x{expected} matrix, got {found:?}")]
    OpaqueShape {
        qubits: usize,
        expected: usize,
        found: (usize, usize),
    },
    #[error("opaque matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("sigma string must contain at least one symbol")]
    EmptyString,
    #[error("circuits act on {0} and {1} qubits")]
    WidthMismatch(usize, usize),
    #[error("row pattern {pattern} does not fit in {bits} bits or is repeated")]
    BadPattern { pattern: usize, bits: usize },
    #[error("qubit map has length {found}, expected {expected}")]
    BadMap { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Fires on `|0⟩`.
    Open,
    /// Fires on `|1⟩`.
    Closed,
}

impl Polarity {
    pub fn fires_on(self) -> usize {
        match self {
            Polarity::Open => 0,
            Polarity::Closed => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Open => Polarity::Closed,
            Polarity::Closed => Polarity::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn open(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Open,
        }
    }

    pub fn closed(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleQubitGate {
    I,
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
}

impl SingleQubitGate {
    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::default();
        let one = c64(1.0, 0.0);
        match self {
            SingleQubitGate::I => [[one, o], [o, one]],
            SingleQubitGate::X => [[o, one], [one, o]],
            SingleQubitGate::Y => [[o, c64(0.0, -1.0)], [c64(0.0, 1.0), o]],
            SingleQubitGate::Z => [[one, o], [o, -one]],
            SingleQubitGate::Rx(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[c64(c, 0.0), c64(0.0, -s)], [c64(0.0, -s), c64(c, 0.0)]]
            }
            SingleQubitGate::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]]
            }
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            SingleQubitGate::Rx(t) => SingleQubitGate::Rx(-t),
            SingleQubitGate::Ry(t) => SingleQubitGate::Ry(-t),
            g => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Single {
        target: usize,
        gate: SingleQubitGate,
    },
    MultiControlledX {
        target: usize,
        controls: Vec<Control>,
    },
    /// Arbitrary unitary; `qubits[0]` is the most significant bit of the matrix index.
    Opaque {
        qubits: Vec<usize>,
        matrix: DenseComplexMatrix,
    },
}

fn ensure_distinct(qubits: impl IntoIterator<Item = usize>) -> Result<(), CircuitError> {
    let mut seen = std::collections::HashSet::new();
    for q in qubits {
        if !seen.insert(q) {
            return Err(CircuitError::RepeatedQubit(q));
        }
    }
    Ok(())
}

impl Gate {
    pub fn single(target: usize, gate: SingleQubitGate) -> Self {
        Gate::Single { target, gate }
    }

    pub fn x(target: usize) -> Self {
        Gate::single(target, SingleQubitGate::X)
    }

    /// Controls are stored sorted by qubit.
    pub fn mcx(target: usize, mut controls: Vec<Control>) -> Result<Self, CircuitError> {
        ensure_distinct(controls.iter().map(|c| c.qubit).chain([target]))?;
        controls.sort();
        Ok(Gate::MultiControlledX { target, controls })
    }

    pub fn opaque(qubits: Vec<usize>, matrix: DenseComplexMatrix) -> Result<Self, CircuitError> {
        ensure_distinct(qubits.iter().copied())?;
        let expected = 1usize
            .checked_shl(qubits.len() as u32)
            .ok_or(TensorError::DimensionOverflow("opaque gate"))?;
        if matrix.shape() != (expected, expected) {
            return Err(CircuitError::OpaqueShape {
                qubits: qubits.len(),
                expected,
                found: matrix.shape(),
            });
        }
        let defect = matrix.unitarity_defect();
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(CircuitError::NotUnitary(defect));
        }
        Ok(Gate::Opaque { qubits, matrix })
    }

    /// Every qubit the gate touches, target last for controlled gates.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Single { target, .. } => vec![*target],
            Gate::MultiControlledX { target, controls } => controls.iter().map(|c| c.qubit).chain([*target]).collect(),
            Gate::Opaque { qubits, .. } => qubits.clone(),
        }
    }

    pub fn is_identity_single(&self) -> bool {
        matches!(
            self,
            Gate::Single {
                gate: SingleQubitGate::I,
                ..
            }
        )
    }

    /// Controls and target if this is an X, possibly controlled.
    pub fn as_controlled_x(&self) -> Option<(usize, &[Control])> {
        match self {
            Gate::Single {
                target,
                gate: SingleQubitGate::X,
            } => Some((*target, &[])),
            Gate::MultiControlledX { target, controls } => Some((*target, controls)),
            _ => None,
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Gate::Single { target, gate } => Gate::single(*target, gate.adjoint()),
            Gate::MultiControlledX { .. } => self.clone(),
            Gate::Opaque { qubits, matrix } => Gate::Opaque {
                qubits: qubits.clone(),
                matrix: matrix.adjoint(),
            },
        }
    }

    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Self {
        match self {
            Gate::Single { target, gate } => Gate::single(map(*target), *gate),
            Gate::MultiControlledX { target, controls } => {
                let mut controls: Vec<_> = controls
                    .iter()
                    .map(|c| Control {
                        qubit: map(c.qubit),
                        polarity: c.polarity,
                    })
                    .collect();
                controls.sort();
                Gate::MultiControlledX {
                    target: map(*target),
                    controls,
                }
            }
            Gate::Opaque { qubits, matrix } => Gate::Opaque {
                qubits: qubits.iter().map(|&q| map(q)).collect(),
                matrix: matrix.clone(),
            },
        }
    }

    /// The same operation applied only when every extra control fires. X gates stay in
    /// the multi-controlled X family; anything else becomes a larger opaque unitary.
    pub fn with_controls(&self, extra: &[Control]) -> Result<Self, CircuitError> {
        if extra.is_empty() {
            return Ok(self.clone());
        }
        if let Some((target, controls)) = self.as_controlled_x() {
            let all = controls.iter().chain(extra).copied().collect();
            return Gate::mcx(target, all);
        }
        let (qubits, local) = self.local_matrix();
        let k = extra.len();
        let m = local.rows();
        let fire = extra.iter().fold(0usize, |acc, c| (acc << 1) | c.polarity.fires_on());
        let matrix = DenseComplexMatrix::from_fn(m << k, m << k, |r, c| {
            let (rc, rl) = (r / m, r % m);
            let (cc, cl) = (c / m, c % m);
            if rc != cc {
                C64::default()
            } else if rc == fire {
                local[(rl, cl)]
            } else if rl == cl {
                c64(1.0, 0.0)
            } else {
                C64::default()
            }
        });
        Gate::opaque(extra.iter().map(|c| c.qubit).chain(qubits).collect(), matrix)
    }

    /// Qubits and the matrix on them, first qubit most significant.
    pub fn local_matrix(&self) -> (Vec<usize>, DenseComplexMatrix) {
        match self {
            Gate::Single { target, gate } => {
                let m = gate.matrix();
                let d = DenseComplexMatrix::from_fn(2, 2, |r, c| m[r][c]);
                (vec![*target], d)
            }
            Gate::MultiControlledX { controls, .. } => {
                let k = controls.len();
                let fire = controls
                    .iter()
                    .fold(0usize, |acc, c| (acc << 1) | c.polarity.fires_on());
                let dim = 1usize << (k + 1);
                let d = DenseComplexMatrix::from_fn(dim, dim, |r, c| {
                    let image = if c >> 1 == fire { c ^ 1 } else { c };
                    if r == image {
                        c64(1.0, 0.0)
                    } else {
                        C64::default()
                    }
                });
                (self.qubits(), d)
            }
            Gate::Opaque { qubits, matrix } => (qubits.clone(), matrix.clone()),
        }
    }

    /// Full `2^width` matrix of the gate, built by embedding its local matrix.
    pub fn dense(&self, width: usize) -> DenseComplexMatrix {
        let (qubits, local) = self.local_matrix();
        let dim = 1usize << width;
        let k = qubits.len();
        let shifts: Vec<usize> = qubits.iter().map(|&q| width - 1 - q).collect();
        let mask = shifts.iter().fold(0usize, |m, &s| m | (1 << s));
        let gather = |b: usize| shifts.iter().fold(0usize, |acc, &s| (acc << 1) | ((b >> s) & 1));
        let scatter = |l: usize| {
            shifts
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &s)| acc | (((l >> (k - 1 - i)) & 1) << s))
        };
        let mut out = DenseComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let lc = gather(col);
            let rest = col & !mask;
            for lr in 0..local.rows() {
                let v = local[(lr, lc)];
                if v != C64::default() {
                    out[(rest | scatter(lr), col)] = v;
                }
            }
        }
        out
    }
}

/// Ordered gate list over `qubits` wires, some of which are marked as ancillae.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateCircuit {
    qubits: usize,
    ancillae: Vec<usize>,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            ancillae: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn with_ancillae(qubits: usize, ancillae: Vec<usize>) -> Result<Self, CircuitError> {
        ensure_distinct(ancillae.iter().copied())?;
        let mut c = Self::new(qubits);
        for &a in &ancillae {
            c.check(a)?;
        }
        c.ancillae = ancillae;
        c.ancillae.sort_unstable();
        Ok(c)
    }

    pub fn from_gates(qubits: usize, ancillae: Vec<usize>, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Self::with_ancillae(qubits, ancillae)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    fn check(&self, qubit: usize) -> Result<(), CircuitError> {
        if qubit >= self.qubits {
            return Err(CircuitError::QubitOutOfRange {
                qubit,
                qubits: self.qubits,
            });
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for q in gate.qubits() {
            self.check(q)?;
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &GateCircuit) -> Result<(), CircuitError> {
        if other.qubits != self.qubits {
            return Err(CircuitError::WidthMismatch(self.qubits, other.qubits));
        }
        self.gates.extend(other.gates.iter().cloned());
        for &a in &other.ancillae {
            if !self.ancillae.contains(&a) {
                self.ancillae.push(a);
            }
        }
        self.ancillae.sort_unstable();
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ancillae(&self) -> &[usize] {
        &self.ancillae
    }

    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.qubits).filter(|q| !self.ancillae.contains(q)).collect()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Moves old qubit `i` to `map[i]` in a circuit of width `width`.
    pub fn remap(&self, width: usize, map: &[usize]) -> Result<GateCircuit, CircuitError> {
        if map.len() != self.qubits {
            return Err(CircuitError::BadMap {
                expected: self.qubits,
                found: map.len(),
            });
        }
        GateCircuit::from_gates(
            width,
            self.ancillae.iter().map(|&a| map[a]).collect(),
            self.gates.iter().map(|g| g.remap(|q| map[q])).collect(),
        )
    }

    pub fn add_controls(&self, controls: &[Control]) -> Result<GateCircuit, CircuitError> {
        let gates = self
            .gates
            .iter()
            .map(|g| g.with_controls(controls))
            .collect::<Result<Vec<_>, _>>()?;
        GateCircuit::from_gates(self.qubits, self.ancillae.clone(), gates)
    }

    /// Reversed list of adjoint gates.
    pub fn adjoint(&self) -> GateCircuit {
        GateCircuit {
            qubits: self.qubits,
            ancillae: self.ancillae.clone(),
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    /// Drops explicit identity gates.
    pub fn without_identities(&self) -> GateCircuit {
        GateCircuit {
            qubits: self.qubits,
            ancillae: self.ancillae.clone(),
            gates: self.gates.iter().filter(|g| !g.is_identity_single()).cloned().collect(),
        }
    }

    /// Matrix product of every gate's full-width matrix. Quadratic memory, so
    /// only suitable as a small-width oracle.
    pub fn dense_product(&self) -> DenseComplexMatrix {
        self.gates
            .iter()
            .fold(DenseComplexMatrix::identity(1 << self.qubits), |acc, g| {
                g.dense(self.qubits).matmul(&acc).expect("square of equal size")
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcx_validation() {
        assert_eq!(
            Gate::mcx(0, vec![Control::open(0)]).unwrap_err(),
            CircuitError::RepeatedQubit(0)
        );
        assert_eq!(
            Gate::mcx(2, vec![Control::open(1), Control::closed(1)]).unwrap_err(),
            CircuitError::RepeatedQubit(1)
        );
        let g = Gate::mcx(0, vec![Control::closed(3), Control::open(1)]).unwrap();
        assert_eq!(g.qubits(), vec![1, 3, 0]);
    }

    #[test]
    fn opaque_validation() {
        let bad = DenseComplexMatrix::from_fn(2, 2, |_, _| c64(1.0, 0.0));
        assert!(matches!(Gate::opaque(vec![0], bad), Err(CircuitError::NotUnitary(_))));
        assert!(matches!(
            Gate::opaque(vec![0, 1], DenseComplexMatrix::identity(2)),
            Err(CircuitError::OpaqueShape { .. })
        ));
        assert!(Gate::opaque(vec![1, 0], DenseComplexMatrix::identity(4)).is_ok());
    }

    #[test]
    fn circuit_range_check() {
        let mut c = GateCircuit::new(2);
        assert!(c.push(Gate::x(1)).is_ok());
        assert_eq!(
            c.push(Gate::x(2)).unwrap_err(),
            CircuitError::QubitOutOfRange { qubit: 2, qubits: 2 }
        );
    }

    #[test]
    fn dense_of_cnot_uses_msb_first() {
        // Control qubit 0 (MSB), target 1: |10⟩ ↔ |11⟩.
        let g = Gate::mcx(1, vec![Control::closed(0)]).unwrap();
        let d = g.dense(2);
        let perm = [0, 1, 3, 2];
        for (c, &r) in perm.iter().enumerate() {
            assert_eq!(d[(r, c)], c64(1.0, 0.0));
        }
        let open = Gate::mcx(1, vec![Control::open(0)]).unwrap().dense(2);
        assert_eq!(open[(1, 0)], c64(1.0, 0.0));
        assert_eq!(open[(2, 2)], c64(1.0, 0.0));
    }

    #[test]
    fn rotations_are_unitary() {
        for g in [
            SingleQubitGate::Rx(0.7),
            SingleQubitGate::Ry(-1.3),
            SingleQubitGate::Z,
            SingleQubitGate::Y,
        ] {
            let m = g.matrix();
            let d = DenseComplexMatrix::from_fn(2, 2, |r, c| m[r][c]);
            assert!(d.is_unitary(1e-14));
        }
    }

    #[test]
    fn controlled_opaque_matches_mcx_for_x() {
        let x = DenseComplexMatrix::from_fn(2, 2, |r, c| if r != c { c64(1.0, 0.0) } else { C64::default() });
        let as_opaque = Gate::opaque(vec![2], x)
            .unwrap()
            .with_controls(&[Control::open(0)])
            .unwrap();
        let as_mcx = Gate::x(2).with_controls(&[Control::open(0)]).unwrap();
        assert!(matches!(as_mcx, Gate::MultiControlledX { .. }));
        assert!(as_opaque.dense(3).max_abs_diff(&as_mcx.dense(3)) < 1e-15);
    }

    #[test]
    fn adjoint_inverts() {
        let mut c = GateCircuit::new(2);
        c.push(Gate::single(0, SingleQubitGate::Ry(0.4))).unwrap();
        c.push(Gate::mcx(1, vec![Control::closed(0)]).unwrap()).unwrap();
        c.push(Gate::single(1, SingleQubitGate::Rx(-0.9))).unwrap();
        let mut round = c.clone();
        round.append(&c.adjoint()).unwrap();
        assert!(round.dense_product().max_abs_diff(&DenseComplexMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn remap_moves_qubits() {
        let mut c = GateCircuit::with_ancillae(2, vec![0]).unwrap();
        c.push(Gate::mcx(0, vec![Control::open(1)]).unwrap()).unwrap();
        let r = c.remap(3, &[2, 0]).unwrap();
        assert_eq!(r.ancillae(), &[2]);
        assert_eq!(r.gates()[0], Gate::mcx(2, vec![Control::open(0)]).unwrap());
    }
}
