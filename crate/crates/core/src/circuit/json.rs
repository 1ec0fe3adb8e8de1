use serde::{Deserialize, Serialize};

use super::{CircuitError, Control, Gate, GateCircuit, Polarity, SingleQubitGate};
use crate::tensorcore::SparseComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GateJson {
    I {
        target: usize,
    },
    X {
        target: usize,
    },
    Y {
        target: usize,
    },
    Z {
        target: usize,
    },
    Rx {
        target: usize,
        theta: f64,
    },
    Ry {
        target: usize,
        theta: f64,
    },
    Mcx {
        target: usize,
        controls: Vec<(usize, Polarity)>,
    },
    Opaque {
        qubits: Vec<usize>,
        matrix: SparseComplexMatrix,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub qubits: usize,
    #[serde(default)]
    pub ancilla: Vec<usize>,
    pub gates: Vec<GateJson>,
}

impl From<&Gate> for GateJson {
    fn from(g: &Gate) -> Self {
        match g {
            &Gate::Single { target, gate } => match gate {
                SingleQubitGate::I => GateJson::I { target },
                SingleQubitGate::X => GateJson::X { target },
                SingleQubitGate::Y => GateJson::Y { target },
                SingleQubitGate::Z => GateJson::Z { target },
                SingleQubitGate::Rx(theta) => GateJson::Rx { target, theta },
                SingleQubitGate::Ry(theta) => GateJson::Ry { target, theta },
            },
            Gate::MultiControlledX { target, controls } => GateJson::Mcx {
                target: *target,
                controls: controls.iter().map(|c| (c.qubit, c.polarity)).collect(),
            },
            Gate::Opaque { qubits, matrix } => GateJson::Opaque {
                qubits: qubits.clone(),
                matrix: SparseComplexMatrix::from_dense(matrix),
            },
        }
    }
}

impl TryFrom<&GateJson> for Gate {
    type Error = CircuitError;

    fn try_from(g: &GateJson) -> Result<Self, Self::Error> {
        let single = |target: usize, gate| Ok(Gate::single(target, gate));
        match g {
            &GateJson::I { target } => single(target, SingleQubitGate::I),
            &GateJson::X { target } => single(target, SingleQubitGate::X),
            &GateJson::Y { target } => single(target, SingleQubitGate::Y),
            &GateJson::Z { target } => single(target, SingleQubitGate::Z),
            &GateJson::Rx { target, theta } => single(target, SingleQubitGate::Rx(theta)),
            &GateJson::Ry { target, theta } => single(target, SingleQubitGate::Ry(theta)),
            GateJson::Mcx { target, controls } => Gate::mcx(
                *target,
                controls
                    .iter()
                    .map(|&(qubit, polarity)| Control { qubit, polarity })
                    .collect(),
            ),
            GateJson::Opaque { qubits, matrix } => Gate::opaque(qubits.clone(), matrix.to_dense()),
        }
    }
}

impl From<&GateCircuit> for CircuitJson {
    fn from(c: &GateCircuit) -> Self {
        CircuitJson {
            qubits: c.qubits(),
            ancilla: c.ancillae().to_vec(),
            gates: c.gates().iter().map(GateJson::from).collect(),
        }
    }
}

impl TryFrom<&CircuitJson> for GateCircuit {
    type Error = CircuitError;

    fn try_from(c: &CircuitJson) -> Result<Self, Self::Error> {
        let gates = c.gates.iter().map(Gate::try_from).collect::<Result<Vec<_>, _>>()?;
        GateCircuit::from_gates(c.qubits, c.ancilla.clone(), gates)
    }
}

impl Serialize for GateCircuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CircuitJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = CircuitJson::deserialize(d)?;
        GateCircuit::try_from(&json).map_err(serde::de::Error::custom)
    }
}
