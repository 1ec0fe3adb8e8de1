use std::collections::HashSet;

use super::{CircuitError, Control, Gate, GateCircuit, Polarity};
use crate::decompose::{PauliSymbol, SigmaSymbol, Term};
use crate::tensorcore::{c64, DenseComplexMatrix};

/// Non-empty product of Sigma symbols, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmaString(Vec<SigmaSymbol>);

impl SigmaString {
    pub fn new(symbols: Vec<SigmaSymbol>) -> Result<Self, CircuitError> {
        if symbols.is_empty() {
            return Err(CircuitError::EmptyString);
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[SigmaSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<&Term<SigmaSymbol>> for SigmaString {
    type Error = CircuitError;

    fn try_from(t: &Term<SigmaSymbol>) -> Result<Self, Self::Error> {
        SigmaString::new(t.string.clone())
    }
}

/// Raising and lowering positions become X, everything else I.
pub fn unitary_completion(s: &SigmaString) -> Vec<PauliSymbol> {
    s.0.iter()
        .map(|sym| if sym.flips() { PauliSymbol::X } else { PauliSymbol::I })
        .collect()
}

/// Factor-wise complement; `None` marks a position whose complement is zero (`I₂`).
pub fn orthogonal_complement(s: &SigmaString) -> Vec<Option<SigmaSymbol>> {
    s.0.iter()
        .map(|sym| match sym {
            SigmaSymbol::Plus => Some(SigmaSymbol::Minus),
            SigmaSymbol::Minus => Some(SigmaSymbol::Plus),
            SigmaSymbol::Pm => Some(SigmaSymbol::Mp),
            SigmaSymbol::Mp => Some(SigmaSymbol::Pm),
            SigmaSymbol::I2 => None,
        })
        .collect()
}

/// Dense `H_j`.
pub fn sigma_string_dense(s: &SigmaString) -> DenseComplexMatrix {
    Term::new(c64(1.0, 0.0), s.0.clone()).operator().to_dense()
}

fn completion_dense(s: &SigmaString) -> DenseComplexMatrix {
    Term::new(c64(1.0, 0.0), unitary_completion(s)).operator().to_dense()
}

/// `H_j′ = H̄_j − H_j`.
pub fn complement_dense(s: &SigmaString) -> DenseComplexMatrix {
    completion_dense(s)
        .sub(&sigma_string_dense(s))
        .expect("both are 2^n square")
}

/// X on the ancilla (qubit 0) and on each flipped system qubit (`1 + q`).
pub fn build_ujb(s: &SigmaString) -> GateCircuit {
    let mut c = GateCircuit::with_ancillae(s.len() + 1, vec![0]).expect("ancilla in range");
    c.push(Gate::x(0)).expect("in range");
    for (q, sym) in s.0.iter().enumerate() {
        if sym.flips() {
            c.push(Gate::x(1 + q)).expect("in range");
        }
    }
    c
}

/// Polarity that selects the rows `H_j` keeps after `H̄_j` has acted.
fn row_polarity(sym: SigmaSymbol) -> Option<Polarity> {
    match sym {
        SigmaSymbol::Plus | SigmaSymbol::Pm => Some(Polarity::Open),
        SigmaSymbol::Minus | SigmaSymbol::Mp => Some(Polarity::Closed),
        SigmaSymbol::I2 => None,
    }
}

/// One multi-controlled X on the ancilla; `I₂` positions carry no control.
pub fn build_uja(s: &SigmaString) -> GateCircuit {
    let controls: Vec<Control> =
        s.0.iter()
            .enumerate()
            .filter_map(|(q, &sym)| row_polarity(sym).map(|polarity| Control { qubit: 1 + q, polarity }))
            .collect();
    let gate = if controls.is_empty() {
        Gate::x(0)
    } else {
        Gate::mcx(0, controls).expect("distinct system controls")
    };
    GateCircuit::from_gates(s.len() + 1, vec![0], vec![gate]).expect("in range")
}

/// `U_{j,b}` followed by `U_{j,a}`.
pub fn build_uj(s: &SigmaString) -> GateCircuit {
    let mut c = build_ujb(s);
    c.append(&build_uja(s)).expect("same width");
    c
}

/// Rows of the diagonal projector `H_j H_jᵀ`, as `n`-bit patterns with qubit 0 as MSB.
pub fn hht_row_patterns(s: &SigmaString) -> Vec<usize> {
    s.0.iter().fold(vec![0usize], |acc, &sym| {
        let bits: &[usize] = match row_polarity(sym) {
            Some(p) => match p {
                Polarity::Open => &[0],
                Polarity::Closed => &[1],
            },
            None => &[0, 1],
        };
        acc.iter()
            .flat_map(|&prefix| bits.iter().map(move |&b| (prefix << 1) | b))
            .collect()
    })
}

/// One fully-controlled X on the ancilla per pattern: closed where the bit is 1.
pub fn row_pattern_synthesis(patterns: &[usize], n: usize) -> Result<GateCircuit, CircuitError> {
    let mut seen = HashSet::new();
    let mut c = GateCircuit::with_ancillae(n + 1, vec![0])?;
    for &p in patterns {
        if (n < usize::BITS as usize && p >> n != 0) || !seen.insert(p) {
            return Err(CircuitError::BadPattern { pattern: p, bits: n });
        }
        let controls = (0..n)
            .map(|q| {
                let bit = (p >> (n - 1 - q)) & 1;
                Control {
                    qubit: 1 + q,
                    polarity: if bit == 1 { Polarity::Closed } else { Polarity::Open },
                }
            })
            .collect();
        c.push(Gate::mcx(0, controls)?)?;
    }
    Ok(c)
}

enum Fusion {
    Cancel,
    Merge(Gate),
}

/// Fuses two adjacent controlled-X gates on the same target: identical gates cancel,
/// and gates that differ only in one control's polarity lose that control.
fn fuse(a: &Gate, b: &Gate) -> Option<Fusion> {
    let (ta, ca) = a.as_controlled_x()?;
    let (tb, cb) = b.as_controlled_x()?;
    if ta != tb || ca.len() != cb.len() {
        return None;
    }
    if ca == cb {
        return Some(Fusion::Cancel);
    }
    if ca.iter().zip(cb).any(|(x, y)| x.qubit != y.qubit) {
        return None;
    }
    let mut differing = ca
        .iter()
        .zip(cb)
        .enumerate()
        .filter(|(_, (x, y))| x.polarity != y.polarity);
    let (idx, _) = differing.next()?;
    if differing.next().is_some() {
        return None;
    }
    let rest: Vec<Control> = ca
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, &c)| c)
        .collect();
    Some(Fusion::Merge(if rest.is_empty() {
        Gate::x(ta)
    } else {
        Gate::mcx(ta, rest).expect("subset of valid controls")
    }))
}

/// Peephole pass applying [`fuse`] to adjacent pairs until nothing changes.
pub fn merge_cnx(c: &GateCircuit) -> GateCircuit {
    let mut out: Vec<Gate> = Vec::with_capacity(c.len());
    for g in c.gates() {
        let mut incoming = g.clone();
        loop {
            match out.last().and_then(|top| fuse(top, &incoming)) {
                Some(Fusion::Cancel) => {
                    out.pop();
                    break;
                }
                Some(Fusion::Merge(m)) => {
                    out.pop();
                    incoming = m;
                }
                None => {
                    out.push(incoming);
                    break;
                }
            }
        }
    }
    GateCircuit::from_gates(c.qubits(), c.ancillae().to_vec(), out).expect("qubits unchanged")
}
