use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::tensorcore::{c64, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Pauli,
    Sigma,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Pauli => "pauli",
            Basis::Sigma => "sigma",
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pauli" => Ok(Basis::Pauli),
            "sigma" => Ok(Basis::Sigma),
            other => Err(format!("unknown basis '{other}'")),
        }
    }
}

/// Single-qubit operator from one of the decomposition alphabets. Every symbol
/// has at most one nonzero per column, so it is described by its column action.
pub trait Symbol: Copy + Eq + Ord + Hash + Debug + Send + Sync + 'static {
    const BASIS: Basis;
    /// Joins symbol labels when a string is printed.
    const SEPARATOR: &'static str;

    fn label(self) -> &'static str;
    fn parse(s: &str) -> Option<Self>;
    fn all() -> &'static [Self];

    /// Image of `|col_bit⟩`: the row bit and matrix element, or `None` if the column is zero.
    fn act(self, col_bit: usize) -> Option<(usize, C64)>;

    fn element(self, row: usize, col: usize) -> C64 {
        match self.act(col) {
            Some((r, v)) if r == row => v,
            _ => C64::default(),
        }
    }

    fn format_string(string: &[Self]) -> String {
        string
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(Self::SEPARATOR)
    }

    fn parse_string(text: &str) -> Option<Vec<Self>> {
        if text.is_empty() {
            return Some(Vec::new());
        }
        if Self::SEPARATOR.is_empty() {
            text.chars()
                .map(|ch| Self::parse(ch.encode_utf8(&mut [0; 4])))
                .collect()
        } else {
            text.split(Self::SEPARATOR).map(|t| Self::parse(t.trim())).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliSymbol {
    I,
    X,
    Y,
    Z,
}

impl PauliSymbol {
    /// `(x, z)` bits with `P ∝ X^x Z^z`.
    pub fn xz(self) -> (bool, bool) {
        match self {
            PauliSymbol::I => (false, false),
            PauliSymbol::X => (true, false),
            PauliSymbol::Y => (true, true),
            PauliSymbol::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliSymbol::I,
            (true, false) => PauliSymbol::X,
            (true, true) => PauliSymbol::Y,
            (false, true) => PauliSymbol::Z,
        }
    }
}

impl Symbol for PauliSymbol {
    const BASIS: Basis = Basis::Pauli;
    const SEPARATOR: &'static str = "";

    fn label(self) -> &'static str {
        match self {
            PauliSymbol::I => "I",
            PauliSymbol::X => "X",
            PauliSymbol::Y => "Y",
            PauliSymbol::Z => "Z",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "I" => Some(PauliSymbol::I),
            "X" => Some(PauliSymbol::X),
            "Y" => Some(PauliSymbol::Y),
            "Z" => Some(PauliSymbol::Z),
            _ => None,
        }
    }

    fn all() -> &'static [Self] {
        &[PauliSymbol::I, PauliSymbol::X, PauliSymbol::Y, PauliSymbol::Z]
    }

    fn act(self, col: usize) -> Option<(usize, C64)> {
        let sign = if col == 1 { -1.0 } else { 1.0 };
        Some(match self {
            PauliSymbol::I => (col, c64(1.0, 0.0)),
            PauliSymbol::X => (1 - col, c64(1.0, 0.0)),
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
            PauliSymbol::Y => (1 - col, c64(0.0, sign)),
            PauliSymbol::Z => (col, c64(sign, 0.0)),
        })
    }
}

/// `PLUS = |0⟩⟨1|`, `MINUS = |1⟩⟨0|`, `PM = |0⟩⟨0|`, `MP = |1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SigmaSymbol {
    I2,
    Plus,
    Minus,
    Pm,
    Mp,
}

impl SigmaSymbol {
    /// Symbol whose only nonzero is at `(row_bit, col_bit)`.
    pub fn from_bits(row: usize, col: usize) -> Self {
        match (row, col) {
            (0, 0) => SigmaSymbol::Pm,
            (1, 1) => SigmaSymbol::Mp,
            (0, 1) => SigmaSymbol::Plus,
            (1, 0) => SigmaSymbol::Minus,
            _ => panic!("bits must be 0 or 1"),
        }
    }

    /// True for the raising and lowering symbols, which flip the bit they act on.
    pub fn flips(self) -> bool {
        matches!(self, SigmaSymbol::Plus | SigmaSymbol::Minus)
    }
}

impl Symbol for SigmaSymbol {
    const BASIS: Basis = Basis::Sigma;
    const SEPARATOR: &'static str = ",";

    fn label(self) -> &'static str {
        match self {
            SigmaSymbol::I2 => "I2",
            SigmaSymbol::Plus => "PLUS",
            SigmaSymbol::Minus => "MINUS",
            SigmaSymbol::Pm => "PM",
            SigmaSymbol::Mp => "MP",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I2" | "I" => Some(SigmaSymbol::I2),
            "PLUS" => Some(SigmaSymbol::Plus),
            "MINUS" => Some(SigmaSymbol::Minus),
            "PM" => Some(SigmaSymbol::Pm),
            "MP" => Some(SigmaSymbol::Mp),
            _ => None,
        }
    }

    fn all() -> &'static [Self] {
        &[
            SigmaSymbol::I2,
            SigmaSymbol::Plus,
            SigmaSymbol::Minus,
            SigmaSymbol::Pm,
            SigmaSymbol::Mp,
        ]
    }

    fn act(self, col: usize) -> Option<(usize, C64)> {
        let one = c64(1.0, 0.0);
        match (self, col) {
            (SigmaSymbol::I2, c) => Some((c, one)),
            (SigmaSymbol::Plus, 1) => Some((0, one)),
            (SigmaSymbol::Minus, 0) => Some((1, one)),
            (SigmaSymbol::Pm, 0) => Some((0, one)),
            (SigmaSymbol::Mp, 1) => Some((1, one)),
            _ => None,
        }
    }
}

/// Column action of a whole string, qubit 0 being the most significant bit.
pub fn string_act<S: Symbol>(string: &[S], col: usize) -> Option<(usize, C64)> {
    let n = string.len();
    let mut row = 0usize;
    let mut value = c64(1.0, 0.0);
    for (q, s) in string.iter().enumerate() {
        let shift = n - 1 - q;
        let (r, v) = s.act((col >> shift) & 1)?;
        row |= r << shift;
        value *= v;
    }
    Some((row, value))
}
