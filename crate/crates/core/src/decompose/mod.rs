//! Weighted-string decompositions of `2^n × 2^n` matrices in the Pauli and Sigma alphabets.

mod symbols;

pub use symbols::{string_act, Basis, PauliSymbol, SigmaSymbol, Symbol};

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorcore::{c64, SparseComplexMatrix, TensorError, C64, ZERO_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("matrix is {rows}x{cols}; expected a square power-of-two dimension")]
    NotPowerOfTwo { rows: usize, cols: usize },
    #[error("string '{string}' has length {found}, expected {expected}")]
    StringLength {
        string: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate string '{0}'")]
    DuplicateString(String),
    #[error("cannot parse '{0}' as a {1} string")]
    BadString(String, &'static str),
    #[error("expected a {expected} decomposition, found {found}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("qubit count {0} is too large")]
    TooManyQubits(usize),
}

/// `log2` of a square power-of-two dimension.
pub fn qubit_count(m: &SparseComplexMatrix) -> Result<usize, DecomposeError> {
    let (rows, cols) = m.shape();
    if rows != cols || !rows.is_power_of_two() {
        return Err(DecomposeError::NotPowerOfTwo { rows, cols });
    }
    Ok(rows.trailing_zeros() as usize)
}

/// Zero-pads to the smallest square power-of-two shape containing `m`.
pub fn pad_to_power_of_two(m: &SparseComplexMatrix) -> Result<SparseComplexMatrix, DecomposeError> {
    let dim = m.rows().max(m.cols()).max(1);
    let target = dim
        .checked_next_power_of_two()
        .ok_or(TensorError::DimensionOverflow("padding"))?;
    Ok(m.padded(target, target)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term<S> {
    pub coeff: C64,
    pub string: Vec<S>,
}

impl<S: Symbol> Term<S> {
    pub fn new(coeff: C64, string: Vec<S>) -> Self {
        Self { coeff, string }
    }

    pub fn label(&self) -> String {
        S::format_string(&self.string)
    }

    /// The string operator without its coefficient.
    pub fn operator(&self) -> SparseComplexMatrix {
        let dim = 1usize << self.string.len();
        SparseComplexMatrix::new(
            dim,
            dim,
            (0..dim).filter_map(|c| string_act(&self.string, c).map(|(r, v)| (r, c, v))),
        )
        .expect("a string acts on each column at most once")
    }
}

/// `H = Σ_j α_j S_j` over distinct strings of one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDecomposition<S> {
    n: usize,
    terms: Vec<Term<S>>,
}

impl<S: Symbol> TermDecomposition<S> {
    /// Drops negligible coefficients; rejects wrong lengths and repeated strings.
    pub fn new(n: usize, terms: Vec<Term<S>>) -> Result<Self, DecomposeError> {
        if n >= usize::BITS as usize {
            return Err(DecomposeError::TooManyQubits(n));
        }
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::with_capacity(terms.len());
        for t in terms {
            if t.string.len() != n {
                return Err(DecomposeError::StringLength {
                    string: t.label(),
                    expected: n,
                    found: t.string.len(),
                });
            }
            if !seen.insert(t.string.clone()) {
                return Err(DecomposeError::DuplicateString(t.label()));
            }
            if t.coeff.norm() >= ZERO_TOL {
                kept.push(t);
            }
        }
        Ok(Self { n, terms: kept })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn terms(&self) -> &[Term<S>] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term<S>> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn basis(&self) -> Basis {
        S::BASIS
    }

    /// `Σ |α_j|`.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn coefficient(&self, string: &[S]) -> C64 {
        self.terms
            .iter()
            .find(|t| t.string == string)
            .map(|t| t.coeff)
            .unwrap_or_default()
    }

    /// Coefficient keyed by printed string, convenient for comparisons.
    pub fn to_map(&self) -> BTreeMap<String, C64> {
        self.terms.iter().map(|t| (t.label(), t.coeff)).collect()
    }

    /// `Σ α_j · (⊗ symbols)`.
    pub fn reconstruct(&self) -> SparseComplexMatrix {
        let dim = self.dim();
        let entries = self
            .terms
            .iter()
            .flat_map(|t| (0..dim).filter_map(move |c| string_act(&t.string, c).map(|(r, v)| (r, c, v * t.coeff))));
        SparseComplexMatrix::accumulate(dim, dim, entries).expect("indices lie inside the register")
    }
}

/// Pauli string with bit masks: bit `n−1−q` of `x`/`z` describes qubit `q`.
fn pauli_from_masks(n: usize, x: usize, z: usize) -> Vec<PauliSymbol> {
    (0..n)
        .map(|q| {
            let bit = 1 << (n - 1 - q);
            PauliSymbol::from_xz(x & bit != 0, z & bit != 0)
        })
        .collect()
}

/// `P_{x,z}[c ⊕ x][c] = i^{|x∧z|} (−1)^{|z∧c|}`.
fn pauli_element(x: usize, z: usize, col: usize) -> C64 {
    let mut v = match (x & z).count_ones() % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, 1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, -1.0),
    };
    if (z & col).count_ones() % 2 == 1 {
        v = -v;
    }
    v
}

/// Trace-inner-product coefficients `Tr(P†H)/2^n`. Each Pauli string is a signed
/// permutation with row `c ⊕ x`, so only strings whose `x` mask occurs among the
/// nonzeros of `h` can contribute; each such string costs one pass over that group.
pub fn pauli_decompose(h: &SparseComplexMatrix) -> Result<TermDecomposition<PauliSymbol>, DecomposeError> {
    let n = qubit_count(h)?;
    let dim = 1usize << n;
    let mut groups: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
    for &(r, c, v) in h.entries() {
        groups.entry(r ^ c).or_default().push((c, v));
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let mut terms: Vec<Term<PauliSymbol>> = groups
        .par_iter()
        .flat_map_iter(|(x, entries)| {
            let x = *x;
            (0..dim).filter_map(move |z| {
                let acc: C64 = entries.iter().map(|&(c, v)| pauli_element(x, z, c).conj() * v).sum();
                let coeff = acc / dim as f64;
                (coeff.norm() >= ZERO_TOL).then(|| Term::new(coeff, pauli_from_masks(n, x, z)))
            })
        })
        .collect();
    terms.sort_by(|a, b| a.string.cmp(&b.string));
    TermDecomposition::new(n, terms)
}

/// One term per nonzero entry, each a product of single-entry outer products.
pub fn sigma_decompose(h: &SparseComplexMatrix) -> Result<TermDecomposition<SigmaSymbol>, DecomposeError> {
    let n = qubit_count(h)?;
    let terms = h
        .entries()
        .iter()
        .map(|&(r, c, v)| {
            let string = (0..n)
                .map(|q| {
                    let shift = n - 1 - q;
                    SigmaSymbol::from_bits((r >> shift) & 1, (c >> shift) & 1)
                })
                .collect();
            Term::new(v, string)
        })
        .collect();
    TermDecomposition::new(n, terms)
}

fn coeffs_match(a: C64, b: C64) -> bool {
    (a - b).norm() <= ZERO_TOL * (1.0 + a.norm().max(b.norm()))
}

/// Greedily fuses `c·(…PM…) + c·(…MP…)` into `c·(…I₂…)` until no pair remains.
pub fn merge_identity_pairs(d: &TermDecomposition<SigmaSymbol>) -> TermDecomposition<SigmaSymbol> {
    let mut terms = d.terms.clone();
    loop {
        let index: HashMap<Vec<SigmaSymbol>, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.string.clone(), i)).collect();
        let mut used = vec![false; terms.len()];
        let mut next: Vec<Term<SigmaSymbol>> = Vec::with_capacity(terms.len());
        let mut merged_any = false;
        for i in 0..terms.len() {
            if used[i] {
                continue;
            }
            let partner = terms[i].string.iter().enumerate().find_map(|(q, s)| {
                if *s != SigmaSymbol::Pm {
                    return None;
                }
                let mut other = terms[i].string.clone();
                other[q] = SigmaSymbol::Mp;
                let &j = index.get(&other)?;
                (!used[j] && coeffs_match(terms[i].coeff, terms[j].coeff)).then_some((q, j))
            });
            used[i] = true;
            match partner {
                Some((q, j)) => {
                    used[j] = true;
                    let mut string = terms[i].string.clone();
                    string[q] = SigmaSymbol::I2;
                    next.push(Term::new(terms[i].coeff, string));
                    merged_any = true;
                }
                None => next.push(terms[i].clone()),
            }
        }
        terms = fold_duplicates(next);
        if !merged_any {
            break;
        }
    }
    TermDecomposition::new(d.n, terms).expect("merging preserves length and uniqueness")
}

/// Sums coefficients of repeated strings, keeping first-occurrence order.
fn fold_duplicates<S: Symbol>(terms: Vec<Term<S>>) -> Vec<Term<S>> {
    let mut out: Vec<Term<S>> = Vec::with_capacity(terms.len());
    let mut at: HashMap<Vec<S>, usize> = HashMap::new();
    for t in terms {
        match at.get(&t.string) {
            Some(&k) => out[k].coeff += t.coeff,
            None => {
                at.insert(t.string.clone(), out.len());
                out.push(t);
            }
        }
    }
    out.retain(|t| t.coeff.norm() >= ZERO_TOL);
    out
}

/// Either alphabet, as read from or written to terms JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDecomposition {
    Pauli(TermDecomposition<PauliSymbol>),
    Sigma(TermDecomposition<SigmaSymbol>),
}

impl AnyDecomposition {
    pub fn basis(&self) -> Basis {
        match self {
            AnyDecomposition::Pauli(_) => Basis::Pauli,
            AnyDecomposition::Sigma(_) => Basis::Sigma,
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            AnyDecomposition::Pauli(d) => d.qubits(),
            AnyDecomposition::Sigma(d) => d.qubits(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyDecomposition::Pauli(d) => d.len(),
            AnyDecomposition::Sigma(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reconstruct(&self) -> SparseComplexMatrix {
        match self {
            AnyDecomposition::Pauli(d) => d.reconstruct(),
            AnyDecomposition::Sigma(d) => d.reconstruct(),
        }
    }

    pub fn one_norm(&self) -> f64 {
        match self {
            AnyDecomposition::Pauli(d) => d.one_norm(),
            AnyDecomposition::Sigma(d) => d.one_norm(),
        }
    }

    pub fn decompose(h: &SparseComplexMatrix, basis: Basis, merge: bool) -> Result<Self, DecomposeError> {
        Ok(match basis {
            Basis::Pauli => AnyDecomposition::Pauli(pauli_decompose(h)?),
            Basis::Sigma => {
                let d = sigma_decompose(h)?;
                AnyDecomposition::Sigma(if merge { merge_identity_pairs(&d) } else { d })
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: (f64, f64),
    pub string: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermsJson {
    pub n: usize,
    pub basis: Basis,
    pub terms: Vec<TermJson>,
}

impl<S: Symbol> From<&TermDecomposition<S>> for TermsJson {
    fn from(d: &TermDecomposition<S>) -> Self {
        TermsJson {
            n: d.n,
            basis: S::BASIS,
            terms: d
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: (t.coeff.re, t.coeff.im),
                    string: t.label(),
                })
                .collect(),
        }
    }
}

fn parse_terms<S: Symbol>(json: &TermsJson) -> Result<TermDecomposition<S>, DecomposeError> {
    if json.basis != S::BASIS {
        return Err(DecomposeError::BasisMismatch {
            expected: S::BASIS.as_str(),
            found: json.basis.as_str(),
        });
    }
    let terms = json
        .terms
        .iter()
        .map(|t| {
            let string = S::parse_string(&t.string)
                .ok_or_else(|| DecomposeError::BadString(t.string.clone(), S::BASIS.as_str()))?;
            Ok(Term::new(c64(t.coeff.0, t.coeff.1), string))
        })
        .collect::<Result<Vec<_>, DecomposeError>>()?;
    TermDecomposition::new(json.n, terms)
}

impl TryFrom<&TermsJson> for AnyDecomposition {
    type Error = DecomposeError;

    fn try_from(json: &TermsJson) -> Result<Self, Self::Error> {
        Ok(match json.basis {
            Basis::Pauli => AnyDecomposition::Pauli(parse_terms(json)?),
            Basis::Sigma => AnyDecomposition::Sigma(parse_terms(json)?),
        })
    }
}

impl From<&AnyDecomposition> for TermsJson {
    fn from(d: &AnyDecomposition) -> Self {
        match d {
            AnyDecomposition::Pauli(d) => d.into(),
            AnyDecomposition::Sigma(d) => d.into(),
        }
    }
}

impl Serialize for AnyDecomposition {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        TermsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnyDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = TermsJson::deserialize(d)?;
        AnyDecomposition::try_from(&json).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermCountRow {
    pub label: String,
    pub dim: usize,
    pub nnz: usize,
    pub pauli_terms: usize,
    pub sigma_terms: usize,
}

/// Pauli and Sigma term counts for each labelled matrix, after zero-padding.
pub fn term_count_study(inputs: &[(String, SparseComplexMatrix)]) -> Result<Vec<TermCountRow>, DecomposeError> {
    inputs
        .par_iter()
        .map(|(label, m)| {
            let padded = pad_to_power_of_two(m)?;
            Ok(TermCountRow {
                label: label.clone(),
                dim: padded.rows(),
                nnz: padded.nnz(),
                pauli_terms: pauli_decompose(&padded)?.len(),
                sigma_terms: sigma_decompose(&padded)?.len(),
            })
        })
        .collect()
}

/// Matrices used throughout the worked examples.
pub mod examples {
    use crate::tensorcore::{c64, DenseComplexMatrix, SparseComplexMatrix};

    fn real(rows: [[f64; 4]; 4]) -> SparseComplexMatrix {
        let values = rows.iter().flatten().map(|&v| c64(v, 0.0)).collect();
        SparseComplexMatrix::from_dense(&DenseComplexMatrix::new(4, 4, values).expect("4x4"))
    }

    /// Two-qubit Hermitian matrix with four Pauli terms.
    pub fn hermitian_h() -> SparseComplexMatrix {
        real([[1.0, 0.0, 0.0, 0.5], [0.0; 4], [0.0; 4], [0.5, 0.0, 0.0, -1.0]])
    }

    pub fn a1() -> SparseComplexMatrix {
        real([[2.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0, 0.0, 0.0, 7.0]])
    }

    pub fn a2() -> SparseComplexMatrix {
        real([
            [1.0, 0.0, 0.0, 0.0],
            [4.0, 0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0, 0.0],
            [1.0, -2.0, 1.0, -1.0],
        ])
    }

    pub fn a3() -> SparseComplexMatrix {
        real([
            [1.0, 0.0, 0.0, 0.0],
            [4.0, 3.0, 0.0, 0.0],
            [2.0, -2.0, 2.0, 0.0],
            [1.0, 1.0, -1.0, 1.0],
        ])
    }
}
