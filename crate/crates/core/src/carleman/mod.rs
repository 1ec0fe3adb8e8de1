//! Carleman embedding of polynomial ODEs.
//!
//! A model `dΦ/dt = M₀ + M₁Φ + Σ_k M_k Φ^{⊗k}` is lifted to the linear system on
//! `y_j = Φ^{⊗j}` and truncated at order `N`. The truncated matrix couples block row
//! `j` to block columns `j−1 ..= j+p−1`; the constant term feeds block row 1 as a
//! forcing vector.

mod integrate;
mod json;
mod study;

pub use integrate::{integrate, integrate_model, integrate_nonlinear, rk4_step, Trajectory};
pub use json::{Scalar, SystemJson, SystemJsonError};
pub use study::{convergence_study, ConvergenceRow, FineReference, Reference};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorcore::{checked_pow, identity_padded_embed, kron_power_vec, SparseComplexMatrix, TensorError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarlemanError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("dimension overflow: {0}")]
    Overflow(&'static str),
    #[error("state dimension and truncation order must be at least 1")]
    ZeroSize,
    #[error("coefficient M_{k} has shape {found:?}, expected {expected:?}")]
    CoefficientShape {
        k: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("polynomial degree must be at least 1")]
    ZeroDegree,
    #[error("initial state has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("time span must be finite with t_end >= t_start")]
    BadSpan,
}

/// `Σ_{i=1..N} d^i`, which equals `d(d^N − 1)/(d − 1)` for `d ≥ 2`.
pub fn carleman_dimension(d: usize, order: usize) -> Result<usize, CarlemanError> {
    if d == 0 || order == 0 {
        return Err(CarlemanError::ZeroSize);
    }
    let mut total = 0usize;
    let mut power = 1usize;
    for _ in 0..order {
        power = power
            .checked_mul(d)
            .ok_or(CarlemanError::Overflow("carleman dimension"))?;
        total = total
            .checked_add(power)
            .ok_or(CarlemanError::Overflow("carleman dimension"))?;
    }
    Ok(total)
}

/// Expected shape of `M_k` for an `n`-dimensional state.
fn coefficient_shape(n: usize, k: usize) -> Result<(usize, usize), CarlemanError> {
    Ok((n, checked_pow(n, k, "coefficient columns")?))
}

/// `Σ_{i=1..j} I_n^{⊗(i−1)} ⊗ M_k ⊗ I_n^{⊗(j−i)}`, mapping `y_{k+j−1}` into `dy_j/dt`.
pub fn transfer_operator(
    m_k: &SparseComplexMatrix,
    k: usize,
    j: usize,
    n: usize,
) -> Result<SparseComplexMatrix, CarlemanError> {
    if n == 0 || j == 0 {
        return Err(CarlemanError::ZeroSize);
    }
    let expected = coefficient_shape(n, k)?;
    if m_k.shape() != expected {
        return Err(CarlemanError::CoefficientShape {
            k,
            expected,
            found: m_k.shape(),
        });
    }
    let rows = checked_pow(n, j, "transfer rows")?;
    let cols = checked_pow(n, k + j - 1, "transfer cols")?;
    let mut acc: Vec<(usize, usize, C64)> = Vec::new();
    for i in 1..=j {
        let e = identity_padded_embed(m_k, i - 1, j - i, n)?;
        acc.extend_from_slice(e.entries());
    }
    Ok(SparseComplexMatrix::accumulate(rows, cols, acc)?)
}

/// Coefficients `M_0 ..= M_p` frozen at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSystem {
    state_dim: usize,
    coefficients: Vec<SparseComplexMatrix>,
}

impl PolynomialSystem {
    /// `coefficients[k]` is `M_k`; `M_0` is `n x 1` and `M_k` is `n x n^k`.
    pub fn new(state_dim: usize, coefficients: Vec<SparseComplexMatrix>) -> Result<Self, CarlemanError> {
        if state_dim == 0 {
            return Err(CarlemanError::ZeroSize);
        }
        if coefficients.len() < 2 {
            return Err(CarlemanError::ZeroDegree);
        }
        for (k, m) in coefficients.iter().enumerate() {
            let expected = coefficient_shape(state_dim, k)?;
            if m.shape() != expected {
                return Err(CarlemanError::CoefficientShape {
                    k,
                    expected,
                    found: m.shape(),
                });
            }
        }
        Ok(Self {
            state_dim,
            coefficients,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> &SparseComplexMatrix {
        &self.coefficients[k]
    }

    pub fn coefficients(&self) -> &[SparseComplexMatrix] {
        &self.coefficients
    }

    /// Right-hand side of the original nonlinear ODE.
    pub fn rhs(&self, phi: &[C64]) -> Result<Vec<C64>, CarlemanError> {
        if phi.len() != self.state_dim {
            return Err(CarlemanError::StateLength {
                expected: self.state_dim,
                found: phi.len(),
            });
        }
        let mut out = vec![C64::default(); self.state_dim];
        for (k, m) in self.coefficients.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let monomials = kron_power_vec(phi, k);
            for (o, v) in out.iter_mut().zip(m.matvec(&monomials)?) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// One coefficient contribution `t^time_power · matrix` to `M_order(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTerm {
    #[serde(rename = "k")]
    pub order: usize,
    #[serde(default, rename = "t_power", skip_serializing_if = "is_zero_u32")]
    pub time_power: u32,
    pub matrix: SparseComplexMatrix,
}

fn is_zero_u32(x: &u32) -> bool {
    *x == 0
}

/// Polynomial ODE whose coefficients are polynomials in time,
/// `M_k(t) = Σ_m t^m · M_{k,m}`. Autonomous models only use `m = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    state_dim: usize,
    degree: usize,
    terms: Vec<CoefficientTerm>,
}

impl PolynomialModel {
    pub fn new(state_dim: usize, degree: usize, terms: Vec<CoefficientTerm>) -> Result<Self, CarlemanError> {
        if state_dim == 0 {
            return Err(CarlemanError::ZeroSize);
        }
        if degree == 0 {
            return Err(CarlemanError::ZeroDegree);
        }
        for t in &terms {
            let expected = coefficient_shape(state_dim, t.order)?;
            if t.order > degree || t.matrix.shape() != expected {
                return Err(CarlemanError::CoefficientShape {
                    k: t.order,
                    expected,
                    found: t.matrix.shape(),
                });
            }
        }
        Ok(Self {
            state_dim,
            degree,
            terms,
        })
    }

    pub fn autonomous(system: PolynomialSystem) -> Self {
        let degree = system.degree();
        let state_dim = system.state_dim;
        let terms = system
            .coefficients
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(order, matrix)| CoefficientTerm {
                order,
                time_power: 0,
                matrix,
            })
            .collect();
        Self {
            state_dim,
            degree,
            terms,
        }
    }

    /// Scalar Bernoulli model `y' = −P(t)·y + Q(t)·y²` with `P = 2t`, `Q = 2t³`.
    /// With `y(0) = 1` the exact solution is `1 / (1 + t²)`.
    pub fn bernoulli_demo() -> Self {
        let scalar = |v: f64| SparseComplexMatrix::new(1, 1, [(0, 0, C64::new(v, 0.0))]).expect("1x1");
        Self::new(
            1,
            2,
            vec![
                CoefficientTerm {
                    order: 1,
                    time_power: 1,
                    matrix: scalar(-2.0),
                },
                CoefficientTerm {
                    order: 2,
                    time_power: 3,
                    matrix: scalar(2.0),
                },
            ],
        )
        .expect("valid model")
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[CoefficientTerm] {
        &self.terms
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms.iter().any(|t| t.time_power > 0)
    }

    /// Coefficients evaluated at time `t`.
    pub fn at(&self, t: f64) -> PolynomialSystem {
        let mut coefficients: Vec<SparseComplexMatrix> = (0..=self.degree)
            .map(|k| {
                let (r, c) = coefficient_shape(self.state_dim, k).expect("validated on construction");
                SparseComplexMatrix::zeros(r, c)
            })
            .collect();
        for term in &self.terms {
            let weight = t.powi(term.time_power as i32);
            let scaled = term.matrix.scale(C64::new(weight, 0.0));
            coefficients[term.order] = coefficients[term.order].add(&scaled).expect("shapes validated");
        }
        PolynomialSystem {
            state_dim: self.state_dim,
            coefficients,
        }
    }

    /// Appends time as an extra state `x` with `ẋ = 1`, turning every `t^m M_k Φ^{⊗k}`
    /// into the degree-`k+m` monomial `Φ^{⊗k} ⊗ x^{⊗m}` of the extended state `[Φ; x]`.
    /// The new state starts at the initial time, so `[phi0; t0]` is the matching initial value.
    pub fn autonomize(&self) -> Result<PolynomialModel, CarlemanError> {
        let n = self.state_dim;
        let ext = n + 1;
        let degree = self
            .terms
            .iter()
            .map(|t| t.order + t.time_power as usize)
            .max()
            .unwrap_or(1)
            .max(1);
        let mut terms = Vec::with_capacity(self.terms.len() + 1);
        for term in &self.terms {
            let k = term.order;
            let m = term.time_power as usize;
            let new_order = k + m;
            let cols = checked_pow(ext, new_order, "autonomized coefficient columns")?;
            let x_tail = (0..m).fold(0usize, |acc, _| acc * ext + n);
            let x_tail_scale = checked_pow(ext, m, "autonomized coefficient columns")?;
            let entries = term.matrix.entries().iter().map(|&(row, col, v)| {
                // Re-express the base-n column digits of Φ^{⊗k} in base n+1.
                let mut digits = Vec::with_capacity(k);
                let mut rest = col;
                for _ in 0..k {
                    digits.push(rest % n);
                    rest /= n;
                }
                let head = digits.iter().rev().fold(0usize, |acc, &d| acc * ext + d);
                (row, head * x_tail_scale + x_tail, v)
            });
            terms.push(CoefficientTerm {
                order: new_order,
                time_power: 0,
                matrix: SparseComplexMatrix::new(ext, cols, entries)?,
            });
        }
        terms.push(CoefficientTerm {
            order: 0,
            time_power: 0,
            matrix: SparseComplexMatrix::new(ext, 1, [(n, 0, C64::new(1.0, 0.0))])?,
        });
        // Terms may share an order after the shift; fold them together.
        let mut merged: Vec<CoefficientTerm> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.order == t.order) {
                Some(m) => m.matrix = m.matrix.add(&t.matrix)?,
                None => merged.push(t),
            }
        }
        merged.sort_by_key(|t| t.order);
        PolynomialModel::new(ext, degree, merged)
    }
}

/// Truncated Carleman system `ẏ = A·y + f` on `D = Σ n^j` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanSystem {
    order: usize,
    state_dim: usize,
    matrix: SparseComplexMatrix,
    forcing: Vec<C64>,
    offsets: Vec<usize>,
}

impl CarlemanSystem {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &SparseComplexMatrix {
        &self.matrix
    }

    /// Constant term; only block row 1 can be nonzero.
    pub fn forcing(&self) -> &[C64] {
        &self.forcing
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Index range of block `j` (1-based).
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        block_range(&self.offsets, self.dimension(), j)
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Block `(row j, col m)` of the matrix, both 1-based.
    pub fn block(&self, j: usize, m: usize) -> SparseComplexMatrix {
        let rr = self.block_range(j);
        let cr = self.block_range(m);
        SparseComplexMatrix::new(
            rr.len(),
            cr.len(),
            self.matrix
                .entries()
                .iter()
                .filter(|&&(r, c, _)| rr.contains(&r) && cr.contains(&c))
                .map(|&(r, c, v)| (r - rr.start, c - cr.start, v)),
        )
        .expect("sub-block of a valid matrix")
    }

    /// `A·y + f`.
    pub fn derivative(&self, y: &[C64]) -> Result<Vec<C64>, CarlemanError> {
        let mut dy = self.matrix.matvec(y)?;
        for (d, f) in dy.iter_mut().zip(&self.forcing) {
            *d += f;
        }
        Ok(dy)
    }
}

fn block_offsets(n: usize, order: usize) -> Result<Vec<usize>, CarlemanError> {
    let mut offsets = Vec::with_capacity(order);
    let mut at = 0usize;
    for j in 1..=order {
        offsets.push(at);
        at = at
            .checked_add(checked_pow(n, j, "block size")?)
            .ok_or(CarlemanError::Overflow("carleman dimension"))?;
    }
    Ok(offsets)
}

fn block_range(offsets: &[usize], total: usize, j: usize) -> std::ops::Range<usize> {
    let start = offsets[j - 1];
    let end = offsets.get(j).copied().unwrap_or(total);
    start..end
}

/// Assembles the order-`N` truncation of the lifted system.
pub fn assemble(sys: &PolynomialSystem, order: usize) -> Result<CarlemanSystem, CarlemanError> {
    if order == 0 {
        return Err(CarlemanError::ZeroSize);
    }
    let n = sys.state_dim;
    let dim = carleman_dimension(n, order)?;
    let offsets = block_offsets(n, order)?;
    let mut entries = Vec::new();
    let mut forcing = vec![C64::default(); dim];
    for j in 1..=order {
        for (k, m_k) in sys.coefficients.iter().enumerate() {
            let col_block = k + j - 1;
            if m_k.is_zero() || col_block > order {
                continue;
            }
            if col_block == 0 {
                for &(r, _, v) in m_k.entries() {
                    forcing[offsets[0] + r] += v;
                }
                continue;
            }
            let a = transfer_operator(m_k, k, j, n)?;
            let (ro, co) = (offsets[j - 1], offsets[col_block - 1]);
            entries.extend(a.entries().iter().map(|&(r, c, v)| (ro + r, co + c, v)));
        }
    }
    Ok(CarlemanSystem {
        order,
        state_dim: n,
        matrix: SparseComplexMatrix::accumulate(dim, dim, entries)?,
        forcing,
        offsets,
    })
}

/// Truncated lifted vector `[y_1; …; y_N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    state_dim: usize,
    values: Vec<C64>,
    offsets: Vec<usize>,
}

impl LiftedState {
    pub fn from_values(state_dim: usize, order: usize, values: Vec<C64>) -> Result<Self, CarlemanError> {
        let dim = carleman_dimension(state_dim, order)?;
        if values.len() != dim {
            return Err(CarlemanError::StateLength {
                expected: dim,
                found: values.len(),
            });
        }
        Ok(Self {
            state_dim,
            values,
            offsets: block_offsets(state_dim, order)?,
        })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn order(&self) -> usize {
        self.offsets.len()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn block(&self, j: usize) -> &[C64] {
        &self.values[block_range(&self.offsets, self.values.len(), j)]
    }

    /// The approximation of `Φ`.
    pub fn first_block(&self) -> &[C64] {
        self.block(1)
    }
}

/// `y_j = φ₀^{⊗j}` for `j = 1..=N`.
pub fn lift_state(phi0: &[C64], order: usize) -> Result<LiftedState, CarlemanError> {
    if phi0.is_empty() || order == 0 {
        return Err(CarlemanError::ZeroSize);
    }
    let mut values = Vec::new();
    let mut power = vec![C64::new(1.0, 0.0)];
    for _ in 0..order {
        power = crate::tensorcore::kron_vec(&power, phi0);
        values.extend_from_slice(&power);
    }
    LiftedState::from_values(phi0.len(), order, values)
}
