#![allow(dead_code)]

use lcnu_core::tensorcore::{c64, SparseComplexMatrix, C64};
use proptest::prelude::*;
use rand::Rng;

/// Square `2^n` matrix; each entry is kept with probability `density`.
pub fn random_sparse(rng: &mut impl Rng, n: usize, density: f64, complex: bool) -> SparseComplexMatrix {
    let dim = 1usize << n;
    let mut entries = Vec::new();
    for r in 0..dim {
        for c in 0..dim {
            if rng.random_bool(density) {
                entries.push((r, c, random_scalar(rng, complex)));
            }
        }
    }
    SparseComplexMatrix::new(dim, dim, entries).expect("distinct positions")
}

/// Every entry nonzero.
pub fn random_dense(rng: &mut impl Rng, n: usize, complex: bool) -> SparseComplexMatrix {
    random_sparse(rng, n, 1.0, complex)
}

pub fn random_scalar(rng: &mut impl Rng, complex: bool) -> C64 {
    let re = nonzero(rng);
    let im = if complex { nonzero(rng) } else { 0.0 };
    c64(re, im)
}

fn nonzero(rng: &mut impl Rng) -> f64 {
    let magnitude = rng.random_range(0.1..1.0);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..1usize << n)
        .map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn scalar_strategy() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, prop_oneof![Just(0.0), -1.0f64..1.0]).prop_map(|(re, im)| c64(re, im))
}

/// Sparse `rows × cols` matrix with up to `max_nnz` entries.
pub fn sparse_strategy(rows: usize, cols: usize, max_nnz: usize) -> impl Strategy<Value = SparseComplexMatrix> {
    proptest::collection::btree_map((0..rows, 0..cols), scalar_strategy(), 0..=max_nnz).prop_map(move |m| {
        let entries = m.into_iter().map(|((r, c), v)| (r, c, v));
        SparseComplexMatrix::new(rows, cols, entries).expect("distinct positions")
    })
}

/// Square matrix on `1..=max_qubits` qubits.
pub fn square_strategy(max_qubits: usize) -> impl Strategy<Value = SparseComplexMatrix> {
    (1..=max_qubits).prop_flat_map(|n| {
        let dim = 1usize << n;
        sparse_strategy(dim, dim, dim * dim)
    })
}
