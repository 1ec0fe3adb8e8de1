//! Trainability probe for layered rotation ansätze: global versus local costs,
//! parameter-shift gradients, gradient descent and gradient-variance scans.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Gate, GateCircuit, SingleQubitGate};
use crate::simverify::Statevector;
use crate::tensorcore::{c64, DenseComplexMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("ansatz needs at least one qubit and one layer")]
    Empty,
    #[error("rotation on qubit {qubit} but the ansatz has {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("learning rate must be finite and non-negative, got {0}")]
    BadLearningRate(f64),
    #[error("variance scan needs at least {min} samples, got {found}")]
    TooFewSamples { min: usize, found: usize },
    #[error("slope fit needs at least two distinct points with positive variance")]
    DegenerateFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rotation {
    pub qubit: usize,
    pub axis: Axis,
}

/// Rotations applied in order, optionally followed by the CZ ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub rotations: Vec<Rotation>,
    pub entangle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Global,
    Local,
}

impl CostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::Global => "global",
            CostKind::Local => "local",
        }
    }
}

impl std::str::FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(CostKind::Global),
            "local" => Ok(CostKind::Local),
            other => Err(format!("unknown cost kind '{other}'")),
        }
    }
}

/// CZ pairs `(i, i+1 mod n)`; a single pair for two qubits and none for one.
pub fn cz_ring(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

fn cz_gate(a: usize, b: usize) -> Gate {
    let m = DenseComplexMatrix::from_fn(4, 4, |r, c| match (r == c, r) {
        (true, 3) => c64(-1.0, 0.0),
        (true, _) => c64(1.0, 0.0),
        _ => C64::default(),
    });
    Gate::opaque(vec![a, b], m).expect("CZ is unitary")
}

/// The CZ ring as a ±1 diagonal over basis states.
fn ring_signs(n: usize) -> Vec<f64> {
    let ring = cz_ring(n);
    (0..1usize << n)
        .map(|b| {
            let odd = ring
                .iter()
                .filter(|&&(a, c)| (b >> (n - 1 - a)) & 1 == 1 && (b >> (n - 1 - c)) & 1 == 1)
                .count()
                % 2;
            if odd == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    qubits: usize,
    layers: Vec<Layer>,
    theta: Vec<f64>,
    signs: Vec<f64>,
}

impl Ansatz {
    pub fn new(qubits: usize, layers: Vec<Layer>, theta: Vec<f64>) -> Result<Self, ProbeError> {
        if qubits == 0 || layers.is_empty() {
            return Err(ProbeError::Empty);
        }
        for r in layers.iter().flat_map(|l| &l.rotations) {
            if r.qubit >= qubits {
                return Err(ProbeError::QubitOutOfRange { qubit: r.qubit, qubits });
            }
        }
        let expected: usize = layers.iter().map(|l| l.rotations.len()).sum();
        if theta.len() != expected {
            return Err(ProbeError::ParameterCount {
                expected,
                found: theta.len(),
            });
        }
        Ok(Self {
            qubits,
            layers,
            theta,
            signs: ring_signs(qubits),
        })
    }

    /// `layers` rounds of one rotation per qubit (RY first, then alternating RX/RY),
    /// each followed by the CZ ring. Parameter `l·n + q` drives qubit `q` in layer `l`.
    pub fn hardware_efficient(qubits: usize, layers: usize) -> Result<Self, ProbeError> {
        let spec = (0..layers)
            .map(|l| Layer {
                rotations: (0..qubits)
                    .map(|qubit| Rotation {
                        qubit,
                        axis: if l % 2 == 0 { Axis::Y } else { Axis::X },
                    })
                    .collect(),
                entangle: true,
            })
            .collect();
        Self::new(qubits, spec, vec![0.0; qubits * layers])
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn parameter_count(&self) -> usize {
        self.theta.len()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self, ProbeError> {
        if theta.len() != self.theta.len() {
            return Err(ProbeError::ParameterCount {
                expected: self.theta.len(),
                found: theta.len(),
            });
        }
        Ok(Self { theta, ..self.clone() })
    }

    /// Uniform draws on `[0, 2π)` from a seeded generator.
    pub fn with_random_theta(&self, seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let theta = random_theta(&mut rng, self.parameter_count());
        Self { theta, ..self.clone() }
    }

    /// Rotation for parameter `index`, if it exists.
    pub fn rotation(&self, index: usize) -> Option<Rotation> {
        self.layers.iter().flat_map(|l| &l.rotations).nth(index).copied()
    }

    pub fn circuit(&self) -> GateCircuit {
        self.circuit_with(&self.theta)
    }

    fn circuit_with(&self, theta: &[f64]) -> GateCircuit {
        let mut c = GateCircuit::new(self.qubits);
        let mut params = theta.iter();
        for layer in &self.layers {
            for r in &layer.rotations {
                let t = *params.next().expect("validated parameter count");
                let g = match r.axis {
                    Axis::X => SingleQubitGate::Rx(t),
                    Axis::Y => SingleQubitGate::Ry(t),
                };
                c.push(Gate::single(r.qubit, g)).expect("validated qubit");
            }
            if layer.entangle {
                for (a, b) in cz_ring(self.qubits) {
                    c.push(cz_gate(a, b)).expect("ring inside register");
                }
            }
        }
        c
    }

    /// `U(θ)|0…0⟩`, applying each entangler ring as one diagonal.
    pub fn state_with(&self, theta: &[f64]) -> Statevector {
        let mut s = Statevector::zero(self.qubits);
        let mut params = theta.iter();
        for layer in &self.layers {
            for r in &layer.rotations {
                let t = *params.next().expect("validated parameter count");
                let g = match r.axis {
                    Axis::X => SingleQubitGate::Rx(t),
                    Axis::Y => SingleQubitGate::Ry(t),
                };
                s.apply_gate(&Gate::single(r.qubit, g)).expect("validated qubit");
            }
            if layer.entangle {
                s.scale_each(&self.signs);
            }
        }
        s
    }
}

fn random_theta(rng: &mut Xoshiro256PlusPlus, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// `C_G = 1 − |⟨0…0|ψ⟩|²` or `C_L = 1 − (1/n) Σ_i P(qubit i = 0)`.
pub fn cost_of_state(state: &Statevector, kind: CostKind) -> f64 {
    let c = match kind {
        CostKind::Global => 1.0 - state.amplitudes()[0].norm_sqr(),
        CostKind::Local => {
            let n = state.qubits();
            1.0 - (0..n).map(|q| state.prob_zero(q)).sum::<f64>() / n as f64
        }
    };
    c.clamp(0.0, 1.0)
}

fn cost_at(a: &Ansatz, theta: &[f64], kind: CostKind) -> f64 {
    cost_of_state(&a.state_with(theta), kind)
}

pub fn evaluate_cost(a: &Ansatz, kind: CostKind) -> f64 {
    cost_at(a, &a.theta, kind)
}

/// `[C(θ_μ + π/2) − C(θ_μ − π/2)] / 2`.
pub fn partial_derivative(a: &Ansatz, kind: CostKind, index: usize) -> f64 {
    let mut theta = a.theta.clone();
    theta[index] += FRAC_PI_2;
    let plus = cost_at(a, &theta, kind);
    theta[index] -= 2.0 * FRAC_PI_2;
    let minus = cost_at(a, &theta, kind);
    0.5 * (plus - minus)
}

pub fn gradient(a: &Ansatz, kind: CostKind) -> Vec<f64> {
    (0..a.parameter_count())
        .map(|i| partial_derivative(a, kind, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// `iterations + 1` values, starting with the initial cost.
    pub costs: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Plain gradient descent `θ ← θ − β ∇C` from seed-initialized parameters.
pub fn train(
    a: &Ansatz,
    kind: CostKind,
    learning_rate: f64,
    iterations: usize,
    seed: u64,
) -> Result<TrainTrace, ProbeError> {
    if !(learning_rate.is_finite() && learning_rate >= 0.0) {
        return Err(ProbeError::BadLearningRate(learning_rate));
    }
    let mut current = a.with_random_theta(seed);
    let mut costs = Vec::with_capacity(iterations + 1);
    costs.push(evaluate_cost(&current, kind));
    for _ in 0..iterations {
        let g = gradient(&current, kind);
        for (t, d) in current.theta.iter_mut().zip(g) {
            *t -= learning_rate * d;
        }
        costs.push(evaluate_cost(&current, kind));
    }
    Ok(TrainTrace {
        costs,
        theta: current.theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub n: usize,
    pub kind: CostKind,
    pub variance: f64,
    pub mean: f64,
    pub samples: usize,
}

pub const MIN_VARIANCE_SAMPLES: usize = 100;

/// Sample variance of `∂C/∂θ₀` over random parameter draws for each qubit count.
/// Draws for qubit count `n` come from a generator seeded with `seed + n`, and the
/// same draws are scored under both costs.
pub fn variance_scan(
    qubit_counts: &[usize],
    layers: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<VarianceRow>, ProbeError> {
    if samples < MIN_VARIANCE_SAMPLES {
        return Err(ProbeError::TooFewSamples {
            min: MIN_VARIANCE_SAMPLES,
            found: samples,
        });
    }
    let mut rows = Vec::new();
    for &n in qubit_counts {
        let template = Ansatz::hardware_efficient(n, layers)?;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed.wrapping_add(n as u64));
        let draws: Vec<Vec<f64>> = (0..samples)
            .map(|_| random_theta(&mut rng, template.parameter_count()))
            .collect();
        for kind in [CostKind::Global, CostKind::Local] {
            let grads: Vec<f64> = draws
                .par_iter()
                .map(|theta| {
                    let a = template.with_theta(theta.clone()).expect("matching length");
                    partial_derivative(&a, kind, 0)
                })
                .collect();
            let (mean, variance) = mean_and_variance(&grads);
            rows.push(VarianceRow {
                n,
                kind,
                variance,
                mean,
                samples,
            });
        }
    }
    Ok(rows)
}

/// Mean and unbiased sample variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(points: &[(f64, f64)]) -> Result<f64, ProbeError> {
    if points.len() < 2 || points.iter().any(|&(_, y)| y.is_nan() || y <= 0.0) {
        return Err(ProbeError::DegenerateFit);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ProbeError::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    Ok(sxy / sxx)
}
