use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{assemble, carleman_dimension, integrate_model, integrate_nonlinear, CarlemanError, PolynomialModel};
use crate::tensorcore::C64;

/// Source of the exact `Φ(t)` used to score truncations.
pub trait Reference: Sync {
    fn evaluate(&self, times: &[f64]) -> Result<Vec<Vec<C64>>, CarlemanError>;
}

impl<F> Reference for F
where
    F: Fn(f64) -> Vec<C64> + Sync,
{
    fn evaluate(&self, times: &[f64]) -> Result<Vec<Vec<C64>>, CarlemanError> {
        Ok(times.iter().map(|&t| self(t)).collect())
    }
}

/// RK4 on the nonlinear ODE with `refinement` sub-steps per sample interval.
#[derive(Debug, Clone)]
pub struct FineReference<'a> {
    pub model: &'a PolynomialModel,
    pub phi0: &'a [C64],
    pub refinement: usize,
}

impl Reference for FineReference<'_> {
    fn evaluate(&self, times: &[f64]) -> Result<Vec<Vec<C64>>, CarlemanError> {
        if times.len() < 2 {
            return Ok(times.iter().map(|_| self.phi0.to_vec()).collect());
        }
        let (t0, t1) = (times[0], times[times.len() - 1]);
        let dt = (t1 - t0) / (times.len() - 1) as f64;
        let traj = integrate_nonlinear(self.model, self.phi0, (t0, t1), dt, self.refinement)?;
        Ok((0..traj.len()).map(|i| traj.first_block(i).to_vec()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub order: usize,
    pub dimension: usize,
    pub nnz: usize,
    /// `f64::INFINITY` when the truncated run diverged.
    pub max_error: f64,
    pub runtime_ms: f64,
    pub diverged_at: Option<f64>,
}

/// Scores truncation orders against `reference` on the RK4 sample grid.
/// `nnz` is the sparsity of `A` with every time factor set to one.
pub fn convergence_study<R: Reference>(
    model: &PolynomialModel,
    phi0: &[C64],
    reference: &R,
    orders: &[usize],
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<ConvergenceRow>, CarlemanError> {
    let pattern = model.at(1.0);
    let grid = integrate_model(model, 1, phi0, t_span, dt)?.times().to_vec();
    let exact = reference.evaluate(&grid)?;
    orders
        .par_iter()
        .map(|&order| {
            let dimension = carleman_dimension(model.state_dim(), order)?;
            let nnz = assemble(&pattern, order)?.nnz();
            let start = Instant::now();
            let outcome = integrate_model(model, order, phi0, t_span, dt);
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let (max_error, diverged_at) = match outcome {
                Ok(traj) => {
                    let err = (0..traj.len())
                        .flat_map(|i| traj.first_block(i).iter().zip(&exact[i]).map(|(a, b)| (a - b).norm()))
                        .fold(0.0f64, f64::max);
                    (err, None)
                }
                Err(CarlemanError::Divergence { time }) => (f64::INFINITY, Some(time)),
                Err(e) => return Err(e),
            };
            Ok(ConvergenceRow {
                order,
                dimension,
                nnz,
                max_error,
                runtime_ms,
                diverged_at,
            })
        })
        .collect()
}
