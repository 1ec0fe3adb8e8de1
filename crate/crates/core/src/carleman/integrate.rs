use super::{assemble, lift_state, CarlemanError, CarlemanSystem, LiftedState, PolynomialModel};
use crate::tensorcore::C64;

/// Sampled solution on a uniform grid. Each sample is a full lifted vector of
/// truncation order `order`; a nonlinear reference run uses `order = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    state_dim: usize,
    order: usize,
    times: Vec<f64>,
    values: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> LiftedState {
        LiftedState::from_values(self.state_dim, self.order, self.values[i].clone())
            .expect("trajectory samples share one layout")
    }

    /// Approximation of `Φ` at sample `i`.
    pub fn first_block(&self, i: usize) -> &[C64] {
        &self.values[i][..self.state_dim]
    }

    pub fn last_first_block(&self) -> &[C64] {
        self.first_block(self.len() - 1)
    }
}

fn check_span(t_span: (f64, f64), dt: f64) -> Result<usize, CarlemanError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CarlemanError::BadStep(dt));
    }
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(CarlemanError::BadSpan);
    }
    Ok(((t1 - t0) / dt - 1e-9).ceil().max(0.0) as usize)
}

fn axpy(y: &[C64], k: &[C64], h: f64) -> Vec<C64> {
    y.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// One classical RK4 step of `ẏ = f(t, y)`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[C64], h: f64) -> Result<Vec<C64>, CarlemanError>
where
    F: FnMut(f64, &[C64]) -> Result<Vec<C64>, CarlemanError>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h))?;
    let k4 = f(t + h, &axpy(y, &k3, h))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, v)| v + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
        .collect())
}

/// Runs `samples * substeps` uniform steps, keeping every `substeps`-th state.
fn run<F>(
    mut f: F,
    y0: Vec<C64>,
    t_span: (f64, f64),
    samples: usize,
    substeps: usize,
    state_dim: usize,
    order: usize,
) -> Result<Trajectory, CarlemanError>
where
    F: FnMut(f64, &[C64]) -> Result<Vec<C64>, CarlemanError>,
{
    let (t0, t1) = t_span;
    let total = samples * substeps;
    let h = if total == 0 { 0.0 } else { (t1 - t0) / total as f64 };
    let mut times = Vec::with_capacity(samples + 1);
    let mut values = Vec::with_capacity(samples + 1);
    times.push(t0);
    values.push(y0.clone());
    let mut y = y0;
    for step in 0..total {
        let t = t0 + step as f64 * h;
        y = rk4_step(&mut f, t, &y, h)?;
        let t_next = t0 + (step + 1) as f64 * h;
        if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(CarlemanError::Divergence { time: t_next });
        }
        if (step + 1) % substeps == 0 {
            times.push(t_next);
            values.push(y.clone());
        }
    }
    Ok(Trajectory {
        state_dim,
        order,
        times,
        values,
    })
}

/// Fixed-step RK4 for `ẏ = A(t)·y + f(t)`, re-evaluating the system through
/// `builder` at every stage time. The step is shrunk so it divides the span.
pub fn integrate<B>(mut builder: B, y0: &LiftedState, t_span: (f64, f64), dt: f64) -> Result<Trajectory, CarlemanError>
where
    B: FnMut(f64) -> Result<CarlemanSystem, CarlemanError>,
{
    let steps = check_span(t_span, dt)?;
    let dim = y0.values().len();
    run(
        |t, y| {
            let sys = builder(t)?;
            if sys.dimension() != dim {
                return Err(CarlemanError::StateLength {
                    expected: sys.dimension(),
                    found: dim,
                });
            }
            sys.derivative(y)
        },
        y0.values().to_vec(),
        t_span,
        steps,
        1,
        y0.state_dim(),
        y0.order(),
    )
}

/// Lifts `phi0`, truncates `model` at `order` and integrates. Autonomous models
/// are assembled once; time-dependent ones are re-assembled per stage.
pub fn integrate_model(
    model: &PolynomialModel,
    order: usize,
    phi0: &[C64],
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory, CarlemanError> {
    if phi0.len() != model.state_dim() {
        return Err(CarlemanError::StateLength {
            expected: model.state_dim(),
            found: phi0.len(),
        });
    }
    let y0 = lift_state(phi0, order)?;
    if model.is_time_dependent() {
        integrate(|t| assemble(&model.at(t), order), &y0, t_span, dt)
    } else {
        let fixed = assemble(&model.at(0.0), order)?;
        integrate(|_| Ok(fixed.clone()), &y0, t_span, dt)
    }
}

/// RK4 on the original nonlinear ODE, sampled every `dt`, with `substeps`
/// internal steps per sample.
pub fn integrate_nonlinear(
    model: &PolynomialModel,
    phi0: &[C64],
    t_span: (f64, f64),
    dt: f64,
    substeps: usize,
) -> Result<Trajectory, CarlemanError> {
    if phi0.len() != model.state_dim() {
        return Err(CarlemanError::StateLength {
            expected: model.state_dim(),
            found: phi0.len(),
        });
    }
    let samples = check_span(t_span, dt)?;
    let substeps = substeps.max(1);
    let fixed = (!model.is_time_dependent()).then(|| model.at(0.0));
    run(
        |t, y| match &fixed {
            Some(sys) => sys.rhs(y),
            None => model.at(t).rhs(y),
        },
        phi0.to_vec(),
        t_span,
        samples,
        substeps,
        model.state_dim(),
        1,
    )
}
