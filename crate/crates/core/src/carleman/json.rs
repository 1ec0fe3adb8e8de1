use serde::{Deserialize, Serialize};

use super::{CarlemanError, CoefficientTerm, PolynomialModel};
use crate::tensorcore::{c64, C64};

/// A real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex(f64, f64),
}

impl From<Scalar> for C64 {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Real(r) => c64(r, 0.0),
            Scalar::Complex(r, i) => c64(r, i),
        }
    }
}

/// On-disk polynomial system. `t_power` on a coefficient makes it `t^m · matrix`,
/// which is only allowed when `time_dependent` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub p: usize,
    #[serde(rename = "M")]
    pub m: Vec<CoefficientTerm>,
    #[serde(default)]
    pub time_dependent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<Vec<Scalar>>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SystemJsonError {
    #[error("field '{field}': {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Model(#[from] CarlemanError),
}

fn field(field: impl Into<String>, message: impl Into<String>) -> SystemJsonError {
    SystemJsonError::Field {
        field: field.into(),
        message: message.into(),
    }
}

impl SystemJson {
    pub fn to_model(&self) -> Result<PolynomialModel, SystemJsonError> {
        if self.n == 0 {
            return Err(field("n", "must be at least 1"));
        }
        if self.p == 0 {
            return Err(field("p", "must be at least 1"));
        }
        for (i, t) in self.m.iter().enumerate() {
            if t.order > self.p {
                return Err(field(
                    format!("M[{i}].k"),
                    format!("order {} exceeds p = {}", t.order, self.p),
                ));
            }
            let cols = self.n.checked_pow(t.order as u32);
            if Some(t.matrix.shape()) != cols.map(|c| (self.n, c)) {
                return Err(field(
                    format!("M[{i}].matrix"),
                    format!("shape {:?} does not match n x n^{}", t.matrix.shape(), t.order),
                ));
            }
            if t.time_power > 0 && !self.time_dependent {
                return Err(field(format!("M[{i}].t_power"), "set time_dependent to use t_power"));
            }
        }
        if let Some(phi0) = &self.phi0 {
            if phi0.len() != self.n {
                return Err(field(
                    "phi0",
                    format!("length {} does not match n = {}", phi0.len(), self.n),
                ));
            }
        }
        Ok(PolynomialModel::new(self.n, self.p, self.m.clone())?)
    }

    pub fn initial_state(&self) -> Option<Vec<C64>> {
        self.phi0.as_ref().map(|v| v.iter().map(|&s| s.into()).collect())
    }

    pub fn from_model(model: &PolynomialModel, phi0: Option<&[C64]>) -> Self {
        SystemJson {
            n: model.state_dim(),
            p: model.degree(),
            m: model.terms().to_vec(),
            time_dependent: model.is_time_dependent(),
            phi0: phi0.map(|v| v.iter().map(|z| Scalar::Complex(z.re, z.im)).collect()),
        }
    }
}
