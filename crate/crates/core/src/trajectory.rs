use serde::{Deserialize, Serialize};

use crate::model::{AnyParams, ModelError, ModelKind, NetworkState};

/// Provenance carried alongside recorded samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    #[serde(flatten)]
    pub params: AnyParams,
    /// Integrator identifier, e.g. `"rk4"`, `"dopri5"`, `"caputo_abm_pece1"`.
    pub integrator: String,
    /// Fixed step, or the initial step for adaptive runs.
    pub step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Recorded samples of a run, stored row-major in the flat state layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    data: Vec<f64>,
    dim: usize,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn from_rows(times: Vec<f64>, data: Vec<f64>, meta: TrajectoryMeta) -> Result<Self, ModelError> {
        let dim = meta.params.dim();
        if data.len() != times.len() * dim {
            return Err(ModelError::Dimension {
                expected: times.len() * dim,
                got: data.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::InvalidParam {
                field: "times",
                value: f64::NAN,
                reason: "sample times must be strictly increasing",
            });
        }
        Ok(Self { times, data, dim, meta })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.meta.params.n()
    }

    pub fn kind(&self) -> ModelKind {
        self.meta.params.kind()
    }

    pub fn is_memristive(&self) -> bool {
        self.kind() == ModelKind::Memristive
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.data.chunks_exact(self.dim))
    }

    pub fn state(&self, i: usize) -> NetworkState {
        NetworkState::from_flat(self.row(i), self.n(), self.is_memristive())
            .expect("row dimension fixed at construction")
    }

    pub fn initial(&self) -> NetworkState {
        self.state(0)
    }

    pub fn last(&self) -> NetworkState {
        self.state(self.len() - 1)
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}
