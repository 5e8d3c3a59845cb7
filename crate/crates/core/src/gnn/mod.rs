//! Message-passing GNNs on LP graphs.
//!
//! Constraint and variable vertices are embedded by `f_in^V`, `f_in^W`, then
//! updated for `L` rounds by
//!
//! ```text
//! h_i^{l,V} = g_l^V(h_i^{l-1,V}, Σ_j E[i,j] f_l^W(h_j^{l-1,W}))
//! h_j^{l,W} = g_l^W(h_j^{l-1,W}, Σ_i E[i,j] f_l^V(h_i^{l-1,V}))
//! ```
//!
//! and read out either as one scalar `f_out(Σ h^{L,V}, Σ h^{L,W})` or per
//! variable as `f_out^W(Σ h^{L,V}, Σ h^{L,W}, h_j^{L,W})`. Every learnable
//! function is a ReLU MLP of width `d`: one hidden layer for the input maps,
//! two for the rest. Gradients are written out by hand.

mod model;
mod params;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use model::{forward_batch, forward_scalar, forward_vertex, v_features, w_features};
pub use params::{init_params, mlp_shapes, num_params, GnnParams, MlpSlot};
pub use train::{
    adam_step, loss_and_grad, metric, predict, train, train_from, AdamConfig, AdamState, EpochRecord, Sample, TrainConfig, Value,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    Scalar,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GnnConfig {
    /// Number of message-passing rounds `L`.
    pub layers: usize,
    /// Embedding width `d`, shared by every layer.
    pub dim: usize,
    pub output: OutputMode,
}

impl GnnConfig {
    pub fn new(layers: usize, dim: usize, output: OutputMode) -> Result<Self> {
        let cfg = Self { layers, dim, output };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig(format!("layers and dim must be positive, got L={} d={}", self.layers, self.dim)));
        }
        Ok(())
    }
}

/// The three learning targets: feasibility, optimal value, optimal solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Feas,
    Obj,
    Solu,
}

impl Task {
    pub fn output_mode(self) -> OutputMode {
        match self {
            Task::Feas | Task::Obj => OutputMode::Scalar,
            Task::Solu => OutputMode::Vertex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Feas => "feas",
            Task::Obj => "obj",
            Task::Solu => "solu",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "feas" => Some(Task::Feas),
            "obj" => Some(Task::Obj),
            "solu" => Some(Task::Solu),
            _ => None,
        }
    }
}
