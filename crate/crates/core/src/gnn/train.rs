use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{backward, forward, forward_batch, Batch};
use super::{init_params, GnnConfig, GnnParams, Task};
use crate::error::{Error, Result};
use crate::forge::seeded_rng;
use crate::graph::LpGraph;

/// A label or a network output: one number per graph, or one per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Value {
    fn as_slice(&self) -> &[f64] {
        match self {
            Value::Scalar(v) => std::slice::from_ref(v),
            Value::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub graph: LpGraph,
    pub target: Value,
}

fn check_target(task: Task, g: &LpGraph, t: &Value) -> Result<()> {
    let ok = match (task, t) {
        (Task::Feas, Value::Scalar(v)) => *v == 0.0 || *v == 1.0,
        (Task::Obj, Value::Scalar(v)) => v.is_finite(),
        (Task::Solu, Value::Vector(v)) => v.len() == g.n() && v.iter().all(|x| x.is_finite()),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::TargetMismatch(task.name()))
    }
}

fn check_network(params: &GnnParams, task: Task) -> Result<()> {
    if params.config().output != task.output_mode() {
        return Err(Error::InvalidConfig(format!("task {} needs {:?} output", task.name(), task.output_mode())));
    }
    Ok(())
}

fn loss_grad_unchecked(params: &GnnParams, samples: &[&Sample]) -> (f64, Vec<f64>) {
    let graphs: Vec<&LpGraph> = samples.iter().map(|s| &s.graph).collect();
    let batch = Batch::new(&graphs);
    let (y, tape) = forward(params, &batch);
    let targets = samples.iter().flat_map(|s| s.target.as_slice().iter().copied());
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    let dy: Vec<f64> = y
        .iter()
        .zip(targets)
        .map(|(&out, t)| {
            let r = out - t;
            loss += r * r;
            2.0 * r * scale
        })
        .collect();
    (loss * scale, backward(params, &batch, &tape, &dy))
}

/// Mean over the batch of the squared error (squared Euclidean norm for
/// vector targets), and its exact gradient.
pub fn loss_and_grad(params: &GnnParams, batch: &[Sample], task: Task) -> Result<(f64, GnnParams)> {
    check_network(params, task)?;
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for s in batch {
        check_target(task, &s.graph, &s.target)?;
    }
    let refs: Vec<&Sample> = batch.iter().collect();
    let (loss, grad) = loss_grad_unchecked(params, &refs);
    Ok((loss, GnnParams::from_vec(params.config(), grad)?))
}

/// Graphs evaluated per forward pass in [`predict`]; bounds peak memory.
const PREDICT_CHUNK: usize = 256;

pub fn predict(params: &GnnParams, graphs: &[&LpGraph]) -> Vec<Value> {
    graphs
        .chunks(PREDICT_CHUNK)
        .flat_map(|chunk| forward_batch(params, chunk))
        .map(|y| match params.config().output {
            super::OutputMode::Scalar => Value::Scalar(y[0]),
            super::OutputMode::Vertex => Value::Vector(y),
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Error rate at threshold ½ (feasibility), or mean relative error
/// `|F-Φ|/(|Φ|+1)` (objective) and `‖F-Φ‖/(‖Φ‖+1)` (solution).
pub fn metric(task: Task, outputs: &[Value], targets: &[Value]) -> Result<f64> {
    if outputs.len() != targets.len() {
        return Err(Error::DimensionMismatch { what: "outputs vs targets", expected: targets.len(), got: outputs.len() });
    }
    if outputs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (o, t) in outputs.iter().zip(targets) {
        total += match (task, o, t) {
            (Task::Feas, Value::Scalar(f), Value::Scalar(y)) => ((*f > 0.5) != (*y > 0.5)) as u8 as f64,
            (Task::Obj, Value::Scalar(f), Value::Scalar(y)) => (f - y).abs() / (y.abs() + 1.0),
            (Task::Solu, Value::Vector(f), Value::Vector(y)) if f.len() == y.len() => {
                let diff: Vec<f64> = f.iter().zip(y).map(|(a, b)| a - b).collect();
                norm(&diff) / (norm(y) + 1.0)
            }
            _ => return Err(Error::TargetMismatch(task.name())),
        };
    }
    Ok(total / outputs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 3e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(state: &mut AdamState, cfg: &AdamConfig, params: &mut GnnParams, grads: &[f64]) -> Result<()> {
    let n = params.len();
    for (what, got) in [("adam first moment", state.m.len()), ("adam second moment", state.v.len()), ("gradient", grads.len())] {
        if got != n {
            return Err(Error::DimensionMismatch { what, expected: n, got });
        }
    }
    state.step += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.step as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.step as i32);
    for (((p, m), v), &g) in params.as_mut_slice().iter_mut().zip(&mut state.m).zip(&mut state.v).zip(grads) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        *p -= cfg.lr * (*m / c1) / ((*v / c2).sqrt() + cfg.eps);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// `None` trains full batch; otherwise the data is reshuffled every epoch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub adam: AdamConfig,
    /// Stop once the training metric is at or below this value.
    pub stop_at_metric: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: None, seed: 0, adam: AdamConfig::default(), stop_at_metric: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean of the mini-batch losses seen during the epoch (before each update).
    pub loss: f64,
    /// Training metric after the epoch's last update.
    pub metric: f64,
}

/// Trains a fresh network initialised from `tc.seed`.
pub fn train(cfg: &GnnConfig, dataset: &[Sample], task: Task, tc: &TrainConfig) -> Result<(GnnParams, Vec<EpochRecord>)> {
    let params = init_params(cfg, tc.seed)?;
    train_from(params, dataset, task, tc)
}

/// Continues training from `params`; Adam moments start at zero.
pub fn train_from(mut params: GnnParams, dataset: &[Sample], task: Task, tc: &TrainConfig) -> Result<(GnnParams, Vec<EpochRecord>)> {
    check_network(&params, task)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if tc.batch_size == Some(0) {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    for s in dataset {
        check_target(task, &s.graph, &s.target)?;
    }
    let graphs: Vec<&LpGraph> = dataset.iter().map(|s| &s.graph).collect();
    let targets: Vec<Value> = dataset.iter().map(|s| s.target.clone()).collect();
    let batch_size = tc.batch_size.unwrap_or(dataset.len()).min(dataset.len());
    let mut rng = seeded_rng(tc.seed, 1);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut adam = AdamState::new(params.len());
    let mut history = Vec::with_capacity(tc.epochs);
    for epoch in 1..=tc.epochs {
        if batch_size < dataset.len() {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for chunk in order.chunks(batch_size) {
            let samples: Vec<&Sample> = chunk.iter().map(|&k| &dataset[k]).collect();
            let (loss, grad) = loss_grad_unchecked(&params, &samples);
            adam_step(&mut adam, &tc.adam, &mut params, &grad)?;
            loss_sum += loss * chunk.len() as f64;
        }
        let m = metric(task, &predict(&params, &graphs), &targets)?;
        history.push(EpochRecord { epoch, loss: loss_sum / dataset.len() as f64, metric: m });
        if tc.stop_at_metric.is_some_and(|t| m <= t) {
            break;
        }
    }
    Ok((params, history))
}
