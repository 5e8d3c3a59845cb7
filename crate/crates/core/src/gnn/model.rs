//! Forward and reverse passes over a batch of graphs.
//!
//! A batch stacks the vertices of all its graphs into one matrix per side, so
//! every MLP runs as a handful of matrix products. Neighbor sums and readout
//! sums are explicit loops in ascending vertex order.

use ndarray::linalg::general_mat_mul;
use ndarray::{concatenate, s, Array2, ArrayView2, ArrayViewMut2, Axis};

use super::params::{GnnParams, Layout, MlpSlot, V_IN, W_IN};
use super::OutputMode;
use crate::error::{Error, Result};
use crate::graph::{LpGraph, VFeature, WFeature};
use crate::lp::{Comparison, LowerBound, UpperBound};

/// `(b, [≤], [=], [≥])`.
pub fn v_features(f: &VFeature) -> [f64; V_IN] {
    let hot = |c| if f.circ == c { 1.0 } else { 0.0 };
    [f.b, hot(Comparison::Le), hot(Comparison::Eq), hot(Comparison::Ge)]
}

/// `(c, l or 0, [l = -∞], u or 0, [u = +∞])`.
pub fn w_features(f: &WFeature) -> [f64; W_IN] {
    let (l, l_inf) = match f.l {
        LowerBound::Finite(v) => (v, 0.0),
        LowerBound::NegInf => (0.0, 1.0),
    };
    let (u, u_inf) = match f.u {
        UpperBound::Finite(v) => (v, 0.0),
        UpperBound::PosInf => (0.0, 1.0),
    };
    [f.c, l, l_inf, u, u_inf]
}

/// Several graphs laid out as one block-diagonal graph.
pub(crate) struct Batch {
    pub xv: Array2<f64>,
    pub xw: Array2<f64>,
    /// Graph index of every stacked vertex.
    pub v_graph: Vec<usize>,
    pub w_graph: Vec<usize>,
    /// Start of every graph's variables in the stacked order, plus the end.
    pub w_start: Vec<usize>,
    /// Per stacked constraint, `(stacked variable, weight)` ascending.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Per stacked variable, `(stacked constraint, weight)` ascending.
    pub cols: Vec<Vec<(usize, f64)>>,
}

impl Batch {
    pub fn new(graphs: &[&LpGraph]) -> Self {
        let nv: usize = graphs.iter().map(|g| g.m()).sum();
        let nw: usize = graphs.iter().map(|g| g.n()).sum();
        let mut xv = Array2::zeros((nv, V_IN));
        let mut xw = Array2::zeros((nw, W_IN));
        let (mut v_graph, mut w_graph) = (Vec::with_capacity(nv), Vec::with_capacity(nw));
        let mut w_start = vec![0];
        let mut rows = vec![Vec::new(); nv];
        let mut cols = vec![Vec::new(); nw];
        let (mut v0, mut w0) = (0, 0);
        for (k, g) in graphs.iter().enumerate() {
            for (i, f) in g.hv().iter().enumerate() {
                xv.row_mut(v0 + i).assign(&ndarray::ArrayView1::from(&v_features(f)));
                v_graph.push(k);
            }
            for (j, f) in g.hw().iter().enumerate() {
                xw.row_mut(w0 + j).assign(&ndarray::ArrayView1::from(&w_features(f)));
                w_graph.push(k);
            }
            // Edges are sorted by (row, col), so both adjacency lists come out ascending.
            for e in g.edges() {
                rows[v0 + e.row].push((w0 + e.col, e.value));
                cols[w0 + e.col].push((v0 + e.row, e.value));
            }
            v0 += g.m();
            w0 += g.n();
            w_start.push(w0);
        }
        Batch { xv, xw, v_graph, w_graph, w_start, rows, cols }
    }

    pub fn graphs(&self) -> usize {
        self.w_start.len() - 1
    }
}

fn weight_view<'a>(p: &'a [f64], off: usize, rows: usize, cols: usize) -> ArrayView2<'a, f64> {
    ArrayView2::from_shape((rows, cols), &p[off..off + rows * cols]).expect("layout sizes")
}

fn weight_view_mut<'a>(p: &'a mut [f64], off: usize, rows: usize, cols: usize) -> ArrayViewMut2<'a, f64> {
    ArrayViewMut2::from_shape((rows, cols), &mut p[off..off + rows * cols]).expect("layout sizes")
}

/// Inputs of every linear layer; hidden ones are ReLU outputs, so their sign
/// pattern doubles as the activation mask.
pub(crate) struct MlpTape {
    inputs: Vec<Array2<f64>>,
}

fn mlp_forward(p: &[f64], slot: &MlpSlot, x: Array2<f64>) -> (Array2<f64>, MlpTape) {
    let offsets = slot.layer_offsets();
    let last = offsets.len() - 1;
    let mut inputs = Vec::with_capacity(offsets.len());
    let mut a = x;
    for (k, (w, &(wo, bo))) in slot.widths.windows(2).zip(&offsets).enumerate() {
        let mut z = a.dot(&weight_view(p, wo, w[0], w[1]));
        z += &ndarray::ArrayView1::from(&p[bo..bo + w[1]]);
        if k < last {
            z.mapv_inplace(|v| v.max(0.0));
        }
        inputs.push(a);
        a = z;
    }
    (a, MlpTape { inputs })
}

fn mlp_backward(p: &[f64], slot: &MlpSlot, tape: &MlpTape, dout: Array2<f64>, grad: &mut [f64]) -> Array2<f64> {
    let offsets = slot.layer_offsets();
    let mut dz = dout;
    for k in (0..offsets.len()).rev() {
        let (wo, bo) = offsets[k];
        let (fan_in, fan_out) = (slot.widths[k], slot.widths[k + 1]);
        let a = &tape.inputs[k];
        general_mat_mul(1.0, &a.t(), &dz, 1.0, &mut weight_view_mut(grad, wo, fan_in, fan_out));
        for (g, s) in grad[bo..bo + fan_out].iter_mut().zip(dz.sum_axis(Axis(0))) {
            *g += s;
        }
        let mut da = dz.dot(&weight_view(p, wo, fan_in, fan_out).t());
        if k > 0 {
            da.zip_mut_with(a, |d, &act| {
                if act <= 0.0 {
                    *d = 0.0;
                }
            });
        }
        dz = da;
    }
    dz
}

/// `out[i] = Σ_{(j, w) ∈ adj[i]} w · x[j]`.
fn aggregate(adj: &[Vec<(usize, f64)>], x: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((adj.len(), x.ncols()));
    for (i, nbrs) in adj.iter().enumerate() {
        let mut row = out.row_mut(i);
        for &(j, w) in nbrs {
            row.scaled_add(w, &x.row(j));
        }
    }
    out
}

/// Sums rows into their graph's slot, in ascending row order.
fn readout(x: &Array2<f64>, owner: &[usize], graphs: usize) -> Array2<f64> {
    let mut out = Array2::zeros((graphs, x.ncols()));
    for (r, &k) in owner.iter().enumerate() {
        let mut row = out.row_mut(k);
        row += &x.row(r);
    }
    out
}

struct RoundTape {
    f_v: MlpTape,
    f_w: MlpTape,
    g_v: MlpTape,
    g_w: MlpTape,
}

pub(crate) struct Tape {
    in_v: MlpTape,
    in_w: MlpTape,
    rounds: Vec<RoundTape>,
    out: MlpTape,
}

/// Outputs are one value per graph (scalar mode) or per stacked variable.
pub(crate) fn forward(params: &GnnParams, batch: &Batch) -> (Vec<f64>, Tape) {
    let p = params.as_slice();
    let layout: Layout = params.layout();
    let d = params.config().dim;
    let (mut hv, in_v) = mlp_forward(p, &layout.f_in_v, batch.xv.clone());
    let (mut hw, in_w) = mlp_forward(p, &layout.f_in_w, batch.xw.clone());
    let mut rounds = Vec::with_capacity(layout.rounds.len());
    for round in &layout.rounds {
        let (fv, f_v) = mlp_forward(p, &round.f_v, hv.clone());
        let (fw, f_w) = mlp_forward(p, &round.f_w, hw.clone());
        let av = aggregate(&batch.rows, &fw);
        let aw = aggregate(&batch.cols, &fv);
        let (next_v, g_v) = mlp_forward(p, &round.g_v, concatenate![Axis(1), hv, av]);
        let (next_w, g_w) = mlp_forward(p, &round.g_w, concatenate![Axis(1), hw, aw]);
        hv = next_v;
        hw = next_w;
        rounds.push(RoundTape { f_v, f_w, g_v, g_w });
    }
    let sv = readout(&hv, &batch.v_graph, batch.graphs());
    let sw = readout(&hw, &batch.w_graph, batch.graphs());
    let z = match params.config().output {
        OutputMode::Scalar => concatenate![Axis(1), sv, sw],
        OutputMode::Vertex => {
            let mut z = Array2::zeros((hw.nrows(), 3 * d));
            for (j, &k) in batch.w_graph.iter().enumerate() {
                z.slice_mut(s![j, ..d]).assign(&sv.row(k));
                z.slice_mut(s![j, d..2 * d]).assign(&sw.row(k));
                z.slice_mut(s![j, 2 * d..]).assign(&hw.row(j));
            }
            z
        }
    };
    let (y, out) = mlp_forward(p, &layout.out, z);
    (y.column(0).to_vec(), Tape { in_v, in_w, rounds, out })
}

/// Gradient of `Σ dy[k] · y[k]` with respect to every parameter.
pub(crate) fn backward(params: &GnnParams, batch: &Batch, tape: &Tape, dy: &[f64]) -> Vec<f64> {
    let p = params.as_slice();
    let layout = params.layout();
    let d = params.config().dim;
    let graphs = batch.graphs();
    let mut grad = vec![0.0; p.len()];
    let dy = Array2::from_shape_vec((dy.len(), 1), dy.to_vec()).expect("one output column");
    let dz = mlp_backward(p, &layout.out, &tape.out, dy, &mut grad);
    let mut dsv = Array2::zeros((graphs, d));
    let mut dsw = Array2::zeros((graphs, d));
    let mut dhw = Array2::zeros((batch.w_graph.len(), d));
    match params.config().output {
        OutputMode::Scalar => {
            dsv.assign(&dz.slice(s![.., ..d]));
            dsw.assign(&dz.slice(s![.., d..]));
        }
        OutputMode::Vertex => {
            for (j, &k) in batch.w_graph.iter().enumerate() {
                let mut a = dsv.row_mut(k);
                a += &dz.slice(s![j, ..d]);
                let mut b = dsw.row_mut(k);
                b += &dz.slice(s![j, d..2 * d]);
            }
            dhw.assign(&dz.slice(s![.., 2 * d..]));
        }
    }
    let mut dhv = Array2::zeros((batch.v_graph.len(), d));
    for (i, &k) in batch.v_graph.iter().enumerate() {
        dhv.row_mut(i).assign(&dsv.row(k));
    }
    for (j, &k) in batch.w_graph.iter().enumerate() {
        let mut row = dhw.row_mut(j);
        row += &dsw.row(k);
    }
    for (round, rt) in layout.rounds.iter().zip(&tape.rounds).rev() {
        let dcv = mlp_backward(p, &round.g_v, &rt.g_v, dhv, &mut grad);
        let dcw = mlp_backward(p, &round.g_w, &rt.g_w, dhw, &mut grad);
        let mut prev_v = dcv.slice(s![.., ..d]).to_owned();
        let mut prev_w = dcw.slice(s![.., ..d]).to_owned();
        let dav = dcv.slice(s![.., d..]).to_owned();
        let daw = dcw.slice(s![.., d..]).to_owned();
        // av = rows·fw, so dfw[j] = Σ_i E[i,j] dav[i]; symmetric for aw.
        let dfw = aggregate(&batch.cols, &dav);
        let dfv = aggregate(&batch.rows, &daw);
        prev_v += &mlp_backward(p, &round.f_v, &rt.f_v, dfv, &mut grad);
        prev_w += &mlp_backward(p, &round.f_w, &rt.f_w, dfw, &mut grad);
        dhv = prev_v;
        dhw = prev_w;
    }
    mlp_backward(p, &layout.f_in_v, &tape.in_v, dhv, &mut grad);
    mlp_backward(p, &layout.f_in_w, &tape.in_w, dhw, &mut grad);
    grad
}

fn check_mode(params: &GnnParams, want: OutputMode) -> Result<()> {
    if params.config().output != want {
        return Err(Error::InvalidConfig(format!("network has {:?} output, {want:?} was requested", params.config().output)));
    }
    Ok(())
}

pub fn forward_scalar(params: &GnnParams, g: &LpGraph) -> Result<f64> {
    check_mode(params, OutputMode::Scalar)?;
    Ok(forward(params, &Batch::new(&[g])).0[0])
}

pub fn forward_vertex(params: &GnnParams, g: &LpGraph) -> Result<Vec<f64>> {
    check_mode(params, OutputMode::Vertex)?;
    Ok(forward(params, &Batch::new(&[g])).0)
}

/// One output vector per graph: length 1 in scalar mode, `n` in vertex mode.
pub fn forward_batch(params: &GnnParams, graphs: &[&LpGraph]) -> Vec<Vec<f64>> {
    let batch = Batch::new(graphs);
    let (y, _) = forward(params, &batch);
    match params.config().output {
        OutputMode::Scalar => y.into_iter().map(|v| vec![v]).collect(),
        OutputMode::Vertex => batch.w_start.windows(2).map(|w| y[w[0]..w[1]].to_vec()).collect(),
    }
}
