//! Stacked recurrent network. Each layer is either a plain recurrent layer
//! `h_t = f(W_x x_t + W_h h_{t−1} + b)` or an LSTM layer with input, forget
//! and output gates and a candidate `k_t`. The final hidden state of the top
//! layer feeds a linear head. Gradients are computed by backpropagation
//! through time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dropout_mask, sigmoid, Activation, ParameterSet, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Simple,
    Lstm,
}

impl CellKind {
    fn gates(self) -> usize {
        match self {
            CellKind::Simple => 1,
            CellKind::Lstm => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrentLayer {
    pub units: usize,
    pub cell: CellKind,
}

/// 32 and 16 plain recurrent units, then 8 LSTM units.
pub fn default_layers() -> Vec<RecurrentLayer> {
    vec![
        RecurrentLayer { units: 32, cell: CellKind::Simple },
        RecurrentLayer { units: 16, cell: CellKind::Simple },
        RecurrentLayer { units: 8, cell: CellKind::Lstm },
    ]
}

pub fn init<R: Rng + ?Sized>(input_dim: usize, layers: &[RecurrentLayer], rng: &mut R) -> ParameterSet {
    let mut tensors = Vec::with_capacity(3 * layers.len() + 2);
    let mut d = input_dim;
    for (l, layer) in layers.iter().enumerate() {
        let g = layer.cell.gates() * layer.units;
        tensors.push(Tensor::glorot(format!("rnn{}.wx", l + 1), g, d, rng));
        tensors.push(Tensor::glorot(format!("rnn{}.wh", l + 1), g, layer.units, rng));
        tensors.push(Tensor::zeros(format!("rnn{}.b", l + 1), g, 1));
        d = layer.units;
    }
    tensors.push(Tensor::glorot("head.w", 1, d, rng));
    tensors.push(Tensor::zeros("head.b", 1, 1));
    ParameterSet::new(tensors)
}

/// One mask per layer, shared across time steps, applied to the layer's
/// outputs where they feed the next layer or the head.
pub fn draw_masks<R: Rng + ?Sized>(layers: &[RecurrentLayer], rate: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    layers.iter().map(|l| dropout_mask(l.units, rate, rng)).collect()
}

/// Single LSTM step. `wx` is `4u × d`, `wh` is `4u × u`, `b` is `4u`, with
/// row blocks ordered input, forget, output, candidate.
pub fn lstm_cell(wx: &Tensor, wh: &Tensor, b: &Tensor, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = h_prev.len();
    if wx.rows != 4 * u || wh.rows != 4 * u || wh.cols != u || b.data.len() != 4 * u || wx.cols != x.len() || c_prev.len() != u {
        return Err(Error::Shape(format!(
            "lstm cell: wx {}x{}, wh {}x{}, b {}, x {}, h {}, c {}",
            wx.rows,
            wx.cols,
            wh.rows,
            wh.cols,
            b.data.len(),
            x.len(),
            u,
            c_prev.len()
        )));
    }
    let mut gates = vec![0.0; 4 * u];
    let mut c = vec![0.0; u];
    let mut h = vec![0.0; u];
    let mut tc = vec![0.0; u];
    lstm_step(wx, wh, b, x, h_prev, c_prev, &mut gates, &mut c, &mut h, &mut tc);
    Ok((h, c))
}

#[allow(clippy::too_many_arguments)]
fn lstm_step(
    wx: &Tensor,
    wh: &Tensor,
    b: &Tensor,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    c: &mut [f64],
    h: &mut [f64],
    tanh_c: &mut [f64],
) {
    let u = h_prev.len();
    gates.copy_from_slice(&b.data);
    wx.matvec_add(x, gates);
    wh.matvec_add(h_prev, gates);
    for a in &mut gates[..3 * u] {
        *a = sigmoid(*a);
    }
    for a in &mut gates[3 * u..] {
        *a = a.tanh();
    }
    for j in 0..u {
        let (i, f, o, k) = (gates[j], gates[u + j], gates[2 * u + j], gates[3 * u + j]);
        c[j] = f * c_prev[j] + i * k;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
}

#[derive(Clone, Debug)]
struct LayerTrace {
    /// `S × d` inputs seen by the layer (already masked).
    input: Vec<f64>,
    /// `(S+1) × u` hidden states, row 0 is the zero initial state.
    h: Vec<f64>,
    /// `(S+1) × u` cell states (LSTM only).
    c: Vec<f64>,
    /// `S × gu`: gate activations (LSTM) or preactivations (plain).
    gates: Vec<f64>,
    /// `S × u` tanh of the cell state (LSTM only).
    tanh_c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RecurrentCache {
    traces: Vec<LayerTrace>,
    top: Vec<f64>,
    masks: Option<Vec<Vec<f64>>>,
    steps: usize,
}

fn layer_tensors(params: &ParameterSet, l: usize) -> (&Tensor, &Tensor, &Tensor) {
    (&params.tensors[3 * l], &params.tensors[3 * l + 1], &params.tensors[3 * l + 2])
}

/// Forward pass over a sequence stored oldest first as `S × d` values.
pub fn forward(
    params: &ParameterSet,
    layers: &[RecurrentLayer],
    seq: &[f64],
    activation: Activation,
    masks: Option<&[Vec<f64>]>,
) -> Result<(f64, RecurrentCache)> {
    if params.tensors.len() != 3 * layers.len() + 2 {
        return Err(Error::Shape("parameter set does not match the layer stack".into()));
    }
    let d0 = params.tensors[0].cols;
    if d0 == 0 || !seq.len().is_multiple_of(d0) || seq.is_empty() {
        return Err(Error::Shape(format!(
            "sequence of {} values is not a whole number of {}-feature steps",
            seq.len(),
            d0
        )));
    }
    let steps = seq.len() / d0;
    let mut traces = Vec::with_capacity(layers.len());
    let mut input = seq.to_vec();
    for (l, layer) in layers.iter().enumerate() {
        let (wx, wh, b) = layer_tensors(params, l);
        let u = layer.units;
        let d = wx.cols;
        let gu = layer.cell.gates() * u;
        let mut h = vec![0.0; (steps + 1) * u];
        let mut gates = vec![0.0; steps * gu];
        let (mut c, mut tanh_c) = match layer.cell {
            CellKind::Lstm => (vec![0.0; (steps + 1) * u], vec![0.0; steps * u]),
            CellKind::Simple => (Vec::new(), Vec::new()),
        };
        for t in 0..steps {
            let x = &input[t * d..(t + 1) * d];
            let (h_prev, h_rest) = h.split_at_mut((t + 1) * u);
            let h_prev = &h_prev[t * u..];
            let h_next = &mut h_rest[..u];
            let g = &mut gates[t * gu..(t + 1) * gu];
            match layer.cell {
                CellKind::Lstm => {
                    let (c_prev, c_rest) = c.split_at_mut((t + 1) * u);
                    lstm_step(
                        wx,
                        wh,
                        b,
                        x,
                        h_prev,
                        &c_prev[t * u..],
                        g,
                        &mut c_rest[..u],
                        h_next,
                        &mut tanh_c[t * u..(t + 1) * u],
                    );
                }
                CellKind::Simple => {
                    g.copy_from_slice(&b.data);
                    wx.matvec_add(x, g);
                    wh.matvec_add(h_prev, g);
                    for (o, z) in h_next.iter_mut().zip(g.iter()) {
                        *o = activation.apply(*z);
                    }
                }
            }
        }
        let mut out = h[u..].to_vec();
        if let Some(m) = masks {
            for t in 0..steps {
                for (o, k) in out[t * u..(t + 1) * u].iter_mut().zip(&m[l]) {
                    *o *= k;
                }
            }
        }
        traces.push(LayerTrace {
            input: std::mem::replace(&mut input, out),
            h,
            c,
            gates,
            tanh_c,
        });
    }
    let u_top = layers.last().map_or(d0, |l| l.units);
    let top = input[(steps - 1) * u_top..].to_vec();
    let nl = layers.len();
    let mut y = [params.tensors[3 * nl + 1].data[0]];
    params.tensors[3 * nl].matvec_add(&top, &mut y);
    Ok((
        y[0],
        RecurrentCache {
            traces,
            top,
            masks: masks.map(|m| m.to_vec()),
            steps,
        },
    ))
}

/// Accumulates `dy * d output / d params` into `grads`.
pub fn backward(
    params: &ParameterSet,
    layers: &[RecurrentLayer],
    cache: &RecurrentCache,
    activation: Activation,
    dy: f64,
    grads: &mut ParameterSet,
) {
    let nl = layers.len();
    let steps = cache.steps;
    grads.tensors[3 * nl].outer_add(&[dy], &cache.top);
    grads.tensors[3 * nl + 1].data[0] += dy;

    // Gradient w.r.t. the (masked) outputs of the current layer, S × u.
    let u_top = layers.last().map_or(0, |l| l.units);
    let mut d_out = vec![0.0; steps * u_top];
    params.tensors[3 * nl].matvec_t_add(&[dy], &mut d_out[(steps - 1) * u_top..]);

    for l in (0..nl).rev() {
        let layer = layers[l];
        let u = layer.units;
        let tr = &cache.traces[l];
        let (wx, wh, _) = layer_tensors(params, l);
        let d = wx.cols;
        let gu = layer.cell.gates() * u;
        if let Some(m) = &cache.masks {
            for t in 0..steps {
                for (g, k) in d_out[t * u..(t + 1) * u].iter_mut().zip(&m[l]) {
                    *g *= k;
                }
            }
        }
        let mut d_in = if l > 0 { vec![0.0; steps * d] } else { Vec::new() };
        let mut dh_rec = vec![0.0; u];
        let mut dc_rec = vec![0.0; u];
        let mut da = vec![0.0; gu];
        let mut dh = vec![0.0; u];
        for t in (0..steps).rev() {
            for j in 0..u {
                dh[j] = d_out[t * u + j] + dh_rec[j];
            }
            let g = &tr.gates[t * gu..(t + 1) * gu];
            match layer.cell {
                CellKind::Simple => {
                    let h_t = &tr.h[(t + 1) * u..(t + 2) * u];
                    for j in 0..u {
                        da[j] = dh[j] * activation.derivative(g[j], h_t[j]);
                    }
                }
                CellKind::Lstm => {
                    let c_prev = &tr.c[t * u..(t + 1) * u];
                    let tc = &tr.tanh_c[t * u..(t + 1) * u];
                    for j in 0..u {
                        let (i, f, o, k) = (g[j], g[u + j], g[2 * u + j], g[3 * u + j]);
                        let d_o = dh[j] * tc[j];
                        let dc = dc_rec[j] + dh[j] * o * (1.0 - tc[j] * tc[j]);
                        da[j] = dc * k * i * (1.0 - i);
                        da[u + j] = dc * c_prev[j] * f * (1.0 - f);
                        da[2 * u + j] = d_o * o * (1.0 - o);
                        da[3 * u + j] = dc * i * (1.0 - k * k);
                        dc_rec[j] = dc * f;
                    }
                }
            }
            let x_t = &tr.input[t * d..(t + 1) * d];
            let h_prev = &tr.h[t * u..(t + 1) * u];
            grads.tensors[3 * l].outer_add(&da, x_t);
            grads.tensors[3 * l + 1].outer_add(&da, h_prev);
            for (gb, a) in grads.tensors[3 * l + 2].data.iter_mut().zip(&da) {
                *gb += a;
            }
            dh_rec.iter_mut().for_each(|v| *v = 0.0);
            wh.matvec_t_add(&da, &mut dh_rec);
            if l > 0 {
                wx.matvec_t_add(&da, &mut d_in[t * d..(t + 1) * d]);
            }
        }
        d_out = d_in;
    }
}
