//! Feedforward network: hidden layers with a shared activation, a linear
//! output head, and optional dropout on hidden activations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{dropout_mask, Activation, ParameterSet, Tensor};

#[derive(Clone, Debug)]
pub struct MlpCache {
    /// Input followed by each layer's (masked) output.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    masks: Option<Vec<Vec<f64>>>,
}

pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> ParameterSet {
    let mut tensors = Vec::with_capacity(2 * hidden.len() + 2);
    let mut fan_in = input_dim;
    for (l, &units) in hidden.iter().enumerate() {
        tensors.push(Tensor::glorot(format!("dense{}.w", l + 1), units, fan_in, rng));
        tensors.push(Tensor::zeros(format!("dense{}.b", l + 1), units, 1));
        fan_in = units;
    }
    tensors.push(Tensor::glorot("head.w", 1, fan_in, rng));
    tensors.push(Tensor::zeros("head.b", 1, 1));
    ParameterSet::new(tensors)
}

fn n_hidden(params: &ParameterSet) -> usize {
    (params.tensors.len() - 2) / 2
}

pub fn draw_masks<R: Rng + ?Sized>(params: &ParameterSet, rate: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    (0..n_hidden(params))
        .map(|l| dropout_mask(params.tensors[2 * l].rows, rate, rng))
        .collect()
}

/// Forward pass. `masks`, when given, multiplies each hidden activation.
pub fn forward(
    params: &ParameterSet,
    x: &[f64],
    activation: Activation,
    masks: Option<&[Vec<f64>]>,
) -> Result<(f64, MlpCache)> {
    let layers = n_hidden(params);
    let first_cols = params.tensors[0].cols;
    if x.len() != first_cols {
        return Err(Error::Shape(format!(
            "input has {} features, network expects {}",
            x.len(),
            first_cols
        )));
    }
    let mut inputs = Vec::with_capacity(layers + 1);
    let mut pre = Vec::with_capacity(layers);
    let mut post = Vec::with_capacity(layers);
    inputs.push(x.to_vec());
    for l in 0..layers {
        let w = &params.tensors[2 * l];
        let b = &params.tensors[2 * l + 1];
        let mut z = b.data.clone();
        w.matvec_add(inputs.last().expect("nonempty"), &mut z);
        let h = activation.apply_slice(&z);
        let mut out = h.clone();
        if let Some(m) = masks {
            for (o, k) in out.iter_mut().zip(&m[l]) {
                *o *= k;
            }
        }
        pre.push(z);
        post.push(h);
        inputs.push(out);
    }
    let head_w = &params.tensors[2 * layers];
    let head_b = params.tensors[2 * layers + 1].data[0];
    let mut y = [head_b];
    head_w.matvec_add(inputs.last().expect("nonempty"), &mut y);
    Ok((
        y[0],
        MlpCache {
            inputs,
            pre,
            post,
            masks: masks.map(|m| m.to_vec()),
        },
    ))
}

/// Accumulates `dy * d output / d params` into `grads`.
pub fn backward(params: &ParameterSet, cache: &MlpCache, activation: Activation, dy: f64, grads: &mut ParameterSet) {
    let layers = n_hidden(params);
    let top = cache.inputs.last().expect("nonempty");
    grads.tensors[2 * layers].outer_add(&[dy], top);
    grads.tensors[2 * layers + 1].data[0] += dy;
    let mut da = vec![0.0; top.len()];
    params.tensors[2 * layers].matvec_t_add(&[dy], &mut da);
    for l in (0..layers).rev() {
        let mut dz = da;
        if let Some(m) = &cache.masks {
            for (d, k) in dz.iter_mut().zip(&m[l]) {
                *d *= k;
            }
        }
        for ((d, z), h) in dz.iter_mut().zip(&cache.pre[l]).zip(&cache.post[l]) {
            *d *= activation.derivative(*z, *h);
        }
        grads.tensors[2 * l].outer_add(&dz, &cache.inputs[l]);
        for (g, d) in grads.tensors[2 * l + 1].data.iter_mut().zip(&dz) {
            *g += d;
        }
        let mut below = vec![0.0; cache.inputs[l].len()];
        if l > 0 {
            params.tensors[2 * l].matvec_t_add(&dz, &mut below);
        }
        da = below;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn zero_weights_give_zero_output() {
        let mut rng = RngStream::new(1, "t").rng();
        let mut p = init(3, &[4, 2], &mut rng);
        p.values_mut().for_each(|v| *v = 0.0);
        for x in [[1.0, -2.0, 3.0], [0.5, 0.5, 9.0]] {
            assert_eq!(forward(&p, &x, Activation::Sigmoid, None).unwrap().0, 0.0);
        }
    }

    #[test]
    fn hand_wired_relu_doubles() {
        // 1 -> 1 hidden relu unit -> output 2*h
        let p = ParameterSet::new(vec![
            Tensor { name: "dense1.w".into(), rows: 1, cols: 1, data: vec![1.0] },
            Tensor { name: "dense1.b".into(), rows: 1, cols: 1, data: vec![0.0] },
            Tensor { name: "head.w".into(), rows: 1, cols: 1, data: vec![2.0] },
            Tensor { name: "head.b".into(), rows: 1, cols: 1, data: vec![0.0] },
        ]);
        assert_eq!(forward(&p, &[3.0], Activation::Relu, None).unwrap().0, 6.0);
        assert_eq!(forward(&p, &[-3.0], Activation::Relu, None).unwrap().0, 0.0);
    }

    #[test]
    fn identity_activation_is_affine_composition() {
        let mut rng = RngStream::new(9, "t").rng();
        let p = init(3, &[4], &mut rng);
        let x = [0.3, -1.1, 2.0];
        let (y, _) = forward(&p, &x, Activation::Identity, None).unwrap();
        // W2 (W1 x + b1) + b2 evaluated directly
        let (w1, b1, w2, b2) = (&p.tensors[0], &p.tensors[1], &p.tensors[2], &p.tensors[3]);
        let mut expected = b2.data[0];
        for r in 0..4 {
            let mut h = b1.data[r];
            for (c, xc) in x.iter().enumerate() {
                h += w1.at(r, c) * xc;
            }
            expected += w2.at(0, r) * h;
        }
        assert!((y - expected).abs() < 1e-14);
    }

    #[test]
    fn wrong_input_width() {
        let mut rng = RngStream::new(1, "t").rng();
        let p = init(3, &[2], &mut rng);
        assert!(matches!(forward(&p, &[1.0], Activation::Relu, None), Err(Error::Shape(_))));
    }
}
