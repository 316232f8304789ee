use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fully-connected layer parameters. `weights` is `(out_units, in_units)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        if weights.rank() != 2 || bias.rank() != 1 || bias.len() != weights.shape()[0] {
            return Err(Error::shape(
                "dense",
                format!("weights {:?} with bias {:?}", weights.shape(), bias.shape()),
            ));
        }
        Ok(Self { weights, bias })
    }

    pub fn zeros(in_units: usize, out_units: usize) -> Self {
        Self {
            weights: Tensor::zeros(&[out_units, in_units]),
            bias: Tensor::zeros(&[out_units]),
        }
    }

    pub fn in_units(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn out_units(&self) -> usize {
        self.weights.shape()[0]
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.rank() != 1 || x.len() != self.in_units() {
            return Err(Error::shape(
                format!("dense({}->{})", self.in_units(), self.out_units()),
                format!(
                    "expected input of length {}, got {:?}",
                    self.in_units(),
                    x.shape()
                ),
            ));
        }
        Ok(())
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ac, ar) = a.split_at(a.len() / 4 * 4);
    let (bc, br) = b.split_at(ac.len());
    for (x, y) in ac.chunks_exact(4).zip(bc.chunks_exact(4)) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f64 = ar.iter().zip(br).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y = W x + b`.
pub fn dense_forward(x: &Tensor, params: &DenseParams) -> Result<Tensor> {
    params.check_input(x)?;
    let n_in = params.in_units();
    let w = params.weights.data();
    let xs = x.data();
    let out = params
        .bias
        .data()
        .iter()
        .enumerate()
        .map(|(o, b)| {
            let row = &w[o * n_in..(o + 1) * n_in];
            b + dot(row, xs)
        })
        .collect();
    Ok(Tensor::vector(out))
}

/// Returns `(grad_x, grad_w, grad_b)`.
pub fn dense_backward(
    x: &Tensor,
    params: &DenseParams,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    params.check_input(x)?;
    if grad_out.rank() != 1 || grad_out.len() != params.out_units() {
        return Err(Error::shape(
            format!(
                "dense({}->{}) backward",
                params.in_units(),
                params.out_units()
            ),
            format!("grad_out {:?}", grad_out.shape()),
        ));
    }
    let n_in = params.in_units();
    let n_out = params.out_units();
    let w = params.weights.data();
    let xs = x.data();
    let g = grad_out.data();

    let mut grad_x = vec![0.0; n_in];
    let mut grad_w = vec![0.0; n_out * n_in];
    for o in 0..n_out {
        let go = g[o];
        if go == 0.0 {
            continue;
        }
        let row = &w[o * n_in..(o + 1) * n_in];
        for (gx, wv) in grad_x.iter_mut().zip(row) {
            *gx += wv * go;
        }
        for (gw, xv) in grad_w[o * n_in..(o + 1) * n_in].iter_mut().zip(xs) {
            *gw = go * xv;
        }
    }
    Ok((
        Tensor::vector(grad_x),
        Tensor::matrix(n_out, n_in, grad_w)?,
        grad_out.clone(),
    ))
}
