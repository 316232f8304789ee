use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::gemm::{gemm, View};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// No padding; the sequence shrinks by `kernel_size - 1`.
    Valid,
    /// Symmetric zero padding at stride 1 so the length is preserved.
    Same,
}

/// 1D convolution parameters. `kernels` is `(filters, in_channels, kernel_size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1dParams {
    pub kernels: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: Padding,
}

/// Output length of a convolution, or `None` when the input is too short.
pub fn conv_output_length(
    length: usize,
    kernel_size: usize,
    stride: usize,
    padding: Padding,
) -> Option<usize> {
    if stride == 0 || kernel_size == 0 {
        return None;
    }
    match padding {
        Padding::Valid => (length >= kernel_size).then(|| (length - kernel_size) / stride + 1),
        Padding::Same => (stride == 1).then_some(length),
    }
}

impl Conv1dParams {
    pub fn new(kernels: Tensor, bias: Tensor, stride: usize, padding: Padding) -> Result<Self> {
        if kernels.rank() != 3 || bias.rank() != 1 || bias.len() != kernels.shape()[0] {
            return Err(Error::shape(
                "conv1d",
                format!("kernels {:?} with bias {:?}", kernels.shape(), bias.shape()),
            ));
        }
        if stride == 0 {
            return Err(Error::Config("conv1d stride must be positive".into()));
        }
        if padding == Padding::Same && stride != 1 {
            return Err(Error::Config("same padding requires stride 1".into()));
        }
        Ok(Self {
            kernels,
            bias,
            stride,
            padding,
        })
    }

    pub fn zeros(
        in_channels: usize,
        filters: usize,
        kernel_size: usize,
        stride: usize,
        padding: Padding,
    ) -> Self {
        Self {
            kernels: Tensor::zeros(&[filters, in_channels, kernel_size]),
            bias: Tensor::zeros(&[filters]),
            stride,
            padding,
        }
    }

    pub fn filters(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn kernel_size(&self) -> usize {
        self.kernels.shape()[2]
    }

    fn pad_left(&self) -> usize {
        match self.padding {
            Padding::Valid => 0,
            Padding::Same => (self.kernel_size() - 1) / 2,
        }
    }

    fn name(&self) -> String {
        format!(
            "conv1d({}->{}, k={}, s={})",
            self.in_channels(),
            self.filters(),
            self.kernel_size(),
            self.stride
        )
    }

    /// Validates `x` and returns `(length, out_length)`.
    fn geometry(&self, x: &Tensor) -> Result<(usize, usize)> {
        if x.rank() != 2 || x.shape()[0] != self.in_channels() {
            return Err(Error::shape(
                self.name(),
                format!(
                    "expected input ({}, length), got {:?}",
                    self.in_channels(),
                    x.shape()
                ),
            ));
        }
        let length = x.shape()[1];
        let out_len = conv_output_length(length, self.kernel_size(), self.stride, self.padding)
            .ok_or_else(|| {
                Error::shape(
                    self.name(),
                    format!(
                        "input length {length} is shorter than kernel {}",
                        self.kernel_size()
                    ),
                )
            })?;
        Ok((length, out_len))
    }

    /// Output positions `t` for which tap `j` reads inside the input.
    fn tap_range(&self, j: usize, length: usize, out_len: usize) -> Range<usize> {
        let s = self.stride;
        let pad = self.pad_left();
        let lo = if pad > j { (pad - j).div_ceil(s) } else { 0 };
        let hi = (length + pad).saturating_sub(j).div_ceil(s).min(out_len);
        lo..hi.max(lo)
    }

    /// Per tap: the output range it contributes to and the first input index it reads.
    fn taps(&self, length: usize, out_len: usize) -> Vec<(Range<usize>, usize)> {
        let pad = self.pad_left();
        (0..self.kernel_size())
            .map(|j| {
                let ts = self.tap_range(j, length, out_len);
                let start = (ts.start * self.stride + j).saturating_sub(pad);
                (ts, start)
            })
            .collect()
    }
}

impl Conv1dParams {
    /// Unfolds `x` into a `(in_channels * k, out_len)` row-major matrix whose
    /// column `t` holds the window read by output position `t`.
    fn im2col(&self, xs: &[f64], length: usize, out_len: usize) -> Vec<f64> {
        let k = self.kernel_size();
        let s = self.stride;
        let taps = self.taps(length, out_len);
        let mut cols = vec![0.0; self.in_channels() * k * out_len];
        for (c, xc) in xs.chunks_exact(length).enumerate() {
            for (j, (ts, start)) in taps.iter().enumerate() {
                let row = &mut cols[(c * k + j) * out_len..(c * k + j + 1) * out_len];
                let dst = &mut row[ts.clone()];
                if s == 1 {
                    dst.copy_from_slice(&xc[*start..*start + dst.len()]);
                } else {
                    for (d, v) in dst.iter_mut().zip(xc[*start..].iter().step_by(s)) {
                        *d = *v;
                    }
                }
            }
        }
        cols
    }
}

/// `out[f][t] = bias[f] + sum_{c,j} kernels[f][c][j] * x[c][t*stride + j - pad]`.
pub fn conv1d_forward(x: &Tensor, params: &Conv1dParams) -> Result<Tensor> {
    let (length, out_len) = params.geometry(x)?;
    let filters = params.filters();
    let ck = params.in_channels() * params.kernel_size();
    let cols = params.im2col(x.data(), length, out_len);
    let mut out = Vec::with_capacity(filters * out_len);
    for &b in params.bias.data() {
        out.extend(std::iter::repeat_n(b, out_len));
    }
    gemm(
        View::rm(params.kernels.data(), filters, ck),
        View::rm(&cols, ck, out_len),
        1.0,
        &mut out,
    );
    Tensor::new(vec![filters, out_len], out)
}

/// Returns `(grad_x, grad_kernels, grad_bias)`.
pub fn conv1d_backward(
    x: &Tensor,
    params: &Conv1dParams,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (length, out_len) = params.geometry(x)?;
    let filters = params.filters();
    if grad_out.shape() != [filters, out_len] {
        return Err(Error::shape(
            format!("{} backward", params.name()),
            format!(
                "expected grad_out ({filters}, {out_len}), got {:?}",
                grad_out.shape()
            ),
        ));
    }
    let channels = params.in_channels();
    let k = params.kernel_size();
    let ck = channels * k;
    let s = params.stride;
    let g = grad_out.data();

    let grad_b: Vec<f64> = g.chunks_exact(out_len).map(|r| r.iter().sum()).collect();

    let cols = params.im2col(x.data(), length, out_len);
    let mut grad_w = vec![0.0; filters * ck];
    gemm(
        View::rm(g, filters, out_len),
        View::rm_t(&cols, out_len, ck),
        0.0,
        &mut grad_w,
    );

    let mut grad_cols = vec![0.0; ck * out_len];
    gemm(
        View::rm_t(params.kernels.data(), ck, filters),
        View::rm(g, filters, out_len),
        0.0,
        &mut grad_cols,
    );
    let taps = params.taps(length, out_len);
    let mut grad_x = vec![0.0; channels * length];
    for (c, gxc) in grad_x.chunks_exact_mut(length).enumerate() {
        for (j, (ts, start)) in taps.iter().enumerate() {
            let row = &grad_cols[(c * k + j) * out_len..(c * k + j + 1) * out_len];
            let src = &row[ts.clone()];
            if s == 1 {
                for (d, v) in gxc[*start..*start + src.len()].iter_mut().zip(src) {
                    *d += v;
                }
            } else {
                for (d, v) in gxc[*start..].iter_mut().step_by(s).zip(src) {
                    *d += v;
                }
            }
        }
    }
    Ok((
        Tensor::new(vec![channels, length], grad_x)?,
        Tensor::new(vec![filters, channels, k], grad_w)?,
        Tensor::vector(grad_b),
    ))
}
