use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Elementwise sum of the main path and the bypass path of a residual block.
pub fn residual_add(main: &Tensor, bypass: &Tensor) -> Result<Tensor> {
    if !main.same_shape(bypass) {
        return Err(Error::shape(
            "residual_add",
            format!(
                "main path {:?} and bypass {:?} must have the same shape",
                main.shape(),
                bypass.shape()
            ),
        ));
    }
    let mut out = main.clone();
    out.add_assign(bypass)?;
    Ok(out)
}

/// The gradient of a sum reaches both branches unchanged.
pub fn residual_add_backward(grad_out: &Tensor) -> (Tensor, Tensor) {
    (grad_out.clone(), grad_out.clone())
}

/// Row-major flattening of a `(channels, length)` tensor.
pub fn flatten(x: &Tensor) -> Result<Tensor> {
    if x.rank() != 2 {
        return Err(Error::shape(
            "flatten",
            format!("expected rank-2 input, got {:?}", x.shape()),
        ));
    }
    let len = x.len();
    x.clone().reshape(vec![len])
}

/// Inverse of [`flatten`]; used on the backward pass.
pub fn unflatten(grad: &Tensor, channels: usize, length: usize) -> Result<Tensor> {
    grad.clone().reshape(vec![channels, length])
}
