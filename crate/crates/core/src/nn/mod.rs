//! Layer primitives with explicit forward and backward passes.

mod activation;
mod conv;
mod dense;
mod gemm;
mod init;
mod loss;
mod ops;

pub use activation::{activation_apply, activation_backward, ActivationKind};
pub use conv::{conv1d_backward, conv1d_forward, conv_output_length, Conv1dParams, Padding};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use init::{glorot_limit, glorot_uniform_init};
pub use loss::{loss_value_and_grad, LossKind};
pub use ops::{flatten, residual_add, residual_add_backward, unflatten};
