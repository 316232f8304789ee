//! Trainable networks instantiated from a [`LayerStack`].

use rand::Rng;

use crate::arch::{ConvDesc, LayerDesc, LayerStack, ResidualBlockDesc};
use crate::error::{Error, Result};
use crate::nn::{
    activation_apply, activation_backward, conv1d_backward, conv1d_forward, dense_backward,
    dense_forward, flatten, glorot_limit, glorot_uniform_init, residual_add, unflatten,
    ActivationKind, Conv1dParams, DenseParams,
};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
struct DenseNode {
    params: DenseParams,
    grad: DenseParams,
}

#[derive(Debug, Clone, PartialEq)]
struct ConvNode {
    params: Conv1dParams,
    grad_kernels: Tensor,
    grad_bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
struct ResidualNode {
    main: Vec<Node>,
    bypass: Option<ConvNode>,
    post: ActivationKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Dense(DenseNode),
    Conv(ConvNode),
    Activation(ActivationKind),
    Flatten,
    Residual(ResidualNode),
}

fn init_conv<R: Rng + ?Sized>(desc: &ConvDesc, rng: &mut R) -> ConvNode {
    let k = desc.kernel_size;
    let limit = glorot_limit(desc.in_channels * k, desc.filters * k);
    let n = desc.filters * desc.in_channels * k;
    let data = (0..n).map(|_| rng.gen_range(-limit..=limit)).collect();
    let shape = vec![desc.filters, desc.in_channels, k];
    let params = Conv1dParams {
        kernels: Tensor::new(shape.clone(), data).expect("conv kernel shape"),
        bias: Tensor::zeros(&[desc.filters]),
        stride: desc.stride,
        padding: desc.padding,
    };
    ConvNode {
        params,
        grad_kernels: Tensor::zeros(&shape),
        grad_bias: Tensor::zeros(&[desc.filters]),
    }
}

fn init_node<R: Rng + ?Sized>(desc: &LayerDesc, rng: &mut R) -> Node {
    match desc {
        LayerDesc::Dense {
            in_units,
            out_units,
        } => Node::Dense(DenseNode {
            params: DenseParams {
                weights: glorot_uniform_init(*in_units, *out_units, rng),
                bias: Tensor::zeros(&[*out_units]),
            },
            grad: DenseParams::zeros(*in_units, *out_units),
        }),
        LayerDesc::Conv1d(c) => Node::Conv(init_conv(c, rng)),
        LayerDesc::Activation(a) => Node::Activation(*a),
        LayerDesc::Flatten => Node::Flatten,
        LayerDesc::Residual(ResidualBlockDesc {
            main,
            bypass,
            post_activation,
            ..
        }) => Node::Residual(ResidualNode {
            main: main.iter().map(|d| init_node(d, rng)).collect(),
            bypass: bypass.as_ref().map(|c| init_conv(c, rng)),
            post: *post_activation,
        }),
    }
}

impl Node {
    /// Forward pass; when `cache` is given, pushes whatever backward needs.
    fn forward(&self, x: Tensor, cache: &mut Option<&mut Vec<Tensor>>) -> Result<Tensor> {
        match self {
            Node::Dense(d) => {
                let y = dense_forward(&x, &d.params)?;
                if let Some(c) = cache {
                    c.push(x);
                }
                Ok(y)
            }
            Node::Conv(cv) => {
                let y = conv1d_forward(&x, &cv.params)?;
                if let Some(c) = cache {
                    c.push(x);
                }
                Ok(y)
            }
            Node::Activation(kind) => {
                let y = activation_apply(*kind, &x);
                if let Some(c) = cache {
                    c.push(x);
                }
                Ok(y)
            }
            Node::Flatten => {
                let y = flatten(&x)?;
                if let Some(c) = cache {
                    // only the shape is needed
                    c.push(Tensor::zeros(x.shape()));
                }
                Ok(y)
            }
            Node::Residual(block) => {
                let skip = match &block.bypass {
                    Some(cv) => conv1d_forward(&x, &cv.params)?,
                    None => x.clone(),
                };
                if let Some(c) = cache {
                    c.push(x.clone());
                }
                let mut h = x;
                for node in &block.main {
                    h = node.forward(h, cache)?;
                }
                let merged = residual_add(&h, &skip)?;
                let y = activation_apply(block.post, &merged);
                if let Some(c) = cache {
                    c.push(merged);
                }
                Ok(y)
            }
        }
    }

    /// Backward pass consuming this node's entries from the end of `cache`;
    /// parameter gradients are accumulated.
    fn backward(&mut self, grad: Tensor, cache: &mut Vec<Tensor>) -> Result<Tensor> {
        let mut pop = || {
            cache
                .pop()
                .ok_or_else(|| Error::shape("backward", "forward cache exhausted"))
        };
        match self {
            Node::Dense(d) => {
                let x = pop()?;
                let (gx, gw, gb) = dense_backward(&x, &d.params, &grad)?;
                d.grad.weights.add_assign(&gw)?;
                d.grad.bias.add_assign(&gb)?;
                Ok(gx)
            }
            Node::Conv(cv) => {
                let x = pop()?;
                conv_backward_accumulate(cv, &x, &grad)
            }
            Node::Activation(kind) => {
                let x = pop()?;
                activation_backward(*kind, &x, &grad)
            }
            Node::Flatten => {
                let x = pop()?;
                unflatten(&grad, x.shape()[0], x.shape()[1])
            }
            Node::Residual(block) => {
                let merged = pop()?;
                let g = activation_backward(block.post, &merged, &grad)?;
                let mut gm = g.clone();
                for node in block.main.iter_mut().rev() {
                    gm = node.backward(gm, cache)?;
                }
                let x = cache
                    .pop()
                    .ok_or_else(|| Error::shape("backward", "forward cache exhausted"))?;
                let mut gx = match &mut block.bypass {
                    Some(cv) => conv_backward_accumulate(cv, &x, &g)?,
                    None => g,
                };
                gx.add_assign(&gm)?;
                Ok(gx)
            }
        }
    }

    fn visit_params(&mut self, f: &mut dyn FnMut(&mut Tensor, &mut Tensor)) {
        match self {
            Node::Dense(d) => {
                f(&mut d.params.weights, &mut d.grad.weights);
                f(&mut d.params.bias, &mut d.grad.bias);
            }
            Node::Conv(cv) => visit_conv(cv, f),
            Node::Activation(_) | Node::Flatten => {}
            Node::Residual(block) => {
                for node in &mut block.main {
                    node.visit_params(f);
                }
                if let Some(cv) = &mut block.bypass {
                    visit_conv(cv, f);
                }
            }
        }
    }
}

fn visit_conv(cv: &mut ConvNode, f: &mut dyn FnMut(&mut Tensor, &mut Tensor)) {
    f(&mut cv.params.kernels, &mut cv.grad_kernels);
    f(&mut cv.params.bias, &mut cv.grad_bias);
}

fn conv_backward_accumulate(cv: &mut ConvNode, x: &Tensor, grad: &Tensor) -> Result<Tensor> {
    let (gx, gk, gb) = conv1d_backward(x, &cv.params, grad)?;
    cv.grad_kernels.add_assign(&gk)?;
    cv.grad_bias.add_assign(&gb)?;
    Ok(gx)
}

/// A network with parameters and gradient accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_shape: Vec<usize>,
    nodes: Vec<Node>,
}

impl Network {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(stack: &LayerStack, rng: &mut R) -> Self {
        Self {
            input_shape: stack.input_shape().to_vec(),
            nodes: stack.layers().iter().map(|d| init_node(d, rng)).collect(),
        }
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    fn input_tensor(&self, features: &[f64]) -> Result<Tensor> {
        Tensor::new(self.input_shape.clone(), features.to_vec())
    }

    /// Predicts one row of features.
    pub fn predict_row(&self, features: &[f64]) -> Result<f64> {
        let mut h = self.input_tensor(features)?;
        let mut none = None;
        for node in &self.nodes {
            h = node.forward(h, &mut none)?;
        }
        Ok(h.data()[0])
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    /// Forward pass that records the cache needed by [`Network::backward_row`].
    pub fn forward_row(&self, features: &[f64], cache: &mut Vec<Tensor>) -> Result<f64> {
        let mut h = self.input_tensor(features)?;
        let mut some = Some(cache);
        for node in &self.nodes {
            h = node.forward(h, &mut some)?;
        }
        Ok(h.data()[0])
    }

    /// Accumulates parameter gradients for one row given `dLoss/dPrediction`.
    /// Returns the gradient with respect to the input features.
    pub fn backward_row(&mut self, grad_pred: f64, cache: &mut Vec<Tensor>) -> Result<Vec<f64>> {
        let mut g = Tensor::vector(vec![grad_pred]);
        for node in self.nodes.iter_mut().rev() {
            g = node.backward(g, cache)?;
        }
        Ok(g.into_data())
    }

    pub fn zero_grad(&mut self) {
        self.visit_params(&mut |_, g| g.fill(0.0));
    }

    /// Calls `f(param, grad)` for every parameter tensor in a fixed order.
    pub fn visit_params(&mut self, f: &mut dyn FnMut(&mut Tensor, &mut Tensor)) {
        for node in &mut self.nodes {
            node.visit_params(f);
        }
    }

    pub fn parameter_count(&mut self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |p, _| n += p.len());
        n
    }

    /// Flattened copy of every parameter, in visit order.
    pub fn parameters(&mut self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_params(&mut |p, _| out.extend_from_slice(p.data()));
        out
    }

    /// Flattened copy of every accumulated gradient, in visit order.
    pub fn gradients(&mut self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_params(&mut |_, g| out.extend_from_slice(g.data()));
        out
    }

    /// Overwrites the parameter at flat index `i` (visit order).
    pub fn set_parameter(&mut self, index: usize, value: f64) {
        let mut offset = 0;
        self.visit_params(&mut |p, _| {
            if index >= offset && index < offset + p.len() {
                p.data_mut()[index - offset] = value;
            }
            offset += p.len();
        });
    }
}

/// One optimizer state per parameter tensor of a [`Network`].
#[derive(Debug, Clone)]
pub struct Optimizer {
    states: Vec<OptimizerState>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, network: &mut Network) -> Self {
        let mut states = Vec::new();
        network.visit_params(&mut |p, _| states.push(OptimizerState::for_param(config, p)));
        Self { states }
    }

    /// Applies one update from the accumulated gradients.
    pub fn step(&mut self, network: &mut Network) -> Result<()> {
        let mut i = 0;
        let mut result = Ok(());
        let states = &mut self.states;
        network.visit_params(&mut |p, g| {
            if result.is_ok() {
                result = states[i].step(p, g);
            }
            i += 1;
        });
        result
    }
}
