//! Central finite-difference checks of every analytic gradient.
//!
//! Each `check_*` builds a random instance from `seed` and returns an error
//! describing the worst mismatch, if any.

#![allow(dead_code)]

use benchnet::arch::{ArchSpec, CnnSpec, LayerStack, MlpFamily, MlpSpec, ResidualSpec};
use benchnet::model::Network;
use benchnet::nn::{
    activation_apply, activation_backward, conv1d_backward, conv1d_forward, dense_backward,
    dense_forward, flatten, loss_value_and_grad, residual_add, residual_add_backward, unflatten,
    ActivationKind, Conv1dParams, DenseParams, LossKind, Padding,
};
use benchnet::Tensor;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-4;
/// Keeps relative error meaningful for gradients that are essentially zero.
const FLOOR: f64 = 1e-6;

pub type Check = Result<(), String>;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

fn compare(label: &str, analytic: &[f64], numeric: &[f64]) -> Check {
    if analytic.len() != numeric.len() {
        return Err(format!(
            "{label}: {} analytic vs {} numeric",
            analytic.len(),
            numeric.len()
        ));
    }
    let worst = analytic
        .iter()
        .zip(numeric)
        .enumerate()
        .map(|(i, (a, n))| (i, rel_err(*a, *n), *a, *n))
        .max_by(|x, y| x.1.total_cmp(&y.1));
    match worst {
        Some((i, e, a, n)) if e > TOL => Err(format!(
            "{label}[{i}]: analytic {a} numeric {n} rel err {e:.2e}"
        )),
        _ => Ok(()),
    }
}

/// Central differences of `f` at every coordinate of `x`.
pub fn numeric_grad(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + H;
            let up = f(&probe);
            probe[i] = orig - H;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn values(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

fn tensor(shape: &[usize], data: Vec<f64>) -> Tensor {
    Tensor::new(shape.to_vec(), data).unwrap()
}

fn weighted(y: &Tensor, r: &[f64]) -> f64 {
    y.data().iter().zip(r).map(|(a, b)| a * b).sum()
}

pub fn check_dense(seed: u64) -> Check {
    let mut r = rng(seed);
    let (n_in, n_out) = (r.gen_range(1..=16), r.gen_range(1..=8));
    let x = values(&mut r, n_in);
    let w = values(&mut r, n_in * n_out);
    let b = values(&mut r, n_out);
    let g = values(&mut r, n_out);
    let params = |w: &[f64], b: &[f64]| {
        DenseParams::new(
            tensor(&[n_out, n_in], w.to_vec()),
            Tensor::vector(b.to_vec()),
        )
        .unwrap()
    };
    let p = params(&w, &b);
    let (gx, gw, gb) = dense_backward(&Tensor::vector(x.clone()), &p, &Tensor::vector(g.clone()))
        .map_err(|e| e.to_string())?;
    let fx = |v: &[f64]| weighted(&dense_forward(&Tensor::vector(v.to_vec()), &p).unwrap(), &g);
    compare("dense grad_x", gx.data(), &numeric_grad(&x, fx))?;
    let fw = |v: &[f64]| {
        weighted(
            &dense_forward(&Tensor::vector(x.clone()), &params(v, &b)).unwrap(),
            &g,
        )
    };
    compare("dense grad_w", gw.data(), &numeric_grad(&w, fw))?;
    let fb = |v: &[f64]| {
        weighted(
            &dense_forward(&Tensor::vector(x.clone()), &params(&w, v)).unwrap(),
            &g,
        )
    };
    compare("dense grad_b", gb.data(), &numeric_grad(&b, fb))
}

pub fn check_conv(seed: u64, stride: usize, padding: Padding) -> Check {
    let mut r = rng(seed);
    let ch = r.gen_range(1..=3);
    let filters = r.gen_range(1..=4);
    let k = match padding {
        Padding::Valid => r.gen_range(2..=5),
        Padding::Same => r.gen_range(1..=5),
    };
    let length = r.gen_range(k..=16);
    let x = values(&mut r, ch * length);
    let w = values(&mut r, filters * ch * k);
    let b = values(&mut r, filters);
    let params = |w: &[f64], b: &[f64]| {
        Conv1dParams::new(
            tensor(&[filters, ch, k], w.to_vec()),
            Tensor::vector(b.to_vec()),
            stride,
            padding,
        )
        .unwrap()
    };
    let p = params(&w, &b);
    let xt = tensor(&[ch, length], x.clone());
    let out_shape = conv1d_forward(&xt, &p)
        .map_err(|e| e.to_string())?
        .shape()
        .to_vec();
    let g = values(&mut r, out_shape.iter().product());
    let (gx, gk, gb) =
        conv1d_backward(&xt, &p, &tensor(&out_shape, g.clone())).map_err(|e| e.to_string())?;
    let label = format!("conv(s={stride}, {padding:?}, c={ch}, f={filters}, k={k}, len={length})");
    let fx = |v: &[f64]| {
        weighted(
            &conv1d_forward(&tensor(&[ch, length], v.to_vec()), &p).unwrap(),
            &g,
        )
    };
    compare(&format!("{label} grad_x"), gx.data(), &numeric_grad(&x, fx))?;
    let fk = |v: &[f64]| weighted(&conv1d_forward(&xt, &params(v, &b)).unwrap(), &g);
    compare(
        &format!("{label} grad_kernels"),
        gk.data(),
        &numeric_grad(&w, fk),
    )?;
    let fb = |v: &[f64]| weighted(&conv1d_forward(&xt, &params(&w, v)).unwrap(), &g);
    compare(
        &format!("{label} grad_bias"),
        gb.data(),
        &numeric_grad(&b, fb),
    )
}

/// Values at least `gap` away from zero, so finite differences never straddle a kink.
fn away_from_zero(r: &mut ChaCha8Rng, n: usize, gap: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = r.gen_range(gap..3.0);
            if r.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

pub fn check_activation(seed: u64, kind: ActivationKind) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(1..=16);
    let x = away_from_zero(&mut r, n, 1e-3);
    let g = values(&mut r, n);
    let gx = activation_backward(kind, &Tensor::vector(x.clone()), &Tensor::vector(g.clone()))
        .map_err(|e| e.to_string())?;
    let f = |v: &[f64]| weighted(&activation_apply(kind, &Tensor::vector(v.to_vec())), &g);
    compare(&format!("{kind} grad_x"), gx.data(), &numeric_grad(&x, f))
}

pub fn check_residual_add(seed: u64) -> Check {
    let mut r = rng(seed);
    let shape = [r.gen_range(1..=8), r.gen_range(1..=16)];
    let n = shape[0] * shape[1];
    let (a, b, g) = (values(&mut r, n), values(&mut r, n), values(&mut r, n));
    let (ga, gb) = residual_add_backward(&tensor(&shape, g.clone()));
    let fa = |v: &[f64]| {
        weighted(
            &residual_add(&tensor(&shape, v.to_vec()), &tensor(&shape, b.clone())).unwrap(),
            &g,
        )
    };
    compare("residual_add main", ga.data(), &numeric_grad(&a, fa))?;
    let fb = |v: &[f64]| {
        weighted(
            &residual_add(&tensor(&shape, a.clone()), &tensor(&shape, v.to_vec())).unwrap(),
            &g,
        )
    };
    compare("residual_add bypass", gb.data(), &numeric_grad(&b, fb))
}

pub fn check_flatten(seed: u64) -> Check {
    let mut r = rng(seed);
    let (c, l) = (r.gen_range(1..=8), r.gen_range(1..=16));
    let x = values(&mut r, c * l);
    let g = values(&mut r, c * l);
    let gx = unflatten(&Tensor::vector(g.clone()), c, l).map_err(|e| e.to_string())?;
    if gx.shape() != [c, l] {
        return Err(format!("unflatten shape {:?}", gx.shape()));
    }
    let f = |v: &[f64]| weighted(&flatten(&tensor(&[c, l], v.to_vec())).unwrap(), &g);
    compare("flatten", gx.data(), &numeric_grad(&x, f))
}

pub fn check_loss(seed: u64, kind: LossKind) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(1..=16);
    let truth = values(&mut r, n);
    let diff = away_from_zero(&mut r, n, 1e-3);
    let pred: Vec<f64> = truth.iter().zip(&diff).map(|(t, d)| t + d).collect();
    let (_, grad) = loss_value_and_grad(kind, &pred, &truth).map_err(|e| e.to_string())?;
    let f = |v: &[f64]| loss_value_and_grad(kind, v, &truth).unwrap().0;
    compare(&format!("{kind} loss"), &grad, &numeric_grad(&pred, f))
}

/// Small smooth networks of each family.
pub fn network_stack(seed: u64, family: usize) -> LayerStack {
    let mut r = rng(seed);
    let act = if r.gen_bool(0.5) {
        ActivationKind::Tanh
    } else {
        ActivationKind::Sigmoid
    };
    let width = r.gen_range(6..=10);
    let spec = match family % 3 {
        0 => ArchSpec::Mlp(MlpSpec::new(MlpFamily::Trapezium, 4, 2, act)),
        1 => ArchSpec::Cnn(CnnSpec::new(&[3, 2], 2, r.gen_range(1..=2), [3, 1], act)),
        _ => {
            let mut s = ResidualSpec::doubling(&[1, 0], 6, 1);
            s.activation = act;
            ArchSpec::Residual(s)
        }
    };
    spec.build(width).unwrap()
}

/// Whole-network gradient of the scalar output with respect to a sample of
/// parameters and to every input feature.
pub fn check_network(seed: u64, family: usize) -> Check {
    let stack = network_stack(seed, family);
    let mut r = rng(seed ^ 0x5eed);
    let mut net = Network::init(&stack, &mut r);
    let width: usize = stack.input_shape().iter().product();
    let x = values(&mut r, width);

    net.zero_grad();
    let mut cache = Vec::new();
    net.forward_row(&x, &mut cache).map_err(|e| e.to_string())?;
    let gx = net
        .backward_row(1.0, &mut cache)
        .map_err(|e| e.to_string())?;
    if !cache.is_empty() {
        return Err(format!("{} cache entries left after backward", cache.len()));
    }
    let analytic = net.gradients();
    let params = net.parameters();

    let fx = |v: &[f64]| net.predict_row(v).unwrap();
    compare(
        &format!("network {family} grad_x"),
        &gx,
        &numeric_grad(&x, fx),
    )?;

    let picks = sample(&mut r, params.len(), params.len().min(60)).into_vec();
    let mut probe = net.clone();
    let mut numeric = Vec::with_capacity(picks.len());
    for &i in &picks {
        probe.set_parameter(i, params[i] + H);
        let up = probe.predict_row(&x).unwrap();
        probe.set_parameter(i, params[i] - H);
        let down = probe.predict_row(&x).unwrap();
        probe.set_parameter(i, params[i]);
        numeric.push((up - down) / (2.0 * H));
    }
    let picked: Vec<f64> = picks.iter().map(|&i| analytic[i]).collect();
    compare(&format!("network {family} grad_params"), &picked, &numeric)
}
