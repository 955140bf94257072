use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use super::RngStream;
use crate::error::{dim_check, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Fully connected feed-forward network.
///
/// Parameters live in one flat vector. Layer `l` occupies a contiguous block
/// holding its `out × in` weight matrix (row-major) followed by its bias, so
/// the flat view and the per-layer view always agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
}

/// Per-layer outputs recorded by a forward pass, consumed by backprop.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    outputs: Vec<Vec<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("trace always holds the input")
    }
}

impl Mlp {
    /// Network with all parameters zero.
    pub fn zeros(layer_sizes: &[usize], hidden_activation: Activation, output_activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer sizes must have at least two positive entries, got {layer_sizes:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(layer_sizes.len());
        let mut total = 0;
        for w in layer_sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            params: vec![0.0; total],
            offsets,
            hidden_activation,
            output_activation,
        })
    }

    /// Weights and biases uniform in `[-1/√fan_in, 1/√fan_in]`.
    pub fn new(
        layer_sizes: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let mut net = Mlp::zeros(layer_sizes, hidden_activation, output_activation)?;
        for l in 0..net.num_layers() {
            let bound = 1.0 / (net.layer_sizes[l] as f64).sqrt();
            let (start, end) = (net.offsets[l], net.offsets[l + 1]);
            for p in &mut net.params[start..end] {
                *p = rng.uniform_range(-bound, bound);
            }
        }
        Ok(net)
    }

    /// Builds a network from explicit per-layer weights and biases.
    pub fn from_layers(
        weights: &[Matrix],
        biases: &[Vec<f64>],
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::InvalidArgument("need one bias vector per weight matrix".into()));
        }
        let mut sizes = vec![weights[0].cols()];
        for (w, b) in weights.iter().zip(biases) {
            dim_check("layer input", *sizes.last().unwrap(), w.cols())?;
            dim_check("bias", w.rows(), b.len())?;
            sizes.push(w.rows());
        }
        let mut net = Mlp::zeros(&sizes, hidden_activation, output_activation)?;
        for (l, (w, b)) in weights.iter().zip(biases).enumerate() {
            let start = net.offsets[l];
            let nw = w.data().len();
            net.params[start..start + nw].copy_from_slice(w.data());
            net.params[start + nw..start + nw + b.len()].copy_from_slice(b);
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        dim_check("parameter vector", self.params.len(), params.len())?;
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// True when both networks have the same layer sizes and activations.
    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.layer_sizes == other.layer_sizes
            && self.hidden_activation == other.hidden_activation
            && self.output_activation == other.output_activation
    }

    fn weight_slice(&self, l: usize) -> &[f64] {
        let start = self.offsets[l];
        &self.params[start..start + self.layer_sizes[l] * self.layer_sizes[l + 1]]
    }

    fn bias_slice(&self, l: usize) -> &[f64] {
        let start = self.offsets[l] + self.layer_sizes[l] * self.layer_sizes[l + 1];
        &self.params[start..self.offsets[l + 1]]
    }

    pub fn layer_weights(&self, l: usize) -> Matrix {
        Matrix::from_vec(self.layer_sizes[l + 1], self.layer_sizes[l], self.weight_slice(l).to_vec())
            .expect("layer block has matching size")
    }

    pub fn layer_bias(&self, l: usize) -> &[f64] {
        self.bias_slice(l)
    }

    fn activation_of(&self, l: usize) -> Activation {
        if l + 1 == self.num_layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        dim_check("network input", self.input_size(), input.len())?;
        let mut x = input.to_vec();
        for l in 0..self.num_layers() {
            x = self.layer_forward(l, &x);
        }
        Ok(x)
    }

    fn layer_forward(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let w = self.weight_slice(l);
        let b = self.bias_slice(l);
        let act = self.activation_of(l);
        (0..n_out).map(|o| act.apply(dot(&w[o * n_in..(o + 1) * n_in], x) + b[o])).collect()
    }

    /// Forward pass that keeps every layer's output for a later backward pass.
    pub fn forward_trace(&self, input: &[f64]) -> Result<MlpTrace> {
        dim_check("network input", self.input_size(), input.len())?;
        let mut outputs = Vec::with_capacity(self.layer_sizes.len());
        outputs.push(input.to_vec());
        for l in 0..self.num_layers() {
            let next = self.layer_forward(l, outputs.last().unwrap());
            outputs.push(next);
        }
        Ok(MlpTrace { outputs })
    }

    /// Reverse pass for the scalar `output · output_gradient`. Parameter
    /// gradients are added into `grad_acc`; the input gradient is returned.
    pub fn backward(&self, trace: &MlpTrace, output_gradient: &[f64], grad_acc: &mut [f64]) -> Result<Vec<f64>> {
        dim_check("output gradient", self.output_size(), output_gradient.len())?;
        dim_check("gradient buffer", self.params.len(), grad_acc.len())?;
        let mut upstream = output_gradient.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let act = self.activation_of(l);
            let x = &trace.outputs[l];
            let y = &trace.outputs[l + 1];
            let delta: Vec<f64> = upstream.iter().zip(y).map(|(&g, &yo)| g * act.derivative_from_output(yo)).collect();
            let w_start = self.offsets[l];
            let b_start = w_start + n_in * n_out;
            let w = self.weight_slice(l);
            let mut next_upstream = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let g_row = &mut grad_acc[w_start + o * n_in..w_start + (o + 1) * n_in];
                for (gw, &xi) in g_row.iter_mut().zip(x) {
                    *gw += d * xi;
                }
                grad_acc[b_start + o] += d;
                for (u, &wi) in next_upstream.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *u += d * wi;
                }
            }
            upstream = next_upstream;
        }
        Ok(upstream)
    }

    /// Exact gradients of `forward(input) · output_gradient` with respect to
    /// every parameter (flat layout) and to the input.
    pub fn backprop(&self, input: &[f64], output_gradient: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let trace = self.forward_trace(input)?;
        let mut grads = vec![0.0; self.params.len()];
        let input_grad = self.backward(&trace, output_gradient, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// `self ← (1 − tau)·self + tau·source`, per parameter.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) -> Result<()> {
        if !self.same_architecture(source) {
            return Err(Error::InvalidArgument("soft update between different architectures".into()));
        }
        for (t, &s) in self.params.iter_mut().zip(&source.params) {
            *t = (1.0 - tau) * *t + tau * s;
        }
        Ok(())
    }
}
