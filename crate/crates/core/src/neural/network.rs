use rand::Rng;

use super::{NeuralError, Result, TransferKind};
use crate::seed;

/// Layer sizes `[n_in, h_1, ..., h_L, n_out]` and one transfer per non-input layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub transfers: Vec<TransferKind>,
    pub use_bias: bool,
}

impl NetworkSpec {
    /// Same transfer in every non-input layer.
    pub fn uniform(layer_sizes: Vec<usize>, transfer: TransferKind, use_bias: bool) -> Self {
        let transfers = vec![transfer; layer_sizes.len().saturating_sub(1)];
        Self { layer_sizes, transfers, use_bias }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(NeuralError::InvalidSpec("need at least input and output layers".into()));
        }
        if self.layer_sizes.contains(&0) {
            return Err(NeuralError::InvalidSpec(format!("zero-width layer in {:?}", self.layer_sizes)));
        }
        if self.transfers.len() != self.layer_sizes.len() - 1 {
            return Err(NeuralError::InvalidSpec(format!(
                "{} transfers for {} non-input layers",
                self.transfers.len(),
                self.layer_sizes.len() - 1
            )));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_sizes.len() - 2
    }
}

/// Weights are stored per layer, row-major with one row per receiving
/// neuron: `weights[l][j * n_in + i]` is `w_ij` from neuron `i` to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Network {
    /// Weights and biases drawn from `Uniform(-scale, scale)`.
    pub fn init(spec: NetworkSpec, seed: u64, scale: f64) -> Result<Self> {
        spec.validate()?;
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(NeuralError::InvalidConfig(format!("init scale {scale} must be nonnegative")));
        }
        let mut rng = seed::rng(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| if scale == 0.0 { 0.0 } else { rng.random_range(-scale..scale) }).collect()
        };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in spec.layer_sizes.windows(2) {
            weights.push(draw(pair[0] * pair[1]));
            biases.push(if spec.use_bias { draw(pair[1]) } else { Vec::new() });
        }
        Ok(Self { spec, weights, biases })
    }

    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        Self::init(spec, 0, 0.0)
    }

    pub fn from_parts(spec: NetworkSpec, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        let layers = spec.layer_sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(NeuralError::InvalidSpec(format!(
                "expected {layers} weight and bias arrays, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        for (l, pair) in spec.layer_sizes.windows(2).enumerate() {
            if weights[l].len() != pair[0] * pair[1] {
                return Err(NeuralError::InvalidSpec(format!(
                    "layer {l}: {} weights, expected {}",
                    weights[l].len(),
                    pair[0] * pair[1]
                )));
            }
            let expected_bias = if spec.use_bias { pair[1] } else { 0 };
            if biases[l].len() != expected_bias {
                return Err(NeuralError::InvalidSpec(format!(
                    "layer {l}: {} biases, expected {expected_bias}",
                    biases[l].len()
                )));
            }
        }
        if weights.iter().chain(biases.iter()).flatten().any(|v| !v.is_finite()) {
            return Err(NeuralError::InvalidSpec("non-finite parameter".into()));
        }
        Ok(Self { spec, weights, biases })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn inputs(&self) -> usize {
        self.spec.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.spec.outputs()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().chain(self.biases.iter()).map(Vec::len).sum()
    }

    /// Forward pass returning only the output vector.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(forward(self, input)?.activations.pop().expect("at least one layer"))
    }

    pub(crate) fn apply_update(&mut self, grads: &Gradients, learning_rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= learning_rate * gi;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            for (bi, gi) in b.iter_mut().zip(g) {
                *bi -= learning_rate * gi;
            }
        }
    }
}

/// Pre-activations per non-input layer and activations per layer (index 0
/// is the input itself).
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub pre_activations: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least one layer")
    }
}

pub fn forward(net: &Network, input: &[f64]) -> Result<ForwardPass> {
    if input.len() != net.inputs() {
        return Err(NeuralError::Dimension(format!(
            "input has {} values, network expects {}",
            input.len(),
            net.inputs()
        )));
    }
    if input.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::Dimension("input contains non-finite values".into()));
    }
    let layers = net.spec.layer_sizes.len() - 1;
    let mut pre_activations = Vec::with_capacity(layers);
    let mut activations = Vec::with_capacity(layers + 1);
    activations.push(input.to_vec());
    for l in 0..layers {
        let n_in = net.spec.layer_sizes[l];
        let n_out = net.spec.layer_sizes[l + 1];
        let transfer = net.spec.transfers[l];
        let x = &activations[l];
        let w = &net.weights[l];
        let z: Vec<f64> = (0..n_out)
            .map(|j| {
                let row = &w[j * n_in..(j + 1) * n_in];
                let sum: f64 = row.iter().zip(x).map(|(wij, xi)| wij * xi).sum();
                if net.spec.use_bias {
                    sum + net.biases[l][j]
                } else {
                    sum
                }
            })
            .collect();
        let a = z.iter().map(|&zj| transfer.apply(zj)).collect();
        pre_activations.push(z);
        activations.push(a);
    }
    Ok(ForwardPass { pre_activations, activations })
}

/// `Σ (output - target)²`.
pub fn sse_loss(outputs: &[f64], targets: &[f64]) -> Result<f64> {
    if outputs.len() != targets.len() {
        return Err(NeuralError::Dimension(format!("{} outputs vs {} targets", outputs.len(), targets.len())));
    }
    Ok(outputs.iter().zip(targets).map(|(o, t)| (o - t).powi(2)).sum())
}

/// Gradient of the SSE with respect to every weight and bias, laid out like
/// the network's own parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Loss at the evaluated point.
    pub loss: f64,
}

pub fn backprop_gradients(net: &Network, input: &[f64], target: &[f64]) -> Result<Gradients> {
    if target.len() != net.outputs() {
        return Err(NeuralError::Dimension(format!(
            "target has {} values, network outputs {}",
            target.len(),
            net.outputs()
        )));
    }
    let pass = forward(net, input)?;
    let loss = sse_loss(pass.output(), target)?;
    let layers = net.spec.layer_sizes.len() - 1;
    let mut weights = vec![Vec::new(); layers];
    let mut biases = vec![Vec::new(); layers];

    // dE/da at the output layer
    let mut upstream: Vec<f64> = pass.output().iter().zip(target).map(|(o, t)| 2.0 * (o - t)).collect();
    for l in (0..layers).rev() {
        let n_in = net.spec.layer_sizes[l];
        let n_out = net.spec.layer_sizes[l + 1];
        let transfer = net.spec.transfers[l];
        let z = &pass.pre_activations[l];
        let a = &pass.activations[l + 1];
        let x = &pass.activations[l];
        let delta: Vec<f64> = (0..n_out).map(|j| upstream[j] * transfer.derivative(z[j], a[j])).collect();

        let mut gw = vec![0.0; n_in * n_out];
        for j in 0..n_out {
            for i in 0..n_in {
                gw[j * n_in + i] = delta[j] * x[i];
            }
        }
        weights[l] = gw;
        if net.spec.use_bias {
            biases[l] = delta.clone();
        }
        if l > 0 {
            let w = &net.weights[l];
            upstream = (0..n_in).map(|i| (0..n_out).map(|j| w[j * n_in + i] * delta[j]).sum()).collect();
        }
    }
    Ok(Gradients { weights, biases, loss })
}
