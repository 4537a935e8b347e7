use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::backprop_gradients;
use super::{Network, NetworkSpec, NeuralError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Sample {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        Self { input, target }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub shuffle_seed: u64,
    pub init_seed: u64,
    /// Initial weights and biases are drawn from `Uniform(-init_scale, init_scale)`.
    pub init_scale: f64,
    /// Validation SSE per sample below which learning counts as adequate.
    pub adequacy_threshold: f64,
    /// Upper bound on the hidden-layer width during growth.
    pub max_hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 100,
            shuffle_seed: 0,
            init_seed: 0,
            init_scale: 0.5,
            adequacy_threshold: 0.01,
            max_hidden: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NeuralError::InvalidConfig(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(NeuralError::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(NeuralError::InvalidConfig("init_scale must be positive".into()));
        }
        if !(self.adequacy_threshold.is_finite() && self.adequacy_threshold > 0.0) {
            return Err(NeuralError::InvalidConfig("adequacy_threshold must be positive".into()));
        }
        if self.max_hidden == 0 {
            return Err(NeuralError::InvalidConfig("max_hidden must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trained network plus per-epoch SSE over the training set and, when a
/// validation set was given, over the validation set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: Network,
    pub train_sse: Vec<f64>,
    pub val_sse: Vec<f64>,
}

fn check_samples(net: &Network, samples: &[Sample]) -> Result<()> {
    for (i, s) in samples.iter().enumerate() {
        if s.input.len() != net.inputs() || s.target.len() != net.outputs() {
            return Err(NeuralError::Dimension(format!(
                "sample {i}: {}/{} values, network is {}->{}",
                s.input.len(),
                s.target.len(),
                net.inputs(),
                net.outputs()
            )));
        }
    }
    Ok(())
}

pub(crate) fn total_sse(net: &Network, samples: &[Sample]) -> Result<f64> {
    let mut sum = 0.0;
    for s in samples {
        let out = net.predict(&s.input)?;
        sum += out.iter().zip(&s.target).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
    }
    Ok(sum)
}

/// Online gradient descent on the SSE. Sample order is reshuffled every
/// epoch from the `shuffle_seed` stream; the loss history holds the SSE of
/// the whole training set after each epoch.
pub fn train(net: Network, samples: &[Sample], config: &TrainConfig) -> Result<(Network, Vec<f64>)> {
    let outcome = train_monitored(net, samples, &[], config)?;
    Ok((outcome.net, outcome.train_sse))
}

pub fn train_monitored(
    mut net: Network,
    samples: &[Sample],
    validation: &[Sample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(NeuralError::InvalidConfig("no training samples".into()));
    }
    check_samples(&net, samples)?;
    check_samples(&net, validation)?;

    let mut rng = seed::rng(config.shuffle_seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut train_sse = Vec::with_capacity(config.epochs);
    let mut val_sse = Vec::with_capacity(if validation.is_empty() { 0 } else { config.epochs });
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let s = &samples[i];
            let grads = backprop_gradients(&net, &s.input, &s.target)?;
            if !grads.loss.is_finite() {
                return Err(NeuralError::Divergence { epoch });
            }
            net.apply_update(&grads, config.learning_rate);
        }
        let loss = total_sse(&net, samples)?;
        if !loss.is_finite() || net.weights().iter().chain(net.biases()).flatten().any(|v| !v.is_finite()) {
            return Err(NeuralError::Divergence { epoch });
        }
        train_sse.push(loss);
        if !validation.is_empty() {
            val_sse.push(total_sse(&net, validation)?);
        }
    }
    Ok(TrainOutcome { net, train_sse, val_sse })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthOutcome {
    /// Best-validation training run among all rounds.
    pub best: TrainOutcome,
    pub hidden: usize,
    /// Number of training rounds performed.
    pub rounds: usize,
    pub adequate: bool,
    pub val_sse_per_sample: f64,
}

/// Trains with one hidden layer, widening it by one neuron (fresh init
/// from `init_seed + round`) while validation SSE per sample exceeds the
/// adequacy threshold and the width is below `max_hidden`. An empty
/// validation set falls back to the training set.
pub fn grow_hidden_until_adequate(
    base: &NetworkSpec,
    samples: &[Sample],
    validation: &[Sample],
    config: &TrainConfig,
) -> Result<GrowthOutcome> {
    base.validate()?;
    config.validate()?;
    if base.hidden_layers() != 1 {
        return Err(NeuralError::InvalidSpec("growth needs exactly one hidden layer".into()));
    }
    let start = base.layer_sizes[1];
    if config.max_hidden < start {
        return Err(NeuralError::InvalidConfig(format!(
            "max_hidden {} below initial width {start}",
            config.max_hidden
        )));
    }
    let monitor = if validation.is_empty() { samples } else { validation };

    let mut best: Option<(f64, usize, TrainOutcome)> = None;
    let mut rounds = 0;
    for (round, hidden) in (start..=config.max_hidden).enumerate() {
        let mut spec = base.clone();
        spec.layer_sizes[1] = hidden;
        let net = Network::init(spec, config.init_seed.wrapping_add(round as u64), config.init_scale)?;
        let outcome = train_monitored(net, samples, validation, config)?;
        let per_sample = total_sse(&outcome.net, monitor)? / monitor.len() as f64;
        rounds += 1;
        if best.as_ref().is_none_or(|(score, _, _)| per_sample < *score) {
            best = Some((per_sample, hidden, outcome));
        }
        if per_sample <= config.adequacy_threshold {
            break;
        }
    }
    let (score, hidden, best) = best.expect("at least one round");
    Ok(GrowthOutcome { best, hidden, rounds, adequate: score <= config.adequacy_threshold, val_sse_per_sample: score })
}

#[cfg(test)]
mod tests {
    use super::super::TransferKind;
    use super::*;
    use rand::Rng;

    fn xor() -> Vec<Sample> {
        [([0.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([1.0, 0.0], 1.0), ([1.0, 1.0], 0.0)]
            .into_iter()
            .map(|(x, t)| Sample::new(x.to_vec(), vec![t]))
            .collect()
    }

    fn accuracy(net: &Network, samples: &[Sample]) -> f64 {
        let hits =
            samples.iter().filter(|s| (net.predict(&s.input).unwrap()[0] >= 0.5) == (s.target[0] >= 0.5)).count();
        hits as f64 / samples.len() as f64
    }

    fn blobs(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = seed::rng(seed);
        (0..n)
            .map(|i| {
                let c = if i % 2 == 0 { -1.5 } else { 1.5 };
                let x = vec![c + rng.random_range(-1.0..1.0), c + rng.random_range(-1.0..1.0)];
                Sample::new(x, vec![(i % 2) as f64])
            })
            .collect()
    }

    #[test]
    fn xor_with_four_hidden() {
        let spec = NetworkSpec::uniform(vec![2, 4, 1], TransferKind::Sigmoid, true);
        let config =
            TrainConfig { learning_rate: 0.5, epochs: 5000, shuffle_seed: 1, init_seed: 1, ..TrainConfig::default() };
        let net = Network::init(spec, config.init_seed, config.init_scale).unwrap();
        let (net, history) = train(net, &xor(), &config).unwrap();
        assert_eq!(history.len(), 5000);
        assert_eq!(accuracy(&net, &xor()), 1.0);
    }

    #[test]
    fn separable_blobs_linear_net() {
        let data = blobs(200, 3);
        let net = Network::init(NetworkSpec::uniform(vec![2, 1], TransferKind::Sigmoid, true), 3, 0.5).unwrap();
        let (net, _) = train(net, &data, &TrainConfig { epochs: 50, ..TrainConfig::default() }).unwrap();
        assert_eq!(accuracy(&net, &data), 1.0);
    }

    #[test]
    fn convex_case_loss_non_increasing() {
        let data = blobs(100, 8);
        let net = Network::init(NetworkSpec::uniform(vec![2, 1], TransferKind::Sigmoid, true), 8, 0.5).unwrap();
        let config = TrainConfig { learning_rate: 0.01, epochs: 200, ..TrainConfig::default() };
        let (_, history) = train(net, &data, &config).unwrap();
        for w in history.windows(2) {
            assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn deterministic_histories() {
        let data = blobs(50, 1);
        let spec = NetworkSpec::uniform(vec![2, 3, 1], TransferKind::HyperTan, true);
        let config = TrainConfig { epochs: 20, shuffle_seed: 9, ..TrainConfig::default() };
        let run = || train(Network::init(spec.clone(), 5, 0.5).unwrap(), &data, &config).unwrap();
        assert_eq!(run(), run());
    }

    #[test]
    fn zero_epochs_rejected() {
        let net = Network::zeros(NetworkSpec::uniform(vec![2, 1], TransferKind::Sigmoid, true)).unwrap();
        let err = train(net.clone(), &xor(), &TrainConfig { epochs: 0, ..TrainConfig::default() });
        assert!(matches!(err, Err(NeuralError::InvalidConfig(_))));
        assert!(train(net, &[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let data = vec![Sample::new(vec![1e200], vec![1e200])];
        let spec = NetworkSpec::uniform(vec![1, 1], TransferKind::HyperTan, true);
        let net = Network::init(spec, 0, 0.5).unwrap();
        let err = train(net, &data, &TrainConfig { epochs: 3, ..TrainConfig::default() });
        assert!(matches!(err, Err(NeuralError::Divergence { .. })), "{err:?}");
    }

    fn xor_growth_config(max_hidden: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 3000,
            shuffle_seed: 1,
            init_seed: 1,
            adequacy_threshold: 0.05,
            max_hidden,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn xor_grows_past_one_hidden_unit() {
        let base = NetworkSpec::uniform(vec![2, 1, 1], TransferKind::Sigmoid, true);
        let out = grow_hidden_until_adequate(&base, &xor(), &xor(), &xor_growth_config(8)).unwrap();
        assert!(out.hidden >= 2, "{out:?}");
        assert!(out.adequate);
        assert!(out.rounds >= 2);
    }

    #[test]
    fn one_hidden_unit_cannot_fit_xor() {
        // Oracle for the growth example: exhaustive restarts of the 1-unit net.
        let base = NetworkSpec::uniform(vec![2, 1, 1], TransferKind::Sigmoid, true);
        for seed in 0..20 {
            let config = TrainConfig { init_seed: seed, shuffle_seed: seed, ..xor_growth_config(1) };
            let out = grow_hidden_until_adequate(&base, &xor(), &xor(), &config).unwrap();
            assert!(out.val_sse_per_sample > 0.05, "seed {seed}: {}", out.val_sse_per_sample);
        }
    }

    #[test]
    fn already_adequate_needs_no_growth() {
        let data = blobs(100, 2);
        let base = NetworkSpec::uniform(vec![2, 2, 1], TransferKind::Sigmoid, true);
        let config = TrainConfig { epochs: 100, adequacy_threshold: 0.05, max_hidden: 6, ..TrainConfig::default() };
        let out = grow_hidden_until_adequate(&base, &data, &[], &config).unwrap();
        assert_eq!(out.rounds, 1);
        assert_eq!(out.hidden, 2);
        assert!(out.adequate);
    }

    #[test]
    fn cap_reached_is_flagged() {
        let base = NetworkSpec::uniform(vec![2, 1, 1], TransferKind::Sigmoid, true);
        let out = grow_hidden_until_adequate(&base, &xor(), &[], &xor_growth_config(1)).unwrap();
        assert_eq!(out.rounds, 1);
        assert!(!out.adequate);
    }
}
