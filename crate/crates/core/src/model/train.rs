use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, decayed_learning_rate, AdamHyper, AdamState};
use super::{LstmModel, ModelError, SequenceSet};

/// Optimizer, architecture and sequence hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Per-epoch multiplicative learning-rate decay.
    pub decay_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub window_len: usize,
    /// Left-pad windows of stations with short history.
    pub pad_windows: bool,
    pub dropout_rate: f64,
    pub hidden_dim: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            decay_rate: 0.97,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 200,
            batch_size: 16,
            window_len: 4,
            pad_windows: true,
            dropout_rate: 0.2,
            hidden_dim: 50,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return bad(format!("decay_rate must lie in (0, 1], got {}", self.decay_rate));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if self.window_len < 1 || self.batch_size < 1 || self.epochs < 1 || self.hidden_dim < 1 {
            return bad("window_len, batch_size, epochs and hidden_dim must be at least 1".into());
        }
        Ok(())
    }

    pub fn hyper(&self) -> AdamHyper {
        AdamHyper { beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }
}

/// Trains `model` in place with minibatch Adam on mean squared error.
///
/// Returns the mean training loss of each epoch.
pub fn train(model: &mut LstmModel, set: &SequenceSet, config: &TrainConfig) -> Result<Vec<f64>, ModelError> {
    config.validate()?;
    if set.is_empty() {
        return Err(ModelError::EmptySequences);
    }
    if set.input_dim != model.input_dim() {
        return Err(ModelError::DimensionMismatch { expected: model.input_dim(), got: set.input_dim });
    }
    // stream separate from weight initialisation
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0f_da7a);
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut state = AdamState::new(model.params().len());
    let mut grads = vec![0.0; model.params().len()];
    let mut history = Vec::with_capacity(config.epochs);
    let hyper = config.hyper();
    let mut step = 0usize;

    for epoch in 0..config.epochs {
        let lr = decayed_learning_rate(config.learning_rate, config.decay_rate, epoch);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.fill(0.0);
            let scale = 2.0 / batch.len() as f64;
            for &k in batch {
                let seq = &set.sequences[k];
                let cache = model.forward(&seq.window, Some(&mut rng))?;
                let residual = cache.prediction - seq.target;
                epoch_loss += residual * residual;
                model.backward_into(&cache, scale * residual, &mut grads)?;
            }
            if !epoch_loss.is_finite() {
                return Err(ModelError::Diverged { epoch, step });
            }
            let stepped = adam_step(model.params_mut(), &grads, &mut state, lr, hyper);
            stepped.map_err(|i| ModelError::NonFiniteGradient { block: model.block_of(i) })?;
            if !model.all_finite() {
                return Err(ModelError::Diverged { epoch, step });
            }
            step += 1;
        }
        history.push(epoch_loss / set.len() as f64);
    }
    Ok(history)
}

/// Predictions for every sequence, without dropout.
pub fn predict(model: &LstmModel, set: &SequenceSet) -> Result<Vec<f64>, ModelError> {
    set.sequences.iter().map(|s| model.predict(&s.window)).collect()
}
