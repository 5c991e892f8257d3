use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backward::{backward_dialog, clip_gradients};
use super::forward::forward_dialog;
use super::{EncodedDialog, ModelConfig, Seq2SeqError, Seq2SeqParams, TrainConfig};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

/// Adaptive-moment optimizer state, shaped like the parameters it updates.
pub struct AdamState {
    first_moment: Seq2SeqParams,
    second_moment: Seq2SeqParams,
    step: u64,
}

impl AdamState {
    pub fn new(params: &Seq2SeqParams) -> Self {
        Self { first_moment: params.zeros_like(), second_moment: params.zeros_like(), step: 0 }
    }

    /// One bias-corrected update.
    pub fn update(&mut self, params: &mut Seq2SeqParams, grads: &Seq2SeqParams, learning_rate: f64) {
        self.step += 1;
        let correction1 = 1.0 - libm::pow(BETA1, self.step as f64);
        let correction2 = 1.0 - libm::pow(BETA2, self.step as f64);

        let mut param_tensors = params.tensors_mut();
        let grad_tensors = grads.tensors();
        let mut m_tensors = self.first_moment.tensors_mut();
        let mut v_tensors = self.second_moment.tensors_mut();
        for i in 0..param_tensors.len() {
            let data = &mut *param_tensors[i].1;
            let grad = grad_tensors[i].2;
            let m = &mut *m_tensors[i].1;
            let v = &mut *v_tensors[i].1;
            for j in 0..data.len() {
                m[j] = BETA1 * m[j] + (1.0 - BETA1) * grad[j];
                v[j] = BETA2 * v[j] + (1.0 - BETA2) * grad[j] * grad[j];
                let m_hat = m[j] / correction1;
                let v_hat = v[j] / correction2;
                data[j] -= learning_rate * m_hat / (libm::sqrt(v_hat) + ADAM_EPSILON);
            }
        }
    }
}

/// Per-epoch training record; `best_validation` is the running minimum, so
/// the column is monotone non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
    pub best_validation: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub params: Seq2SeqParams,
    pub history: Vec<EpochStats>,
}

/// Mean token NLL over a split, teacher-forced.
pub fn evaluate_loss(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    dialogs: &[EncodedDialog],
) -> Result<f64, Seq2SeqError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for dialog in dialogs {
        let forward = forward_dialog(params, config, dialog)?;
        let (s, c) = forward.nll();
        sum += s;
        count += c;
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Trains with shuffled mini-batches of dialogs and an adaptive-moment
/// update; the batch loss is the mean token NLL over all agent positions in
/// the batch. Validation loss is evaluated each epoch and the parameters
/// from the best epoch are returned. Single-threaded and deterministic for
/// a fixed seed.
pub fn train(
    params_init: Seq2SeqParams,
    config: &ModelConfig,
    train_config: &TrainConfig,
    train_split: &[EncodedDialog],
    validation_split: &[EncodedDialog],
) -> Result<TrainOutcome, Seq2SeqError> {
    config.validate()?;
    if train_split.is_empty() || train_config.batch_size == 0 {
        return Err(Seq2SeqError::EmptyInput);
    }

    let mut params = params_init;
    let mut adam = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);
    let mut order: Vec<usize> = (0..train_split.len()).collect();

    let mut history = Vec::with_capacity(train_config.epochs);
    let mut best_validation = f64::INFINITY;
    let mut best_params = params.clone();

    for epoch in 1..=train_config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_nll = 0.0;
        let mut epoch_count = 0usize;

        for batch in order.chunks(train_config.batch_size) {
            let mut grads = params.zeros_like();
            let mut batch_count = 0usize;
            for &index in batch {
                let forward = forward_dialog(&params, config, &train_split[index])?;
                let (nll, count) = forward.nll();
                epoch_nll += nll;
                epoch_count += count;
                batch_count += count;
                backward_dialog(&params, config, &forward, &mut grads);
            }
            if batch_count == 0 {
                continue;
            }
            let scale = 1.0 / batch_count as f64;
            for (_, data) in grads.tensors_mut() {
                for v in data {
                    *v *= scale;
                }
            }
            clip_gradients(&mut grads, train_config.gradient_clip_norm);
            adam.update(&mut params, &grads, train_config.learning_rate);
        }

        let train_loss = if epoch_count == 0 { 0.0 } else { epoch_nll / epoch_count as f64 };
        if !train_loss.is_finite() || !params.all_finite() {
            return Err(Seq2SeqError::Diverged { epoch });
        }
        let validation_loss = if validation_split.is_empty() {
            train_loss
        } else {
            evaluate_loss(&params, config, validation_split)?
        };
        if !validation_loss.is_finite() {
            return Err(Seq2SeqError::Diverged { epoch });
        }
        if validation_loss < best_validation {
            best_validation = validation_loss;
            best_params = params.clone();
        }
        history.push(EpochStats { epoch, train_loss, validation_loss, best_validation });
    }

    Ok(TrainOutcome { params: best_params, history })
}
