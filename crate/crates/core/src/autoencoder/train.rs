use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::adam::Adam;
use super::data::Dataset;
use super::model::Autoencoder;
use super::net::{DenseNet, DenseNetSpec};
use crate::batch::PointBatch;
use crate::error::{Error, Result};
use crate::params::ParamSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub encoder: DenseNetSpec,
    pub decoder: DenseNetSpec,
    pub params: ParamSet,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Share of the dataset set aside (after a seeded shuffle) and never trained on.
    pub holdout_fraction: f64,
}

impl TrainConfig {
    /// Optimizer settings default to batch 100, learning rate 1e-4 and
    /// weight decay 1e-6.
    pub fn new(encoder: DenseNetSpec, decoder: DenseNetSpec, params: ParamSet) -> Self {
        Self {
            encoder,
            decoder,
            params,
            batch_size: 100,
            epochs: 1,
            learning_rate: 1e-4,
            weight_decay: 1e-6,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            holdout_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.encoder.validate()?;
        self.decoder.validate()?;
        if self.encoder.output_width() != self.params.dim || self.decoder.input_width() != self.params.dim {
            return Err(Error::invalid(format!(
                "encoder output ({}) and decoder input ({}) must equal the latent dimension {}",
                self.encoder.output_width(),
                self.decoder.input_width(),
                self.params.dim
            )));
        }
        if self.encoder.input_width() != self.decoder.output_width() {
            return Err(Error::invalid("decoder output width must match encoder input width"));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid("batch size must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::invalid("holdout fraction must lie in [0, 1)"));
        }
        for (name, v) in [
            ("learning rate", self.learning_rate),
            ("weight decay", self.weight_decay),
            ("adam epsilon", self.adam_epsilon),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative")));
            }
        }
        for beta in [self.adam_beta1, self.adam_beta2] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::invalid("adam betas must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean reconstruction loss per epoch.
    pub recon_trace: Vec<f64>,
    /// Mean weighted eccentric term `lambda * reg` per epoch.
    pub reg_trace: Vec<f64>,
    pub model: Autoencoder,
    pub train_indices: Vec<usize>,
    pub holdout_indices: Vec<usize>,
    /// Latent codes of the held-out items.
    pub holdout_embedding: PointBatch,
}

/// Networks as initialized from `config.seed`, before any update.
pub fn initial_model(config: &TrainConfig) -> Result<Autoencoder> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_model(config, &mut rng)
}

fn init_model(config: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Autoencoder> {
    let encoder = DenseNet::init(config.encoder.clone(), rng)?;
    let decoder = DenseNet::init(config.decoder.clone(), rng)?;
    Autoencoder::new(encoder, decoder)
}

/// Trains with Adam on shuffled minibatches.
///
/// All randomness (initialization, the holdout split, epoch shuffles) flows
/// from `config.seed`.
pub fn train(config: &TrainConfig, dataset: &Dataset) -> Result<TrainReport> {
    config.validate()?;
    dataset.features.check_dim(config.encoder.input_width())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = init_model(config, &mut rng)?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let holdout = (config.holdout_fraction * dataset.len() as f64).round() as usize;
    let holdout_indices = order.split_off(dataset.len() - holdout);
    let mut train_indices = order;
    if train_indices.len() < config.batch_size {
        return Err(Error::invalid(format!(
            "{} training items is fewer than the batch size {}",
            train_indices.len(),
            config.batch_size
        )));
    }
    let kept_train_order = train_indices.clone();

    let mut enc_opt = Adam::new(
        model.encoder.params().len(),
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
        config.weight_decay,
    );
    let mut dec_opt = Adam::new(
        model.decoder.params().len(),
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
        config.weight_decay,
    );

    let mut recon_trace = Vec::with_capacity(config.epochs);
    let mut reg_trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        train_indices.shuffle(&mut rng);
        let (mut recon_sum, mut reg_sum, mut batches) = (0.0, 0.0, 0usize);
        for (step, chunk) in train_indices.chunks(config.batch_size).enumerate() {
            if chunk.len() < 2 {
                continue;
            }
            let batch = dataset.features.select(chunk);
            let (parts, grads) = model.loss_and_gradients(&batch, &config.params)?;
            if !parts.total.is_finite() {
                return Err(Error::TrainingDiverged { epoch, step });
            }
            enc_opt.step(model.encoder.params_mut(), &grads.encoder);
            dec_opt.step(model.decoder.params_mut(), &grads.decoder);
            if model.encoder.params().iter().chain(model.decoder.params()).any(|v| !v.is_finite()) {
                return Err(Error::TrainingDiverged { epoch, step });
            }
            recon_sum += parts.recon;
            reg_sum += config.params.lambda * parts.reg;
            batches += 1;
        }
        recon_trace.push(recon_sum / batches as f64);
        reg_trace.push(reg_sum / batches as f64);
    }

    let holdout_embedding = model.encode(&dataset.features.select(&holdout_indices))?;
    Ok(TrainReport {
        recon_trace,
        reg_trace,
        model,
        train_indices: kept_train_order,
        holdout_indices,
        holdout_embedding,
    })
}

/// Latent codes of every item, in dataset order.
pub fn encode_dataset(model: &Autoencoder, dataset: &Dataset) -> Result<PointBatch> {
    model.encode(&dataset.features)
}
