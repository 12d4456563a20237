use super::network::{forward, loss_and_gradient, Example};
use super::{CellKind, LossWeights, Method, ModelDims, ModelParams};
use crate::corpus::{ContextResponsePair, Vocabulary};
use crate::mixing::{MixMode, MixedDataset};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPair {
    pub context: Vec<u32>,
    pub response: Vec<u32>,
    pub corpus: usize,
}

impl EncodedPair {
    pub fn example(&self) -> Example<'_> {
        Example {
            context: &self.context,
            response: &self.response,
            corpus: self.corpus,
        }
    }
}

pub fn encode_corpora(vocab: &Vocabulary, corpora: &[Vec<ContextResponsePair>]) -> Vec<Vec<EncodedPair>> {
    corpora
        .iter()
        .map(|pairs| {
            pairs
                .iter()
                .map(|p| EncodedPair {
                    context: vocab.encode(&p.context),
                    response: vocab.encode(&p.response),
                    corpus: p.corpus,
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    pub dim: usize,
    /// Defaults to `dim / 2`.
    pub corpus_dim: Option<usize>,
    pub cell: CellKind,
    pub learning_rate: f64,
    /// Global gradient-norm clip threshold.
    pub clip: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Parameters start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    /// Weight of the end-of-response target in weighted mode.
    pub end_token_weight: f64,
    /// Re-interleave the training order every epoch with a derived seed.
    pub reshuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Interleaved,
            dim: 32,
            corpus_dim: None,
            cell: CellKind::Gru,
            learning_rate: 0.3,
            clip: 5.0,
            epochs: 20,
            batch_size: 1,
            seed: 0,
            init_scale: 0.08,
            end_token_weight: 1.0,
            reshuffle_each_epoch: false,
        }
    }
}

impl TrainConfig {
    pub fn dims(&self, vocab: usize, corpora: usize) -> ModelDims {
        let mut dims = ModelDims::new(vocab, corpora, self.dim);
        if let Some(c) = self.corpus_dim {
            dims.corpus_dim = c;
        }
        dims.cell = self.cell;
        dims
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip threshold must be > 0, got {}", self.clip));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.dim == 0 || self.corpus_dim == Some(0) {
            return bad("model dimensions must be positive".into());
        }
        if !(self.init_scale >= 0.0) {
            return bad("init scale must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    /// Mean loss over the training order before the first update.
    pub initial_loss: f64,
    /// Mean of the per-example losses seen during each epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean loss over the training order after the last update.
    pub final_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub log: TrainLog,
}

fn mean_loss(
    params: &ModelParams,
    corpora: &[Vec<EncodedPair>],
    mix: &MixedDataset,
    method: Method,
    weights: Option<&LossWeights>,
) -> Result<f64> {
    let mut sum = 0.0;
    for r in &mix.order {
        sum += forward(params, corpora[r.corpus][r.index].example(), method, weights)?
            .loss
            .total;
    }
    Ok(sum / mix.len() as f64)
}

/// Plain SGD over `mix`, one update per `batch_size` examples with the batch
/// gradient averaged and clipped to global norm `config.clip`.
/// Deterministic for a fixed `(corpora, mix, config, weights)`.
pub fn train(
    corpora: &[Vec<EncodedPair>],
    vocab_size: usize,
    mix: &MixedDataset,
    config: &TrainConfig,
    weights: Option<&LossWeights>,
) -> Result<TrainOutput> {
    config.validate()?;
    if config.method == Method::Weighted && weights.is_none() {
        return Err(Error::MissingDfTable);
    }
    if mix.is_empty() {
        return Err(Error::InvalidArgument("empty training order".into()));
    }
    let sizes: Vec<usize> = corpora.iter().map(Vec::len).collect();
    mix.validate(&sizes)?;
    let dims = config.dims(vocab_size, corpora.len());
    dims.validate()?;

    let mut params = ModelParams::random(dims, config.seed, config.init_scale);
    let initial_loss = mean_loss(&params, corpora, mix, config.method, weights)?;
    let mut grads = ModelParams::zeros(dims);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let order = if config.reshuffle_each_epoch && mix.mode == MixMode::Interleaved {
            mix.for_epoch(&sizes, epoch)?
        } else {
            mix.clone()
        };
        let mut epoch_sum = 0.0;
        for (b, batch) in order.order.chunks(config.batch_size).enumerate() {
            grads.fill(0.0);
            for (i, r) in batch.iter().enumerate() {
                let example = corpora[r.corpus][r.index].example();
                let loss = loss_and_gradient(&params, example, config.method, weights, &mut grads)?;
                if !loss.total.is_finite() {
                    return Err(Error::NonFinite {
                        epoch,
                        step: b * config.batch_size + i,
                        value: loss.total,
                    });
                }
                epoch_sum += loss.total;
            }
            if batch.len() > 1 {
                grads.scale(1.0 / batch.len() as f64);
            }
            grads.clip_global_norm(config.clip);
            params.add_scaled(-config.learning_rate, &grads);
        }
        epoch_losses.push(epoch_sum / order.len() as f64);
    }

    let final_loss = mean_loss(&params, corpora, mix, config.method, weights)?;
    Ok(TrainOutput {
        params,
        log: TrainLog {
            initial_loss,
            epoch_losses,
            final_loss,
        },
    })
}
