//! Dataset ingestion, Adam, the training loop and checkpoints.

mod adam;
mod checkpoint;
mod config;
mod dataset;

pub use adam::{adam_step, adam_update, AdamHyper, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::TrainConfig;
pub use dataset::{
    load_dataset, parse_dataset, read_embeddings, record_to_json, sidecar_path, write_dataset,
    write_embeddings, Sidecars,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::model::{classifier_backward, classify_all, Architecture, ClassifierParams, ExampleRecord, LabelVector};

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-example loss seen during the epoch.
    pub train_loss: f64,
    /// `None` when no validation set was given.
    pub valid: Option<EvalReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: Vec<EpochMetrics>,
    /// Epoch whose parameters were kept; `None` means the final parameters
    /// (no epoch had a defined validation weighted fine F1).
    pub best_epoch: Option<usize>,
}

fn golds(set: &[ExampleRecord], which: &str) -> Result<Vec<LabelVector>> {
    set.iter()
        .map(|e| {
            e.gold
                .ok_or_else(|| Error::Training(format!("{which} record {} has no labels", e.id)))
        })
        .collect()
}

/// Predicts every labelled example and scores the result.
pub fn evaluate_params(params: &ClassifierParams, examples: &[ExampleRecord], threshold: f64) -> Result<EvalReport> {
    let gold = golds(examples, "evaluation")?;
    let preds: Vec<LabelVector> = classify_all(params, examples, threshold)?
        .into_iter()
        .map(|p| p.labels)
        .collect();
    evaluate(&preds, &gold)
}

pub fn train(config: &TrainConfig, train_set: &[ExampleRecord], valid_set: &[ExampleRecord]) -> Result<TrainOutcome> {
    train_with_observer(config, train_set, valid_set, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with_observer(
    config: &TrainConfig,
    train_set: &[ExampleRecord],
    valid_set: &[ExampleRecord],
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    let first = train_set
        .first()
        .ok_or_else(|| Error::Training("empty training set".into()))?;
    let train_gold = golds(train_set, "training")?;
    golds(valid_set, "validation")?;
    let arch = Architecture {
        d_ctx: first.context_embedding.len(),
        d_node: first.node_embeddings.ncols(),
        widths: config.layer_widths.clone(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ClassifierParams::init(&arch, &mut rng)?;
    let mut state = AdamState::new(&params);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ClassifierParams)> = None;
    let mut last_finite_epoch = None;

    for epoch in 1..=config.epochs {
        let diverged = || Error::Divergence { epoch, last_finite_epoch };
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results: Vec<(f64, ClassifierParams)> = batch
                .par_iter()
                .map(|&i| classifier_backward(&params, &train_set[i], &train_gold[i]))
                .collect::<Result<_>>()
                .map_err(|e| if e.is_numeric() { diverged() } else { e })?;
            let mut grad = ClassifierParams::zeros(&arch)?;
            let scale = 1.0 / batch.len() as f64;
            for (loss, g) in &results {
                if !loss.is_finite() {
                    return Err(diverged());
                }
                loss_sum += loss;
                grad.add_scaled(g, scale);
            }
            adam_step(&mut params, &grad, &mut state, config)?;
        }
        let train_loss = loss_sum / train_set.len() as f64;
        if !train_loss.is_finite() {
            return Err(diverged());
        }
        last_finite_epoch = Some(epoch);

        let valid = if valid_set.is_empty() {
            None
        } else {
            Some(evaluate_params(&params, valid_set, config.threshold)?)
        };
        if let Some(score) = valid.as_ref().and_then(|r| r.weighted_fine_f1) {
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, epoch, params.clone()));
            }
        }
        let metrics = EpochMetrics { epoch, train_loss, valid };
        on_epoch(&metrics);
        log.push(metrics);
    }

    let (kept, best_epoch) = match best {
        Some((_, epoch, p)) => (p, Some(epoch)),
        None => (params, None),
    };
    Ok(TrainOutcome {
        checkpoint: Checkpoint::new(kept, config.clone()),
        log,
        best_epoch,
    })
}
