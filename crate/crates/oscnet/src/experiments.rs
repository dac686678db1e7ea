//! End-to-end MNIST protocols shared by the CLI and the acceptance suite.
//!
//! Unsupervised accuracy always goes through
//! [`oscnet_core::eval::majority_accuracy`]: each unit (or cluster) takes the
//! majority train label of the samples it wins, and test samples are
//! classified by their winner.

use oscnet_core::baseline;
use oscnet_core::baseline::{train_autoencoder, AeConfig, Autoencoder};
use oscnet_core::data::LabeledDataset;
use oscnet_core::eval;
use oscnet_core::hebbian::{self, fit_linear_head, HeadConfig, HebbianConfig, KMeansFit, LinearHead, TrainState};
use oscnet_core::Matrix;

use crate::error::Result;
use crate::parallel;

pub const DEFAULT_EPOCHS: usize = 2;
pub const KMEANS_ITERS: usize = 100;

/// Winner → majority-label accuracy of arbitrary unit activations.
pub fn activation_accuracy(
    train_act: &Matrix,
    train: &LabeledDataset,
    test_act: &Matrix,
    test: &LabeledDataset,
) -> Result<f64> {
    let tw = hebbian::winners_of(train_act);
    let sw = hebbian::winners_of(test_act);
    Ok(eval::majority_accuracy(&tw, train.labels()?, &sw, test.labels()?, train_act.cols(), train.n_classes))
}

pub fn train_hebbian(
    train: &LabeledDataset,
    m: usize,
    epochs: usize,
    cfg: &HebbianConfig,
    seed: u64,
) -> Result<TrainState> {
    Ok(hebbian::pretrain(train, m, epochs, cfg, seed)?)
}

pub fn hebbian_unsupervised(state: &TrainState, train: &LabeledDataset, test: &LabeledDataset) -> Result<f64> {
    let a = parallel::hebbian_responses(state, &train.features)?;
    let b = parallel::hebbian_responses(state, &test.features)?;
    activation_accuracy(&a, train, &b, test)
}

/// Trains a head on `train_act` and scores it on `test_act`.
pub fn head_accuracy(
    train_act: &Matrix,
    train: &LabeledDataset,
    test_act: &Matrix,
    test: &LabeledDataset,
    cfg: &HeadConfig,
) -> Result<(LinearHead, f64)> {
    let head = fit_linear_head(train_act, train.labels()?, train.n_classes, cfg)?;
    let acc = eval::accuracy(&head.predict_all(test_act)?, test.labels()?);
    Ok((head, acc))
}

pub fn hebbian_finetune(
    state: &TrainState,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &HeadConfig,
) -> Result<(LinearHead, f64)> {
    let a = parallel::hebbian_responses(state, &train.features)?;
    let b = parallel::hebbian_responses(state, &test.features)?;
    head_accuracy(&a, train, &b, test, cfg)
}

/// `[n, h_1, …, h_k, …, h_1, n]` for encoder widths `hidden`.
pub fn ae_dims(n: usize, hidden: &[usize]) -> Vec<usize> {
    let mut d = vec![n];
    d.extend_from_slice(hidden);
    d.extend(hidden.iter().rev().skip(1));
    d.push(n);
    d
}

pub fn train_ae(train: &LabeledDataset, hidden: &[usize], cfg: &AeConfig, seed: u64) -> Result<Autoencoder> {
    Ok(train_autoencoder(&train.features, &ae_dims(train.n_features(), hidden), cfg, seed)?)
}

pub fn ae_unsupervised(ae: &Autoencoder, train: &LabeledDataset, test: &LabeledDataset) -> Result<f64> {
    let a = parallel::ae_codes(ae, &train.features)?;
    let b = parallel::ae_codes(ae, &test.features)?;
    activation_accuracy(&a, train, &b, test)
}

pub fn ae_finetune(
    ae: &Autoencoder,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &HeadConfig,
) -> Result<(LinearHead, f64)> {
    let a = parallel::ae_codes(ae, &train.features)?;
    let b = parallel::ae_codes(ae, &test.features)?;
    head_accuracy(&a, train, &b, test, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMeansVariant {
    Oscnet,
    Euclidean,
}

pub fn fit_kmeans(
    train: &LabeledDataset,
    variant: KMeansVariant,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<KMeansFit> {
    Ok(match variant {
        KMeansVariant::Oscnet => hebbian::kmeans_fit(train, k, iters, seed)?,
        KMeansVariant::Euclidean => baseline::euclidean_kmeans(train, k, iters, seed)?,
    })
}

pub fn kmeans_accuracy(fit: &KMeansFit, train: &LabeledDataset, test: &LabeledDataset) -> Result<f64> {
    let test_assign = fit.model.assign_all(&test.features)?;
    Ok(eval::majority_accuracy(
        &fit.assignments,
        train.labels()?,
        &test_assign,
        test.labels()?,
        fit.model.k(),
        train.n_classes,
    ))
}
