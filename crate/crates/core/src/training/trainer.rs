use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::adamax::{adamax_step, AdamaxHyper, OptimizerState};
use super::checkpoint::{encode_checkpoint, Checkpoint};
use super::loss::{loss, loss_value, LossWeights};
use super::TrainError;
use crate::data::{
    derive_rng, make_model_inputs, standardize, DataError, ModelInputs, Segment, SegmentPools,
    SignalKind, SnrConvention,
};
use crate::model::{denoise, forward, init_params, ModelConfig, ModelParams, ParamVars};
use crate::tensor::{Graph, Tensor};

const TRAIN_TAG: u64 = 0x7472_6169;
const TEST_TAG: u64 = 0x7465_7374;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Optimizer steps per epoch; `None` means one pass over the clean
    /// training segments, `⌈n_eeg / batch_size⌉`.
    pub steps_per_epoch: Option<usize>,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub loss_weights: LossWeights,
    pub snr_train_range: [f64; 2],
    pub snr_test_range: [f64; 2],
    pub snr_convention: SnrConvention,
    /// Size of the fixed test synthesis scored after every epoch.
    pub test_examples: usize,
    /// Write a checkpoint every this many epochs; 0 writes only the last.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let h = AdamaxHyper::default();
        Self {
            epochs: 5,
            batch_size: 32,
            steps_per_epoch: None,
            alpha: h.alpha,
            beta1: h.beta1,
            beta2: h.beta2,
            loss_weights: LossWeights::default(),
            snr_train_range: [-7.0, 4.0],
            snr_test_range: [-7.0, 2.0],
            snr_convention: SnrConvention::default(),
            test_examples: 64,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn hyper(&self) -> AdamaxHyper {
        AdamaxHyper {
            alpha: self.alpha,
            beta1: self.beta1,
            beta2: self.beta2,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.epochs == 0 {
            v.push("epochs: must be at least 1".into());
        }
        if self.batch_size == 0 {
            v.push("batch_size: must be at least 1".into());
        }
        if self.steps_per_epoch == Some(0) {
            v.push("steps_per_epoch: must be at least 1".into());
        }
        v.extend(self.hyper().violations());
        v.extend(self.loss_weights.violations());
        for (name, [lo, hi]) in [
            ("snr_train_range", self.snr_train_range),
            ("snr_test_range", self.snr_test_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                v.push(format!("{name}: need finite bounds with low <= high"));
            }
        }
        if self.test_examples == 0 {
            v.push("test_examples: must be at least 1".into());
        }
        v
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(TrainError::InvalidConfig(v))
        }
    }

    /// Equal apart from the epoch budget, which a resumed run may extend.
    fn resumable_from(&self, other: &TrainConfig) -> bool {
        TrainConfig {
            epochs: 0,
            ..self.clone()
        } == TrainConfig {
            epochs: 0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub seconds: f64,
    /// First 16 hex digits of the SHA-256 of the `f32` parameters.
    pub checksum: String,
}

/// A standardized example ready for the model.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedExample {
    pub inputs: ModelInputs,
    pub x_hat: Tensor,
    pub kind: SignalKind,
    pub snr_db: f64,
}

impl PreparedExample {
    pub fn draw(
        pools: &SegmentPools,
        kind: SignalKind,
        snr_range: [f64; 2],
        conv: SnrConvention,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, DataError> {
        let m = pools.draw_mixture(kind, (snr_range[0], snr_range[1]), conv, rng)?;
        let s = standardize(&m)?;
        Ok(Self {
            inputs: make_model_inputs(&s)?,
            x_hat: s.x_hat,
            kind,
            snr_db: m.snr_db,
        })
    }
}

pub fn params_checksum(params: &ModelParams) -> String {
    let mut h = Sha256::new();
    for t in params.tensors() {
        for &v in t.data() {
            h.update((v as f32).to_le_bytes());
        }
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Loss-history CSV, `epoch,train_loss,test_loss,seconds`.
pub fn history_csv(records: &[TrainRecord]) -> String {
    let mut s = String::from("epoch,train_loss,test_loss,seconds\n");
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, r.test_loss, r.seconds);
    }
    s
}

fn quantize(t: &mut Tensor) {
    for v in t.data_mut() {
        *v = *v as f32 as f64;
    }
}

/// Loss and parameter gradients for one example.
fn example_gradient(
    cfg: &ModelConfig,
    params: &ModelParams,
    ex: &PreparedExample,
    w: &LossWeights,
) -> Result<(f64, Vec<Tensor>), TrainError> {
    let mut g = Graph::new();
    let pv = ParamVars::register(&mut g, params, true);
    let ModelInputs {
        noisy,
        psd_noise,
        psd_noisy,
    } = &ex.inputs;
    let pass = forward(&mut g, cfg, &pv, noisy, psd_noise, psd_noisy)?;
    let l = loss(&mut g, &ex.x_hat, pass.output, w)?;
    let value = g.value(l)?.data()[0];
    let gm = g.backward(l)?;
    let grads = pv
        .vars()
        .iter()
        .zip(params.tensors())
        .map(|(&v, p)| gm.get(v).cloned().unwrap_or_else(|| Tensor::zeros(p.shape())))
        .collect();
    Ok((value, grads))
}

/// The epoch loop. Every random draw comes from a stream keyed on
/// `(seed, epoch, step, element)`, so a run depends only on its seed and
/// the epoch counter, whatever the thread count.
pub struct Trainer {
    model: ModelConfig,
    config: TrainConfig,
    seed: u64,
    pools: SegmentPools,
    kinds: Vec<SignalKind>,
    test_set: Vec<PreparedExample>,
    params: ModelParams,
    opt: OptimizerState,
    epoch: usize,
    history: Vec<TrainRecord>,
    pool: Option<rayon::ThreadPool>,
}

impl Trainer {
    pub fn new(
        model: ModelConfig,
        config: TrainConfig,
        seed: u64,
        train: &[Segment],
        test: &[Segment],
    ) -> Result<Self, TrainError> {
        model.validate()?;
        config.validate()?;
        let params = init_params(&model, seed);
        let opt = OptimizerState::new(&params, config.hyper());
        Self::assemble(model, config, seed, train, test, params, opt, 0, Vec::new())
    }

    /// Continues from a checkpoint. The model config, seed and every
    /// training setting except `epochs` must match the checkpointed run.
    pub fn resume(
        ck: Checkpoint,
        model: ModelConfig,
        config: TrainConfig,
        seed: u64,
        train: &[Segment],
        test: &[Segment],
    ) -> Result<Self, TrainError> {
        if ck.model != model {
            return Err(TrainError::ConfigMismatch(
                "model config differs from the checkpoint".into(),
            ));
        }
        if !ck.train_config.resumable_from(&config) {
            return Err(TrainError::ConfigMismatch(
                "training settings differ from the checkpoint".into(),
            ));
        }
        if ck.seed != seed {
            return Err(TrainError::ConfigMismatch(format!(
                "seed {seed} differs from checkpoint seed {}",
                ck.seed
            )));
        }
        config.validate()?;
        Self::assemble(
            model,
            config,
            seed,
            train,
            test,
            ck.params,
            ck.optimizer,
            ck.epoch,
            ck.history,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        model: ModelConfig,
        config: TrainConfig,
        seed: u64,
        train: &[Segment],
        test: &[Segment],
        params: ModelParams,
        opt: OptimizerState,
        epoch: usize,
        history: Vec<TrainRecord>,
    ) -> Result<Self, TrainError> {
        let n = model.signal_length;
        if let Some(s) = train.iter().chain(test).find(|s| s.len() != n) {
            return Err(TrainError::Shape(format!(
                "segment {} has length {}, model expects {n}",
                s.source_id,
                s.len()
            )));
        }
        let pools = SegmentPools::from_segments(train.iter().cloned());
        let kinds = pools.artifact_kinds();
        if pools.eeg.is_empty() || kinds.is_empty() {
            return Err(DataError::EmptyDataset.into());
        }
        let test_pools = SegmentPools::from_segments(test.iter().cloned());
        let test_kinds = test_pools.artifact_kinds();
        if test_pools.eeg.is_empty() || test_kinds.is_empty() {
            return Err(DataError::EmptyDataset.into());
        }
        let test_set = (0..config.test_examples)
            .map(|i| {
                let mut rng = derive_rng(seed, &[TEST_TAG, i as u64]);
                let kind = test_kinds[i % test_kinds.len()];
                PreparedExample::draw(
                    &test_pools,
                    kind,
                    config.snr_test_range,
                    config.snr_convention,
                    &mut rng,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            model,
            config,
            seed,
            pools,
            kinds,
            test_set,
            params,
            opt,
            epoch,
            history,
            pool: None,
        })
    }

    /// Worker threads for per-example forward/backward passes. Gradients are
    /// always summed in element order, so results do not depend on `n`.
    pub fn set_threads(&mut self, n: usize) -> Result<(), TrainError> {
        self.pool = if n > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| TrainError::InvalidConfig(vec![format!("threads: {e}")]))?,
            )
        } else {
            None
        };
        Ok(())
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn model_config(&self) -> &ModelConfig {
        &self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn optimizer(&self) -> &OptimizerState {
        &self.opt
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn history(&self) -> &[TrainRecord] {
        &self.history
    }

    pub fn test_set(&self) -> &[PreparedExample] {
        &self.test_set
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.config
            .steps_per_epoch
            .unwrap_or_else(|| self.pools.eeg.len().div_ceil(self.config.batch_size))
    }

    fn map_ordered<T: Send>(
        &self,
        n: usize,
        f: impl Fn(usize) -> Result<T, TrainError> + Sync + Send,
    ) -> Result<Vec<T>, TrainError> {
        match &self.pool {
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            None => (0..n).map(f).collect(),
        }
    }

    /// Batch for `(epoch, step)`; element `e` is contaminated with the
    /// artifact kind `e mod k`, which alternates EOG and EMG.
    pub fn batch(&self, epoch: usize, step: usize) -> Result<Vec<PreparedExample>, TrainError> {
        self.map_ordered(self.config.batch_size, |e| {
            let mut rng = derive_rng(self.seed, &[TRAIN_TAG, epoch as u64, step as u64, e as u64]);
            let kind = self.kinds[e % self.kinds.len()];
            Ok(PreparedExample::draw(
                &self.pools,
                kind,
                self.config.snr_train_range,
                self.config.snr_convention,
                &mut rng,
            )?)
        })
    }

    /// Mean loss and mean gradient over a batch.
    pub fn batch_gradient(
        &self,
        batch: &[PreparedExample],
    ) -> Result<(f64, Vec<Tensor>), TrainError> {
        let per = self.map_ordered(batch.len(), |i| {
            example_gradient(&self.model, &self.params, &batch[i], &self.config.loss_weights)
        })?;
        let mut it = per.into_iter();
        let (mut total, mut acc) = it
            .next()
            .ok_or_else(|| TrainError::Shape("empty batch".into()))?;
        for (l, grads) in it {
            total += l;
            for (a, g) in acc.iter_mut().zip(&grads) {
                a.add_assign(g);
            }
        }
        let k = 1.0 / batch.len() as f64;
        Ok((total * k, acc.into_iter().map(|a| a.scale(k)).collect()))
    }

    /// Mean loss of the current parameters on the fixed test synthesis.
    pub fn test_loss(&self) -> Result<f64, TrainError> {
        let per = self.map_ordered(self.test_set.len(), |i| {
            let ex = &self.test_set[i];
            let ModelInputs {
                noisy,
                psd_noise,
                psd_noisy,
            } = &ex.inputs;
            let pred = denoise(&self.model, &self.params, noisy, psd_noise, psd_noisy)?;
            loss_value(&ex.x_hat, &pred, &self.config.loss_weights)
        })?;
        Ok(per.iter().sum::<f64>() / per.len() as f64)
    }

    /// Runs one epoch and appends its record.
    pub fn run_epoch(&mut self) -> Result<TrainRecord, TrainError> {
        let start = Instant::now();
        let epoch = self.epoch + 1;
        let steps = self.steps_per_epoch();
        let mut total = 0.0;
        for step in 0..steps {
            let batch = self.batch(epoch, step)?;
            let (l, grads) = self.batch_gradient(&batch)?;
            if !l.is_finite() || grads.iter().any(|g| g.data().iter().any(|v| !v.is_finite())) {
                return Err(TrainError::NonFinite { epoch, step });
            }
            total += l;
            adamax_step(&mut self.params, &grads, &mut self.opt)?;
            // keep everything f32-representable so weight files and
            // checkpoints reproduce the in-memory state exactly
            for t in self.params.tensors_mut() {
                quantize(t);
            }
            for t in self.opt.m.iter_mut().chain(self.opt.u.iter_mut()) {
                quantize(t);
            }
        }
        let test_loss = self.test_loss()?;
        let record = TrainRecord {
            epoch,
            train_loss: total / steps as f64,
            test_loss,
            seconds: start.elapsed().as_secs_f64(),
            checksum: params_checksum(&self.params),
        };
        self.epoch = epoch;
        self.history.push(record.clone());
        Ok(record)
    }

    /// Runs epochs until `self.epoch() == until`, calling `on_epoch` after
    /// each one.
    pub fn run_until(
        &mut self,
        until: usize,
        mut on_epoch: impl FnMut(&Trainer, &TrainRecord) -> Result<(), TrainError>,
    ) -> Result<(), TrainError> {
        while self.epoch < until {
            let r = self.run_epoch()?;
            on_epoch(self, &r)?;
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            model: self.model.clone(),
            params: self.params.clone(),
            optimizer: self.opt.clone(),
            seed: self.seed,
            epoch: self.epoch,
            train_config: self.config.clone(),
            history: self.history.clone(),
        }
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<(), TrainError> {
        std::fs::write(path, encode_checkpoint(&self.checkpoint())?)?;
        Ok(())
    }

    pub fn into_params(self) -> ModelParams {
        self.params
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<TrainRecord>,
}

/// Trains for `config.epochs` epochs. When `checkpoint_dir` is set, writes
/// `checkpoint_epochNNNN.ednw` every `checkpoint_every` epochs and after the
/// last one.
pub fn train(
    model: ModelConfig,
    config: TrainConfig,
    seed: u64,
    train_segments: &[Segment],
    test_segments: &[Segment],
    threads: usize,
    checkpoint_dir: Option<&Path>,
) -> Result<TrainOutcome, TrainError> {
    let epochs = config.epochs;
    let every = config.checkpoint_every;
    let mut t = Trainer::new(model, config, seed, train_segments, test_segments)?;
    t.set_threads(threads)?;
    t.run_until(epochs, |tr, r| {
        if let Some(dir) = checkpoint_dir {
            if (every > 0 && r.epoch % every == 0) || r.epoch == epochs {
                tr.save_checkpoint(dir.join(format!("checkpoint_epoch{:04}.ednw", r.epoch)))?;
            }
        }
        Ok(())
    })?;
    Ok(TrainOutcome {
        history: t.history.clone(),
        params: t.into_params(),
    })
}
