//! Training protocol: target standardization, minibatched Adam on the mean
//! squared error, the quadrature-weighted SNR metric, and fit orchestration.

use crate::autodiff::{backward_mse, record, PeCache, Tape};
use crate::error::{Error, Result};
use crate::geom::SphericalPoint;
use crate::model::Network;
use crate::sh::GridField;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap standing in for +inf dB on an exact match.
pub const SNR_CAP_DB: f64 = 300.0;

/// Tolerated imaginary residue (relative to the RMS) when interpreting a
/// complex grid field as real training targets.
const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            batch_size: 2048,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.epochs > 0
            && self.batch_size > 0
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig("train config fields must be positive".into()))
        }
    }
}

/// Affine map `(x - mean) / std` fitted on the training targets;
/// `transform` and `untransform` are exact inverses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn identity() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn untransform(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Sample mean and population standard deviation of the targets.
pub fn standardize_fit(targets: &[f64]) -> Result<Standardizer> {
    if targets.len() < 2 {
        return Err(Error::TooFewSamples { got: targets.len() });
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(Error::ConstantTargets);
    }
    Ok(Standardizer { mean, std })
}

/// Adam moment estimates.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update with bias correction; deterministic.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &TrainConfig) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let b1 = cfg.beta1;
    let b2 = cfg.beta2;
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// Trained model together with its target standardizer and loss history.
pub struct FitOutcome {
    pub network: Network,
    pub standardizer: Standardizer,
    /// Mean MSE (in standardized units) per epoch, over the minibatches as
    /// they were visited.
    pub loss_history: Vec<f64>,
}

/// Minibatched Adam on raw (already standardized or otherwise prepared)
/// targets; one entry of loss history per epoch. Fully reproducible from
/// `cfg.seed` (shuffling uses its own ChaCha stream).
pub fn fit_raw(
    mut network: Network,
    points: &[SphericalPoint],
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if points.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            context: "targets".into(),
            expected: points.len(),
            got: targets.len(),
        });
    }
    let cache = PeCache::build(&network, points)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut tape = Tape::new();
    let mut grad = vec![0.0f64; network.param_count()];
    let mut adam = AdamState::new(network.param_count());
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut epoch_loss = 0.0f64;
        for (bi, batch) in order.chunks(cfg.batch_size).enumerate() {
            let wrap = |e: Error| Error::Training {
                epoch,
                batch: bi,
                source: Box::new(e),
            };
            record(&network, &cache, batch, &mut tape).map_err(wrap)?;
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = backward_mse(&network, &cache, batch, targets, &tape, &mut grad)
                .map_err(wrap)?;
            adam_step(network.params_mut(), &grad, &mut adam, cfg);
            epoch_loss += loss * batch.len() as f64;
        }
        history.push(epoch_loss / points.len() as f64);
    }
    Ok((network, history))
}

/// The full protocol: standardize the (real) targets of a grid dataset,
/// minimize the MSE with minibatched Adam, return the model plus the
/// standardizer and the per-epoch loss history.
pub fn fit(network: Network, data: &GridField, cfg: &TrainConfig) -> Result<FitOutcome> {
    let raw = data.real_values();
    let rms = (raw.iter().map(|v| v * v).sum::<f64>() / raw.len() as f64).sqrt();
    let imag = data.max_imag();
    if imag > IMAG_TOL * rms.max(1e-300) {
        return Err(Error::ComplexTargets { max_imag: imag });
    }
    let standardizer = standardize_fit(&raw)?;
    let targets: Vec<f64> = raw.iter().map(|&t| standardizer.transform(t)).collect();
    let points = data.grid.points();
    let (network, loss_history) = fit_raw(network, &points, &targets, cfg)?;
    Ok(FitOutcome {
        network,
        standardizer,
        loss_history,
    })
}

/// Quadrature-weighted signal-to-noise ratio in dB:
/// `10 log10(sum w truth^2 / sum w (pred - truth)^2)`, capped at
/// [`SNR_CAP_DB`]; comparisons are in original (de-standardized) units.
pub fn snr_db(pred: &GridField, truth: &GridField) -> Result<f64> {
    if !pred.grid.same_layout(&truth.grid) {
        return Err(Error::GridMismatch {
            context: format!(
                "prediction on L={}, truth on L={}",
                pred.grid.bandlimit(),
                truth.grid.bandlimit()
            ),
        });
    }
    let grid = &truth.grid;
    let mut signal = 0.0f64;
    let mut noise = 0.0f64;
    for j in 0..grid.n_theta() {
        let w = grid.node_weight(j);
        for k in 0..grid.n_phi() {
            let t = truth.value(j, k);
            let d = pred.value(j, k) - t;
            signal += w * t.norm_sqr();
            noise += w * d.norm_sqr();
        }
    }
    if signal == 0.0 {
        return Err(Error::ZeroEnergyReference);
    }
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}
