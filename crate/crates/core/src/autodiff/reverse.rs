//! Reverse-mode accumulation over network parameters.
//!
//! The tape records the forward pass at the granularity of network stages
//! (positional encoding, affine layers, activations): per-sample features,
//! pre-activations, activations and outputs. Replaying the tape reruns the
//! recorded stages and reproduces the forward values exactly; the backward
//! sweep turns the records into exact gradients of the mean squared error.

use crate::error::{Error, Result};
use crate::geom::SphericalPoint;
use crate::herglotz::ATOM_EXP_LIMIT;
use crate::model::{Network, PeSpec};
use num_complex::Complex64;

/// Per-point quantities of the positional encoding that do not depend on
/// trainable parameters; computed once per dataset.
pub(crate) enum PeCache {
    Sine {
        chart: Vec<[f64; 2]>,
    },
    Herglotz {
        /// `a_i^T x` per (point, neuron), point-major.
        t: Vec<Complex64>,
        neurons: usize,
    },
    /// The SphHarm encoding is entirely parameter-free: cache the features.
    SphHarm {
        features: Vec<f64>,
        width: usize,
    },
}

impl PeCache {
    pub(crate) fn build(net: &Network, points: &[SphericalPoint]) -> Result<Self> {
        match &net.arch().pe {
            PeSpec::Sine { .. } => Ok(PeCache::Sine {
                chart: points.iter().map(|p| [p.theta, p.phi]).collect(),
            }),
            PeSpec::Herglotz { dirs, .. } => {
                let neurons = dirs.len();
                let mut t = Vec::with_capacity(points.len() * neurons);
                for p in points {
                    let x = p.unit_vector();
                    for a in dirs {
                        t.push(a.dot(x));
                    }
                }
                Ok(PeCache::Herglotz { t, neurons })
            }
            PeSpec::SphHarm { .. } => {
                let width = net.arch().pe.feature_count();
                let mut features = Vec::with_capacity(points.len() * width);
                let mut buf = Vec::new();
                let mut ptab = Vec::new();
                for p in points {
                    crate::model::pe_eval_generic(
                        &net.arch().pe,
                        &[],
                        p.theta,
                        p.phi,
                        &mut buf,
                        &mut ptab,
                    )?;
                    features.extend_from_slice(&buf);
                }
                Ok(PeCache::SphHarm { features, width })
            }
        }
    }
}

/// Recorded forward pass over a batch.
pub struct Tape {
    n: usize,
    d0: usize,
    /// Features, sample-major.
    features: Vec<f64>,
    /// Sine-PE pre-activations, sample-major (empty for other encodings).
    pe_pre: Vec<f64>,
    /// Per hidden layer: pre-activations and activations, sample-major.
    layer_pre: Vec<Vec<f64>>,
    layer_act: Vec<Vec<f64>>,
    outputs: Vec<f64>,
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            n: 0,
            d0: 0,
            features: Vec::new(),
            pe_pre: Vec::new(),
            layer_pre: Vec::new(),
            layer_act: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Reruns the recorded stages from the stored features; bitwise equal to
    /// the recorded outputs because the operation order is identical.
    pub fn replay(&self, net: &Network) -> Vec<f64> {
        let layout = net.layout();
        let params = net.params();
        let mut out = Vec::with_capacity(self.n);
        let mut h: Vec<f64> = Vec::new();
        let mut next: Vec<f64> = Vec::new();
        for s in 0..self.n {
            h.clear();
            h.extend_from_slice(&self.features[s * self.d0..(s + 1) * self.d0]);
            for (q, layer) in net.arch().hidden.iter().enumerate() {
                let (wr, br) = layout.hidden[q].clone();
                let w = &params[wr];
                let b = &params[br];
                let fan_in = h.len();
                next.clear();
                for j in 0..layer.width {
                    let mut z = b[j];
                    for (wi, hi) in w[j * fan_in..(j + 1) * fan_in].iter().zip(&h) {
                        z += wi * hi;
                    }
                    next.push(layer.activation.apply_d1(z).0);
                }
                std::mem::swap(&mut h, &mut next);
            }
            let w = &params[layout.readout_w.clone()];
            let mut y = params[layout.readout_b];
            for (wi, hi) in w.iter().zip(&h) {
                y += wi * hi;
            }
            out.push(y);
        }
        out
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// Records the forward pass of `net` over the cached samples `idx`.
pub(crate) fn record(
    net: &Network,
    cache: &PeCache,
    idx: &[usize],
    tape: &mut Tape,
) -> Result<()> {
    let layout = net.layout();
    let params = net.params();
    let arch = net.arch();
    let n = idx.len();
    let d0 = arch.pe.feature_count();
    tape.n = n;
    tape.d0 = d0;
    tape.features.clear();
    tape.features.resize(n * d0, 0.0);
    tape.pe_pre.clear();
    tape.layer_pre.resize_with(arch.hidden.len(), Vec::new);
    tape.layer_act.resize_with(arch.hidden.len(), Vec::new);
    for (q, layer) in arch.hidden.iter().enumerate() {
        tape.layer_pre[q].clear();
        tape.layer_pre[q].resize(n * layer.width, 0.0);
        tape.layer_act[q].clear();
        tape.layer_act[q].resize(n * layer.width, 0.0);
    }
    tape.outputs.clear();
    tape.outputs.resize(n, 0.0);

    // Positional encoding.
    match (&arch.pe, cache) {
        (PeSpec::Sine { neurons }, PeCache::Sine { chart }) => {
            tape.pe_pre.resize(n * neurons, 0.0);
            let pe = &params[layout.pe.clone()];
            for (s, &sample) in idx.iter().enumerate() {
                let [t, p] = chart[sample];
                for i in 0..*neurons {
                    let z = pe[3 * i] * t + pe[3 * i + 1] * p + pe[3 * i + 2];
                    tape.pe_pre[s * neurons + i] = z;
                    tape.features[s * d0 + i] = z.sin();
                }
            }
        }
        (PeSpec::Herglotz { omega0, dirs }, PeCache::Herglotz { t, neurons }) => {
            debug_assert_eq!(dirs.len(), *neurons);
            let pe = &params[layout.pe.clone()];
            for (s, &sample) in idx.iter().enumerate() {
                let ts = &t[sample * neurons..(sample + 1) * neurons];
                for i in 0..*neurons {
                    let (wr, wi, br, bi) =
                        (pe[4 * i], pe[4 * i + 1], pe[4 * i + 2], pe[4 * i + 3]);
                    let u = omega0 * (wr * ts[i].re - wi * ts[i].im + br);
                    let v = omega0 * (wr * ts[i].im + wi * ts[i].re + bi);
                    if u > ATOM_EXP_LIMIT {
                        return Err(Error::AtomOverflow {
                            context: format!("pe neuron {i}"),
                            exponent: u,
                            limit: ATOM_EXP_LIMIT,
                        });
                    }
                    let ex = u.exp();
                    let (sv, cv) = v.sin_cos();
                    tape.features[s * d0 + i] = ex * cv;
                    tape.features[s * d0 + neurons + i] = ex * sv;
                }
            }
        }
        (PeSpec::SphHarm { .. }, PeCache::SphHarm { features, width }) => {
            for (s, &sample) in idx.iter().enumerate() {
                tape.features[s * d0..(s + 1) * d0]
                    .copy_from_slice(&features[sample * width..(sample + 1) * width]);
            }
        }
        _ => {
            return Err(Error::DimensionMismatch {
                context: "pe cache kind".into(),
                expected: 0,
                got: 1,
            })
        }
    }

    // Hidden stack and readout.
    for s in 0..n {
        let mut prev_act: &[f64] = &tape.features[s * d0..(s + 1) * d0];
        for (q, layer) in arch.hidden.iter().enumerate() {
            let (wr, br) = layout.hidden[q].clone();
            let w = &params[wr];
            let b = &params[br];
            let fan_in = prev_act.len();
            for j in 0..layer.width {
                let mut z = b[j];
                for (wi, hi) in w[j * fan_in..(j + 1) * fan_in].iter().zip(prev_act) {
                    z += wi * hi;
                }
                tape.layer_pre[q][s * layer.width + j] = z;
            }
            let width = layer.width;
            for j in 0..width {
                tape.layer_act[q][s * width + j] =
                    layer.activation.apply_d1(tape.layer_pre[q][s * width + j]).0;
            }
            prev_act = &tape.layer_act[q][s * width..(s + 1) * width];
        }
        let w = &params[layout.readout_w.clone()];
        let mut y = params[layout.readout_b];
        for (wi, hi) in w.iter().zip(prev_act) {
            y += wi * hi;
        }
        if !y.is_finite() {
            return Err(Error::NonFinite {
                context: format!("forward output of sample {s}"),
            });
        }
        tape.outputs[s] = y;
    }
    Ok(())
}

/// Backward sweep: accumulates the exact gradient of
/// `mean((y_s - target_s)^2)` into `grad` (which must be zeroed by the
/// caller) and returns the loss. Samples are processed in `idx` order so the
/// reduction is deterministic.
pub(crate) fn backward_mse(
    net: &Network,
    cache: &PeCache,
    idx: &[usize],
    targets: &[f64],
    tape: &Tape,
    grad: &mut [f64],
) -> Result<f64> {
    let layout = net.layout();
    let params = net.params();
    let arch = net.arch();
    let n = idx.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    debug_assert_eq!(grad.len(), params.len());
    let d0 = arch.pe.feature_count();
    let inv_n = 1.0 / n as f64;

    let mut loss = 0.0f64;
    let mut delta: Vec<f64> = Vec::new();
    let mut delta_prev: Vec<f64> = Vec::new();

    for (s, &sample) in idx.iter().enumerate() {
        let r = tape.outputs[s] - targets[sample];
        loss += r * r * inv_n;
        let dy = 2.0 * r * inv_n;

        // Readout.
        let last_act: &[f64] = if let Some(q) = arch.hidden.len().checked_sub(1) {
            let width = arch.hidden[q].width;
            &tape.layer_act[q][s * width..(s + 1) * width]
        } else {
            &tape.features[s * d0..(s + 1) * d0]
        };
        let w = &params[layout.readout_w.clone()];
        delta.clear();
        delta.resize(last_act.len(), 0.0);
        for i in 0..last_act.len() {
            grad[layout.readout_w.start + i] += dy * last_act[i];
            delta[i] = dy * w[i];
        }
        grad[layout.readout_b] += dy;

        // Hidden layers, last to first.
        for q in (0..arch.hidden.len()).rev() {
            let layer = &arch.hidden[q];
            let width = layer.width;
            let (wr, br) = layout.hidden[q].clone();
            let w = &params[wr.clone()];
            let prev_act: &[f64] = if q == 0 {
                &tape.features[s * d0..(s + 1) * d0]
            } else {
                let pw = arch.hidden[q - 1].width;
                &tape.layer_act[q - 1][s * pw..(s + 1) * pw]
            };
            let fan_in = prev_act.len();
            delta_prev.clear();
            delta_prev.resize(fan_in, 0.0);
            for j in 0..width {
                let z = tape.layer_pre[q][s * width + j];
                let dz = delta[j] * layer.activation.apply_d1(z).1;
                grad[br.start + j] += dz;
                let row = &w[j * fan_in..(j + 1) * fan_in];
                let grow = &mut grad[wr.start + j * fan_in..wr.start + (j + 1) * fan_in];
                for i in 0..fan_in {
                    grow[i] += dz * prev_act[i];
                    delta_prev[i] += row[i] * dz;
                }
            }
            std::mem::swap(&mut delta, &mut delta_prev);
        }

        // Positional encoding parameters.
        match (&arch.pe, cache) {
            (PeSpec::Sine { neurons }, PeCache::Sine { chart }) => {
                let [t, p] = chart[sample];
                for i in 0..*neurons {
                    let c = tape.pe_pre[s * neurons + i].cos();
                    let df = delta[i] * c;
                    grad[layout.pe.start + 3 * i] += df * t;
                    grad[layout.pe.start + 3 * i + 1] += df * p;
                    grad[layout.pe.start + 3 * i + 2] += df;
                }
            }
            (PeSpec::Herglotz { omega0, dirs }, PeCache::Herglotz { t, neurons }) => {
                let ts = &t[sample * neurons..(sample + 1) * neurons];
                let nn = dirs.len();
                for i in 0..nn {
                    let er = tape.features[s * d0 + i];
                    let ei = tape.features[s * d0 + nn + i];
                    let gr = delta[i];
                    let gi = delta[nn + i];
                    // d(er, ei)/d(u, v) = [[er, -ei], [ei, er]]
                    let a = gr * er + gi * ei;
                    let b = gi * er - gr * ei;
                    let (tr, ti) = (ts[i].re, ts[i].im);
                    grad[layout.pe.start + 4 * i] += omega0 * (a * tr + b * ti);
                    grad[layout.pe.start + 4 * i + 1] += omega0 * (b * tr - a * ti);
                    grad[layout.pe.start + 4 * i + 2] += omega0 * a;
                    grad[layout.pe.start + 4 * i + 3] += omega0 * b;
                }
            }
            (PeSpec::SphHarm { .. }, PeCache::SphHarm { .. }) => {}
            _ => unreachable!("cache kind checked during record"),
        }
    }

    for (i, g) in grad.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient {
                block: layout.block_of(i),
            });
        }
    }
    Ok(loss)
}

/// Exact reverse-mode gradient of the batch MSE with respect to every
/// trainable scalar. Returns `(loss, gradient)` in the canonical parameter
/// layout.
pub fn grad_params(net: &Network, batch: &[(SphericalPoint, f64)]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let points: Vec<SphericalPoint> = batch.iter().map(|(p, _)| *p).collect();
    let targets: Vec<f64> = batch.iter().map(|(_, t)| *t).collect();
    let cache = PeCache::build(net, &points)?;
    let idx: Vec<usize> = (0..batch.len()).collect();
    let mut tape = Tape::new();
    record(net, &cache, &idx, &mut tape)?;
    let mut grad = vec![0.0; net.param_count()];
    let loss = backward_mse(net, &cache, &idx, &targets, &tape, &mut grad)?;
    Ok((loss, grad))
}
