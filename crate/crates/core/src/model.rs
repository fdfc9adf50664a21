//! The INR zoo: positional encodings (sine over the chart, Herglotz atoms,
//! real spherical harmonics), a sine- or polynomial-activated MLP, SIREN
//! initialization, forward evaluation, and exact parameter counting.
//!
//! Evaluation is generic over [`Scalar`] so the same composition runs on
//! plain `f64`, on second-order duals (for the spherical Laplacian), and on
//! first-order duals seeded in parameter space (for derivative checks).

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use crate::geom::SphericalPoint;
use crate::herglotz::{sample_herglotz, HerglotzVector, ATOM_EXP_LIMIT};
use crate::legendre::{nalp_fill, nalp_index};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

/// Polynomial activation `sigma(z) = sum_k alpha_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyActivationSpec {
    coeffs: Vec<f64>,
}

impl PolyActivationSpec {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::BadConfig("polynomial needs >= 1 coefficient".into())),
            Some(0.0) if coeffs.len() > 1 => {
                Err(Error::BadConfig("leading polynomial coefficient is zero".into()))
            }
            _ => Ok(Self { coeffs }),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval<S: Scalar>(&self, z: S) -> S {
        let mut acc = S::constant(*self.coeffs.last().unwrap());
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = acc * z;
            acc = acc.add_const(c);
        }
        acc
    }

    /// Value and first derivative at a plain scalar (for backprop).
    pub fn eval_d1(&self, z: f64) -> (f64, f64) {
        let mut v = *self.coeffs.last().unwrap();
        let mut d = 0.0;
        for &c in self.coeffs.iter().rev().skip(1) {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    }
}

/// Per-layer activation; sine carries an optional fixed frequency
/// multiplier `sin(frequency * z)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Activation {
    Sine { frequency: f64 },
    Polynomial(PolyActivationSpec),
}

impl Activation {
    pub fn sine() -> Self {
        Activation::Sine { frequency: 1.0 }
    }

    fn apply<S: Scalar>(&self, z: S) -> S {
        match self {
            Activation::Sine { frequency } => z.scale(*frequency).sin(),
            Activation::Polynomial(p) => p.eval(z),
        }
    }

    /// `(sigma(z), sigma'(z))` for backprop.
    pub(crate) fn apply_d1(&self, z: f64) -> (f64, f64) {
        match self {
            Activation::Sine { frequency } => {
                let (s, c) = (frequency * z).sin_cos();
                (s, frequency * c)
            }
            Activation::Polynomial(p) => p.eval_d1(z),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub width: usize,
    pub activation: Activation,
}

/// Positional encoding stage. Fixed (non-trainable) data lives here; the
/// trainable scalars live in the network's flat parameter vector.
#[derive(Clone, Debug)]
pub enum PeSpec {
    /// `sin(w . (theta, phi) + b)` per neuron; `w` and `b` trainable.
    Sine { neurons: usize },
    /// Herglotz atoms `exp(omega0 (w a^T x + b))` with fixed directions and
    /// trainable complex `w`, `b`; emits real parts then imaginary parts.
    Herglotz {
        omega0: f64,
        dirs: Vec<HerglotzVector>,
    },
    /// Real-recombined spherical harmonics up to `l0`; no trainable scalars.
    SphHarm { l0: usize },
}

impl PeSpec {
    pub fn feature_count(&self) -> usize {
        match self {
            PeSpec::Sine { neurons } => *neurons,
            PeSpec::Herglotz { dirs, .. } => 2 * dirs.len(),
            PeSpec::SphHarm { l0 } => (l0 + 1) * (l0 + 1),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            PeSpec::Sine { neurons } => 3 * neurons,
            PeSpec::Herglotz { dirs, .. } => 4 * dirs.len(),
            PeSpec::SphHarm { .. } => 0,
        }
    }
}

/// Network shape: positional encoding, hidden layers, scalar readout with a
/// bias. Dimensions chain from the PE feature count through `hidden` to 1.
#[derive(Clone, Debug)]
pub struct Arch {
    pub pe: PeSpec,
    pub hidden: Vec<LayerSpec>,
}

/// Offsets of the canonical flat parameter vector:
/// PE block, then per hidden layer the row-major weight matrix followed by
/// the bias vector, then readout weights and readout bias.
#[derive(Clone, Debug)]
pub struct ParamLayout {
    pub pe: Range<usize>,
    pub hidden: Vec<(Range<usize>, Range<usize>)>,
    pub readout_w: Range<usize>,
    pub readout_b: usize,
    pub total: usize,
}

impl ParamLayout {
    /// Human-readable name of the block containing a flat index.
    pub fn block_of(&self, idx: usize) -> String {
        if self.pe.contains(&idx) {
            return "positional encoding".into();
        }
        for (q, (w, b)) in self.hidden.iter().enumerate() {
            if w.contains(&idx) {
                return format!("hidden layer {q} weights");
            }
            if b.contains(&idx) {
                return format!("hidden layer {q} biases");
            }
        }
        if self.readout_w.contains(&idx) {
            return "readout weights".into();
        }
        "readout bias".into()
    }
}

impl Arch {
    /// Layer widths from the PE output through the hidden stack.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.pe.feature_count()];
        w.extend(self.hidden.iter().map(|l| l.width));
        w
    }

    pub fn layout(&self) -> ParamLayout {
        let mut off = 0usize;
        let pe = 0..self.pe.param_count();
        off += pe.len();
        let mut hidden = Vec::with_capacity(self.hidden.len());
        let mut fan_in = self.pe.feature_count();
        for layer in &self.hidden {
            let w = off..off + fan_in * layer.width;
            off = w.end;
            let b = off..off + layer.width;
            off = b.end;
            hidden.push((w, b));
            fan_in = layer.width;
        }
        let readout_w = off..off + fan_in;
        off = readout_w.end;
        let readout_b = off;
        off += 1;
        ParamLayout {
            pe,
            hidden,
            readout_w,
            readout_b,
            total: off,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

/// A network: shape plus the flat trainable parameter vector.
#[derive(Clone, Debug)]
pub struct Network {
    arch: Arch,
    params: Vec<f64>,
}

/// Model families from the experimental setup, with their construction
/// knobs. `omega0` is the frequency scale: inside the atoms for `Hnet`,
/// a first-layer scale for `Siren` (applied to the PE init), and the first
/// hidden activation frequency for `SphSiren`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Hnet {
        neurons: usize,
        hidden: Vec<usize>,
        omega0: f64,
    },
    Siren {
        neurons: usize,
        hidden: Vec<usize>,
        omega0: f64,
    },
    SphSiren {
        l0: usize,
        hidden: Vec<usize>,
        omega0: f64,
    },
}

impl ModelConfig {
    pub fn omega0(&self) -> f64 {
        match self {
            ModelConfig::Hnet { omega0, .. }
            | ModelConfig::Siren { omega0, .. }
            | ModelConfig::SphSiren { omega0, .. } => *omega0,
        }
    }

    pub fn hidden(&self) -> &[usize] {
        match self {
            ModelConfig::Hnet { hidden, .. }
            | ModelConfig::Siren { hidden, .. }
            | ModelConfig::SphSiren { hidden, .. } => hidden,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega0() > 0.0) || !self.omega0().is_finite() {
            return Err(Error::BadConfig("omega0 must be positive".into()));
        }
        match self {
            ModelConfig::Hnet { neurons, .. } | ModelConfig::Siren { neurons, .. } => {
                if *neurons == 0 {
                    return Err(Error::BadConfig("PE needs at least one neuron".into()));
                }
            }
            ModelConfig::SphSiren { .. } => {}
        }
        if self.hidden().contains(&0) {
            return Err(Error::BadConfig("hidden widths must be positive".into()));
        }
        Ok(())
    }

    /// Shape with the given fixed Herglotz directions (used when restoring a
    /// checkpoint); for other kinds `dirs` must be empty.
    pub fn arch_with_dirs(&self, dirs: Vec<HerglotzVector>) -> Result<Arch> {
        self.validate()?;
        let pe = match self {
            ModelConfig::Hnet { neurons, omega0, .. } => {
                if dirs.len() != *neurons {
                    return Err(Error::DimensionMismatch {
                        context: "herglotz directions".into(),
                        expected: *neurons,
                        got: dirs.len(),
                    });
                }
                PeSpec::Herglotz {
                    omega0: *omega0,
                    dirs,
                }
            }
            ModelConfig::Siren { neurons, .. } => PeSpec::Sine { neurons: *neurons },
            ModelConfig::SphSiren { l0, .. } => PeSpec::SphHarm { l0: *l0 },
        };
        let mut hidden: Vec<LayerSpec> = self
            .hidden()
            .iter()
            .map(|&width| LayerSpec {
                width,
                activation: Activation::sine(),
            })
            .collect();
        if let ModelConfig::SphSiren { omega0, .. } = self {
            if let Some(first) = hidden.first_mut() {
                first.activation = Activation::Sine { frequency: *omega0 };
            }
        }
        Ok(Arch { pe, hidden })
    }

    /// Trainable parameter count; independent of the random directions.
    pub fn param_count(&self) -> Result<usize> {
        // Dummy directions just to shape the arch.
        let dirs = match self {
            ModelConfig::Hnet { neurons, .. } => {
                vec![
                    HerglotzVector::new(
                        crate::geom::Vec3::new(0.5, 0.0, 0.0),
                        crate::geom::Vec3::new(0.0, 0.5, 0.0)
                    );
                    *neurons
                ]
            }
            _ => Vec::new(),
        };
        Ok(self.arch_with_dirs(dirs)?.param_count())
    }
}

impl Network {
    /// Builds and initializes a model reproducibly from a seed, using the
    /// SIREN scheme: the first trainable affine layer uniform in
    /// `(-1/fan_in, 1/fan_in)`, deeper affine layers uniform in
    /// `(-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0)`, Herglotz weights
    /// uniform on the complex unit disk with zero biases, Herglotz
    /// directions freshly sampled, and all affine biases zero.
    ///
    /// For the sine PE the drawn frequencies are scaled by `omega0` (the
    /// first-layer scale folded into the trainable parameters) and phases
    /// are uniform in `(-pi, pi)`.
    pub fn init_siren(config: &ModelConfig, seed: u64) -> Result<Network> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let dirs = match config {
            ModelConfig::Hnet { neurons, .. } => {
                (0..*neurons).map(|_| sample_herglotz(&mut rng)).collect()
            }
            _ => Vec::new(),
        };
        let arch = config.arch_with_dirs(dirs)?;
        let layout = arch.layout();
        let mut params = vec![0.0f64; layout.total];
        let omega0 = config.omega0();

        match &arch.pe {
            PeSpec::Herglotz { dirs, .. } => {
                for i in 0..dirs.len() {
                    // Uniform on the unit disk via the polar map.
                    let r = rng.gen_range(0.0f64..1.0).sqrt();
                    let ang = rng.gen_range(0.0..2.0 * PI);
                    params[4 * i] = r * ang.cos();
                    params[4 * i + 1] = r * ang.sin();
                    // biases start at exactly zero
                }
            }
            PeSpec::Sine { neurons } => {
                let bound = 1.0 / 2.0; // fan_in = 2 chart coordinates
                for i in 0..*neurons {
                    params[3 * i] = omega0 * rng.gen_range(-bound..bound);
                    params[3 * i + 1] = omega0 * rng.gen_range(-bound..bound);
                    params[3 * i + 2] = rng.gen_range(-PI..PI);
                }
            }
            PeSpec::SphHarm { .. } => {}
        }

        // The PE is the first trainable affine stage unless it has no
        // parameters, in which case the first affine matrix takes that role.
        let mut first_affine = arch.pe.param_count() == 0;
        let mut fan_in = arch.pe.feature_count();
        for (q, layer) in arch.hidden.iter().enumerate() {
            let (w_range, _) = layout.hidden[q].clone();
            let bound = if first_affine {
                1.0 / fan_in as f64
            } else {
                (6.0 / fan_in as f64).sqrt() / omega0
            };
            first_affine = false;
            for idx in w_range {
                params[idx] = rng.gen_range(-bound..bound);
            }
            fan_in = layer.width;
        }
        let bound = if first_affine {
            1.0 / fan_in as f64
        } else {
            (6.0 / fan_in as f64).sqrt() / omega0
        };
        for idx in layout.readout_w.clone() {
            params[idx] = rng.gen_range(-bound..bound);
        }

        Ok(Network { arch, params })
    }

    pub fn from_parts(arch: Arch, params: Vec<f64>) -> Result<Network> {
        let expected = arch.param_count();
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "network parameters".into(),
                expected,
                got: params.len(),
            });
        }
        Ok(Network { arch, params })
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layout(&self) -> ParamLayout {
        self.arch.layout()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Positional-encoding features at a point.
    pub fn pe_features(&self, p: SphericalPoint) -> Result<Vec<f64>> {
        let layout = self.layout();
        let mut scratch = EvalScratch::new();
        let mut out = Vec::new();
        pe_eval_generic(
            &self.arch.pe,
            &self.params[layout.pe],
            p.theta,
            p.phi,
            &mut out,
            &mut scratch.ptab,
        )?;
        Ok(out)
    }

    /// Plain forward evaluation.
    pub fn forward(&self, p: SphericalPoint) -> Result<f64> {
        let mut scratch = EvalScratch::new();
        eval_network(&self.arch, &self.params, p.theta, p.phi, &mut scratch)
    }
}

/// Number of trainable scalars of a network.
pub fn param_count(net: &Network) -> usize {
    net.param_count()
}

/// Forward evaluation, free-function form.
pub fn forward(net: &Network, p: SphericalPoint) -> Result<f64> {
    net.forward(p)
}

/// Positional-encoding features, free-function form.
pub fn pe_eval(net: &Network, p: SphericalPoint) -> Result<Vec<f64>> {
    net.pe_features(p)
}

/// Reusable buffers for generic evaluation.
pub struct EvalScratch<S: Scalar> {
    cur: Vec<S>,
    next: Vec<S>,
    ptab: Vec<S>,
}

impl<S: Scalar> EvalScratch<S> {
    pub fn new() -> Self {
        Self {
            cur: Vec::new(),
            next: Vec::new(),
            ptab: Vec::new(),
        }
    }
}

impl<S: Scalar> Default for EvalScratch<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// Positional-encoding features in generic scalar arithmetic. `params` is
/// the PE block of the flat parameter vector.
pub(crate) fn pe_eval_generic<S: Scalar>(
    pe: &PeSpec,
    params: &[S],
    theta: S,
    phi: S,
    out: &mut Vec<S>,
    ptab: &mut Vec<S>,
) -> Result<()> {
    out.clear();
    match pe {
        PeSpec::Sine { neurons } => {
            for i in 0..*neurons {
                let s = theta * params[3 * i] + phi * params[3 * i + 1] + params[3 * i + 2];
                out.push(s.sin());
            }
        }
        PeSpec::Herglotz { omega0, dirs } => {
            let st = theta.sin();
            let ct = theta.cos();
            let sp = phi.sin();
            let cp = phi.cos();
            let x = [st * cp, st * sp, ct];
            let n = dirs.len();
            out.resize(2 * n, S::constant(0.0));
            for (i, a) in dirs.iter().enumerate() {
                let tr = x[0].scale(a.re.x) + x[1].scale(a.re.y) + x[2].scale(a.re.z);
                let ti = x[0].scale(a.im.x) + x[1].scale(a.im.y) + x[2].scale(a.im.z);
                let wr = params[4 * i];
                let wi = params[4 * i + 1];
                let br = params[4 * i + 2];
                let bi = params[4 * i + 3];
                let u = (wr * tr - wi * ti + br).scale(*omega0);
                let v = (wr * ti + wi * tr + bi).scale(*omega0);
                if u.value() > ATOM_EXP_LIMIT {
                    return Err(Error::AtomOverflow {
                        context: format!("pe neuron {i}"),
                        exponent: u.value(),
                        limit: ATOM_EXP_LIMIT,
                    });
                }
                let ex = u.exp();
                out[i] = ex * v.cos();
                out[n + i] = ex * v.sin();
            }
        }
        PeSpec::SphHarm { l0 } => {
            let l0 = *l0;
            let st = theta.sin();
            let ct = theta.cos();
            nalp_fill(l0, ct, st, ptab);
            out.resize((l0 + 1) * (l0 + 1), S::constant(0.0));
            let sqrt2 = 2.0f64.sqrt();
            for l in 0..=l0 {
                let base = l * l;
                out[base] = ptab[nalp_index(l0, l, 0)];
                for m in 1..=l {
                    let lam = ptab[nalp_index(l0, l, m)].scale(sqrt2);
                    let ang = phi.scale(m as f64);
                    out[base + 2 * m - 1] = lam * ang.cos();
                    out[base + 2 * m] = lam * ang.sin();
                }
            }
        }
    }
    Ok(())
}

/// Full forward composition in generic scalar arithmetic. `params` must have
/// the canonical layout of `arch.layout()`.
pub(crate) fn eval_network<S: Scalar>(
    arch: &Arch,
    params: &[S],
    theta: S,
    phi: S,
    scratch: &mut EvalScratch<S>,
) -> Result<S> {
    let layout = arch.layout();
    debug_assert_eq!(params.len(), layout.total);

    pe_eval_generic(
        &arch.pe,
        &params[layout.pe.clone()],
        theta,
        phi,
        &mut scratch.cur,
        &mut scratch.ptab,
    )?;
    for f in &scratch.cur {
        if !f.all_finite() {
            return Err(Error::NonFinite {
                context: "positional encoding output".into(),
            });
        }
    }

    for (q, layer) in arch.hidden.iter().enumerate() {
        let (w_range, b_range) = layout.hidden[q].clone();
        let w = &params[w_range];
        let b = &params[b_range];
        let fan_in = scratch.cur.len();
        scratch.next.clear();
        for j in 0..layer.width {
            let row = &w[j * fan_in..(j + 1) * fan_in];
            let mut z = b[j];
            for (wi, hi) in row.iter().zip(&scratch.cur) {
                z = z + *wi * *hi;
            }
            let h = layer.activation.apply(z);
            if !h.all_finite() {
                return Err(Error::NonFinite {
                    context: format!("hidden layer {q}"),
                });
            }
            scratch.next.push(h);
        }
        std::mem::swap(&mut scratch.cur, &mut scratch.next);
    }

    let w = &params[layout.readout_w.clone()];
    let mut y = params[layout.readout_b];
    for (wi, hi) in w.iter().zip(&scratch.cur) {
        y = y + *wi * *hi;
    }
    if !y.all_finite() {
        return Err(Error::NonFinite {
            context: "readout".into(),
        });
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::gl_grid;
    use num_complex::Complex64;

    const SQRT_4PI: f64 = 3.5449077018110318;

    fn hnet_cfg(neurons: usize, hidden: Vec<usize>, omega0: f64) -> ModelConfig {
        ModelConfig::Hnet {
            neurons,
            hidden,
            omega0,
        }
    }

    #[test]
    fn param_counts_match_reported_configs() {
        // HNET: 50 neurons -> 100 features; hidden 100,100,100; readout.
        let hnet = hnet_cfg(50, vec![100, 100, 100], 10.0);
        assert_eq!(hnet.param_count().unwrap(), 30601);
        // SPH-SIREN: l0 = 10 -> 121 features; hidden 100,100.
        let sph = ModelConfig::SphSiren {
            l0: 10,
            hidden: vec![100, 100],
            omega0: 3.0,
        };
        assert_eq!(sph.param_count().unwrap(), 22401);
        // SIREN: 100 sine neurons, hidden 100,100,100: one above the
        // reported 30700 under the uniform every-affine-has-a-bias rule.
        let siren = ModelConfig::Siren {
            neurons: 100,
            hidden: vec![100, 100, 100],
            omega0: 10.0,
        };
        let n = siren.param_count().unwrap();
        assert!(n == 30701 && (n as i64 - 30700).abs() <= 1);
    }

    #[test]
    fn param_count_minimal_network() {
        // Readout on a single SphHarm feature plus its bias.
        let cfg = ModelConfig::SphSiren {
            l0: 0,
            hidden: vec![],
            omega0: 1.0,
        };
        assert_eq!(cfg.param_count().unwrap(), 2);
    }

    #[test]
    fn pe_sphharm_constant_feature() {
        let net = Network::init_siren(
            &ModelConfig::SphSiren {
                l0: 0,
                hidden: vec![],
                omega0: 1.0,
            },
            3,
        )
        .unwrap();
        let f = net.pe_features(SphericalPoint::new(1.1, 2.2).unwrap()).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0] - 1.0 / SQRT_4PI).abs() < 1e-12);
    }

    #[test]
    fn pe_herglotz_omega_zero() {
        let mut net = Network::init_siren(&hnet_cfg(1, vec![], 1.0), 5).unwrap();
        // Zero omega0 cannot be configured (init divides by it); emulate the
        // degenerate atom by zeroing w and b instead: exp(0) = 1.
        net.params_mut()[0] = 0.0;
        net.params_mut()[1] = 0.0;
        let f = net.pe_features(SphericalPoint::new(0.7, 0.3).unwrap()).unwrap();
        assert_eq!(f.len(), 2);
        assert!((f[0] - 1.0).abs() < 1e-15);
        assert!(f[1].abs() < 1e-15);
    }

    #[test]
    fn pe_sine_constant_phase() {
        let mut net = Network::init_siren(
            &ModelConfig::Siren {
                neurons: 1,
                hidden: vec![],
                omega0: 1.0,
            },
            5,
        )
        .unwrap();
        net.params_mut()[0] = 0.0;
        net.params_mut()[1] = 0.0;
        net.params_mut()[2] = PI / 2.0;
        for (t, p) in [(0.3, 0.1), (1.5, 4.4), (3.0, 0.0)] {
            let f = net.pe_features(SphericalPoint::new(t, p).unwrap()).unwrap();
            assert!((f[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_zero_weights_returns_readout_bias() {
        let cfg = hnet_cfg(4, vec![8, 8], 2.0);
        let mut net = Network::init_siren(&cfg, 1).unwrap();
        for p in net.params_mut().iter_mut() {
            *p = 0.0;
        }
        let layout = net.layout();
        let beta = 0.7312;
        net.params_mut()[layout.readout_b] = beta;
        for (t, p) in [(0.0, 0.0), (1.2, 3.3), (3.1, 6.1)] {
            let y = net.forward(SphericalPoint::new(t, p).unwrap()).unwrap();
            assert_eq!(y, beta);
        }
    }

    #[test]
    fn forward_single_sphharm_feature() {
        let cfg = ModelConfig::SphSiren {
            l0: 0,
            hidden: vec![],
            omega0: 1.0,
        };
        let mut net = Network::init_siren(&cfg, 1).unwrap();
        let layout = net.layout();
        let w = -2.25;
        net.params_mut()[layout.readout_w.start] = w;
        net.params_mut()[layout.readout_b] = 0.0;
        let y = net.forward(SphericalPoint::new(0.9, 0.2).unwrap()).unwrap();
        assert!((y - w / SQRT_4PI).abs() < 1e-14);
    }

    /// Independently coded straight-line evaluator used as an oracle for the
    /// generic forward pass: complex arithmetic via num_complex, explicit
    /// index bookkeeping, accumulation in a different association order.
    fn straight_line_forward(net: &Network, p: SphericalPoint) -> f64 {
        let params = net.params();
        let layout = net.layout();
        let mut h: Vec<f64> = match &net.arch().pe {
            PeSpec::Sine { neurons } => (0..*neurons)
                .map(|i| {
                    (params[3 * i] * p.theta + params[3 * i + 1] * p.phi + params[3 * i + 2]).sin()
                })
                .collect(),
            PeSpec::Herglotz { omega0, dirs } => {
                let x = p.unit_vector();
                let n = dirs.len();
                let mut v = vec![0.0; 2 * n];
                for i in 0..n {
                    let t = Complex64::new(dirs[i].re.dot(&x), dirs[i].im.dot(&x));
                    let w = Complex64::new(params[4 * i], params[4 * i + 1]);
                    let b = Complex64::new(params[4 * i + 2], params[4 * i + 3]);
                    let atom = ((w * t + b) * *omega0).exp();
                    v[i] = atom.re;
                    v[n + i] = atom.im;
                }
                v
            }
            PeSpec::SphHarm { l0 } => {
                let mut v = vec![0.0; (l0 + 1) * (l0 + 1)];
                for l in 0..=*l0 {
                    for m in 0..=l as i64 {
                        let y = crate::sh::eval_ylm(l, m, p).unwrap();
                        if m == 0 {
                            v[l * l] = y.re;
                        } else {
                            v[l * l + 2 * m as usize - 1] = 2.0f64.sqrt() * y.re;
                            v[l * l + 2 * m as usize] = 2.0f64.sqrt() * y.im;
                        }
                    }
                }
                v
            }
        };
        for (q, layer) in net.arch().hidden.iter().enumerate() {
            let (wr, br) = layout.hidden[q].clone();
            let w = &params[wr];
            let b = &params[br];
            let fan_in = h.len();
            let mut out = vec![0.0; layer.width];
            // Column-major accumulation, unlike the row-dot in eval_network.
            for (i, hi) in h.iter().enumerate() {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += w[j * fan_in + i] * hi;
                }
            }
            for (j, o) in out.iter_mut().enumerate() {
                let z = *o + b[j];
                *o = match &layer.activation {
                    Activation::Sine { frequency } => (frequency * z).sin(),
                    Activation::Polynomial(ps) => {
                        let mut acc = 0.0;
                        for (k, c) in ps.coeffs().iter().enumerate() {
                            acc += c * z.powi(k as i32);
                        }
                        acc
                    }
                };
            }
            h = out;
        }
        let w = &params[layout.readout_w.clone()];
        let mut y = params[layout.readout_b];
        for i in 0..h.len() {
            y += w[i] * h[i];
        }
        y
    }

    #[test]
    fn forward_matches_straight_line_oracle() {
        let configs = vec![
            hnet_cfg(7, vec![13, 11], 6.0),
            ModelConfig::Siren {
                neurons: 9,
                hidden: vec![10, 10],
                omega0: 8.0,
            },
            ModelConfig::SphSiren {
                l0: 3,
                hidden: vec![12, 7],
                omega0: 3.0,
            },
        ];
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for cfg in configs {
            let net = Network::init_siren(&cfg, 123).unwrap();
            for _ in 0..25 {
                let p =
                    SphericalPoint::new(rng.gen_range(0.01..PI - 0.01), rng.gen_range(0.0..6.28))
                        .unwrap();
                let a = net.forward(p).unwrap();
                let b = straight_line_forward(&net, p);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn init_respects_siren_bounds() {
        let cfg = hnet_cfg(50, vec![100, 100, 100], 10.0);
        let net = Network::init_siren(&cfg, 9).unwrap();
        let layout = net.layout();
        let bound = (6.0f64 / 100.0).sqrt() / 10.0;
        for (w_range, b_range) in &layout.hidden {
            for idx in w_range.clone() {
                assert!(net.params()[idx].abs() <= bound);
            }
            for idx in b_range.clone() {
                assert_eq!(net.params()[idx], 0.0);
            }
        }
        // Herglotz weights on the unit disk, biases exactly zero.
        for i in 0..50 {
            let w = Complex64::new(net.params()[4 * i], net.params()[4 * i + 1]);
            assert!(w.norm() <= 1.0);
            assert_eq!(net.params()[4 * i + 2], 0.0);
            assert_eq!(net.params()[4 * i + 3], 0.0);
        }
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = hnet_cfg(12, vec![20, 20], 5.0);
        let a = Network::init_siren(&cfg, 42).unwrap();
        let b = Network::init_siren(&cfg, 42).unwrap();
        assert_eq!(a.params(), b.params());
        let c = Network::init_siren(&cfg, 43).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn forward_is_smooth_in_the_chart() {
        // Second differences of the forward pass converge at second order.
        let net = Network::init_siren(&hnet_cfg(6, vec![10], 4.0), 3).unwrap();
        let t0 = 1.1;
        let p0 = 2.3;
        let f = |t: f64, p: f64| net.forward(SphericalPoint::new(t, p).unwrap()).unwrap();
        let second = |h: f64| (f(t0 + h, p0) - 2.0 * f(t0, p0) + f(t0 - h, p0)) / (h * h);
        let coarse = second(1e-2);
        let fine = second(5e-3);
        // Extrapolated Richardson limit changes by ~h^2.
        let limit = (4.0 * fine - coarse) / 3.0;
        assert!((fine - limit).abs() <= 0.26 * (coarse - limit).abs().max(1e-9));
    }

    #[test]
    fn pole_continuity_of_spherical_encodings() {
        // Herglotz and SphHarm networks are single-valued at the poles:
        // values at (eps, phi) collapse to O(eps) spread. The sine-PE chart
        // model is exempt; its spread stays O(1).
        let eps = 1e-6;
        let spread = |net: &Network| {
            let vals: Vec<f64> = (0..16)
                .map(|k| {
                    let p = SphericalPoint::new(eps, k as f64 * PI / 8.0).unwrap();
                    net.forward(p).unwrap()
                })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        };
        // O(eps) with a generous Lipschitz allowance of 100.
        let hnet = Network::init_siren(&hnet_cfg(16, vec![24, 24], 10.0), 8).unwrap();
        assert!(spread(&hnet) < 100.0 * eps);
        let sph = Network::init_siren(
            &ModelConfig::SphSiren {
                l0: 6,
                hidden: vec![24],
                omega0: 3.0,
            },
            8,
        )
        .unwrap();
        assert!(spread(&sph) < 100.0 * eps);

        let siren = Network::init_siren(
            &ModelConfig::Siren {
                neurons: 24,
                hidden: vec![24, 24],
                omega0: 10.0,
            },
            8,
        )
        .unwrap();
        // The chart encoding genuinely varies over the pole circle.
        assert!(spread(&siren) > 1e-3);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(Network::init_siren(&hnet_cfg(0, vec![4], 1.0), 0).is_err());
        assert!(Network::init_siren(&hnet_cfg(4, vec![0], 1.0), 0).is_err());
        assert!(Network::init_siren(&hnet_cfg(4, vec![4], 0.0), 0).is_err());
        assert!(Network::init_siren(&hnet_cfg(4, vec![4], -2.0), 0).is_err());
    }

    #[test]
    fn poly_activation_eval() {
        let p = PolyActivationSpec::new(vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(p.degree(), 2);
        let z = 1.5f64;
        let expect = 1.0 - 2.0 * z + 0.5 * z * z;
        assert!((p.eval(z) - expect).abs() < 1e-15);
        let (v, d) = p.eval_d1(z);
        assert!((v - expect).abs() < 1e-15);
        assert!((d - (-2.0 + z)).abs() < 1e-15);
        assert!(PolyActivationSpec::new(vec![]).is_err());
        assert!(PolyActivationSpec::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn network_uses_gl_nodes_without_pole_issues() {
        let net = Network::init_siren(&hnet_cfg(4, vec![8], 3.0), 11).unwrap();
        let g = gl_grid(6);
        for j in 0..g.n_theta() {
            for k in 0..g.n_phi() {
                assert!(net.forward(g.point(j, k)).unwrap().is_finite());
            }
        }
    }
}
