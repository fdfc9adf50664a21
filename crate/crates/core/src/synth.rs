//! Synthetic bandlimited test fields with a power-law spectrum; the stand-in
//! data source for experiments and the import-format counterpart of
//! user-supplied coefficient files.

use crate::sh::SHCoeffs;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Recipe for a random real-valued field, exactly bandlimited at
/// `bandlimit`, with expected power spectrum `S(l) = (1 + l)^(-exponent)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub bandlimit: usize,
    pub exponent: f64,
    pub seed: u64,
}

/// Draws the coefficients: complex Gaussians with degree-wise variance
/// `(1 + l)^(-exponent)` and the conjugate symmetry of a real field.
/// Draw order is fixed (ascending `l`, then `m = 0..l`, real part before
/// imaginary part), so a seed pins the field bitwise.
pub fn synth_field(spec: &SynthSpec) -> SHCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut c = SHCoeffs::zeros(spec.bandlimit);
    let inv_sqrt2 = 0.5f64.sqrt();
    for l in 0..=spec.bandlimit {
        let sigma = (1.0 + l as f64).powf(-spec.exponent / 2.0);
        let g: f64 = StandardNormal.sample(&mut rng);
        c.set(l, 0, Complex64::new(sigma * g, 0.0));
        for m in 1..=l as i64 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let v = Complex64::new(re, im) * (sigma * inv_sqrt2);
            c.set(l, m, v);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            c.set(l, -m, v.conj() * sign);
        }
    }
    c
}
