//! Complex orthonormal spherical harmonics on Gauss-Legendre grids:
//! pointwise evaluation, forward/inverse transforms, power spectra, and the
//! spectral Laplacian.
//!
//! Convention: `Y_lm(theta, phi) = nalp(l, |m|, cos theta) * exp(i m phi)`
//! for `m >= 0` and `Y_l(-m) = (-1)^m conj(Y_lm)`, i.e. orthonormal complex
//! harmonics with the Condon-Shortley phase. This is the single internal
//! convention; real-valued recombinations live at the positional-encoding
//! layer of the network module.

use crate::error::{Error, Result};
use crate::geom::{GaussLegendreGrid, SphericalPoint};
use crate::legendre::{nalp, nalp_fill, nalp_index};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Packed table of complex coefficients `c_lm` for `0 <= l <= l_max`,
/// `|m| <= l`, at flat index `l^2 + l + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SHCoeffs {
    l_max: usize,
    data: Vec<Complex64>,
}

impl SHCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            data: vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)],
        }
    }

    pub fn from_vec(l_max: usize, data: Vec<Complex64>) -> Result<Self> {
        let expected = (l_max + 1) * (l_max + 1);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "SHCoeffs::from_vec".into(),
                expected,
                got: data.len(),
            });
        }
        Ok(Self { l_max, data })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Flat index of `(l, m)`: `l^2 + l + m`.
    pub fn index(l: usize, m: i64) -> usize {
        debug_assert!(m.unsigned_abs() as usize <= l);
        ((l * l + l) as i64 + m) as usize
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.data[Self::index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.data[Self::index(l, m)] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Iterates `(l, m, c_lm)` in ascending `(l, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.get(l, m)))
        })
    }

    /// Total energy `sum |c_lm|^2`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy at a single degree.
    pub fn degree_energy(&self, l: usize) -> f64 {
        (-(l as i64)..=l as i64)
            .map(|m| self.get(l, m).norm_sqr())
            .sum()
    }

    /// Largest deviation from the real-field symmetry
    /// `c_{l,-m} = (-1)^m conj(c_lm)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..=self.l_max {
            for m in 0..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.get(l, -m) - self.get(l, m).conj().scale(sign);
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Complex scalar samples laid out over a Gauss-Legendre grid.
#[derive(Clone, Debug)]
pub struct GridField {
    pub grid: GaussLegendreGrid,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: GaussLegendreGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridSizeMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: GaussLegendreGrid, values: &[f64]) -> Result<Self> {
        let v = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(grid, v)
    }

    /// Samples a pointwise function over the grid, row-major over `(j, k)`.
    pub fn sample<F: FnMut(SphericalPoint) -> Complex64>(
        grid: GaussLegendreGrid,
        mut f: F,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..grid.n_theta() {
            for k in 0..grid.n_phi() {
                values.push(f(grid.point(j, k)));
            }
        }
        Self { grid, values }
    }

    pub fn value(&self, j: usize, k: usize) -> Complex64 {
        self.values[self.grid.node_index(j, k)]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, c| a.max(c.im.abs()))
    }
}

/// Condon-Shortley-consistent latitude factor: `Y_lm = lambda * exp(i m phi)`
/// with `lambda` real.
fn lambda_lm(l: usize, m: i64, ct: f64, st: f64) -> f64 {
    let ma = m.unsigned_abs() as usize;
    let v = nalp(l, ma, ct, st);
    if m < 0 && ma % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Pointwise orthonormal complex spherical harmonic.
pub fn eval_ylm(l: usize, m: i64, p: SphericalPoint) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidDegreeOrder { l, m });
    }
    let (st, ct) = p.theta.sin_cos();
    let lam = lambda_lm(l, m, ct, st);
    let (s, c) = (m as f64 * p.phi).sin_cos();
    Ok(Complex64::new(lam * c, lam * s))
}

/// Unit roots `exp(-2 pi i r / n)` for `r` in `0..n`.
fn unit_roots_conj(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|r| {
            let a = -TAU * r as f64 / n as f64;
            Complex64::new(a.cos(), a.sin())
        })
        .collect()
}

fn root_index(m: i64, k: usize, n: usize) -> usize {
    (m * k as i64).rem_euclid(n as i64) as usize
}

/// Forward transform by Gauss-Legendre quadrature:
/// `c_lm = sum_{j,k} w_j (2 pi / n_phi) f(j,k) conj(Y_lm(j,k))`.
///
/// Exact, up to round-off, for fields bandlimited at the grid's bandlimit.
/// Summation order is fixed (colatitude-major, ascending `l`) so results are
/// bitwise reproducible.
pub fn sht_forward(f: &GridField, l_max: usize) -> Result<SHCoeffs> {
    let grid = &f.grid;
    if l_max > grid.bandlimit() {
        return Err(Error::BandlimitExceedsGrid {
            requested: l_max,
            grid: grid.bandlimit(),
        });
    }
    let n_phi = grid.n_phi();
    let roots = unit_roots_conj(n_phi);
    let mut coeffs = SHCoeffs::zeros(l_max);
    let mut ptab: Vec<f64> = Vec::new();
    let mut modes = vec![Complex64::new(0.0, 0.0); 2 * l_max + 1];
    let phi_norm = TAU / n_phi as f64;

    for j in 0..grid.n_theta() {
        // Longitude sums G_m = (2 pi / n_phi) sum_k f_jk e^{-i m phi_k}.
        for (mi, g) in modes.iter_mut().enumerate() {
            let m = mi as i64 - l_max as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n_phi {
                acc += f.value(j, k) * roots[root_index(m, k, n_phi)];
            }
            *g = acc * phi_norm;
        }
        let ct = grid.cos_theta(j);
        let st = grid.theta(j).sin();
        nalp_fill(l_max, ct, st, &mut ptab);
        let wj = grid.weight(j);
        for m in -(l_max as i64)..=l_max as i64 {
            let ma = m.unsigned_abs() as usize;
            let neg = m < 0 && ma % 2 == 1;
            let g = modes[(m + l_max as i64) as usize];
            for l in ma..=l_max {
                let mut lam = ptab[nalp_index(l_max, l, ma)];
                if neg {
                    lam = -lam;
                }
                let idx = SHCoeffs::index(l, m);
                coeffs.data[idx] += g * (wj * lam);
            }
        }
    }
    Ok(coeffs)
}

/// Pointwise synthesis `sum_lm c_lm Y_lm` over every node of `grid`.
pub fn sht_inverse(c: &SHCoeffs, grid: &GaussLegendreGrid) -> GridField {
    let l_max = c.l_max();
    let n_phi = grid.n_phi();
    // exp(+ i m phi_k): conjugate table indexed by (-m k) mod n.
    let roots = unit_roots_conj(n_phi);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.node_count()];
    let mut ptab: Vec<f64> = Vec::new();
    let mut modes = vec![Complex64::new(0.0, 0.0); 2 * l_max + 1];

    for j in 0..grid.n_theta() {
        let ct = grid.cos_theta(j);
        let st = grid.theta(j).sin();
        nalp_fill(l_max, ct, st, &mut ptab);
        for (mi, h) in modes.iter_mut().enumerate() {
            let m = mi as i64 - l_max as i64;
            let ma = m.unsigned_abs() as usize;
            let neg = m < 0 && ma % 2 == 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for l in ma..=l_max {
                let mut lam = ptab[nalp_index(l_max, l, ma)];
                if neg {
                    lam = -lam;
                }
                acc += c.get(l, m).scale(lam);
            }
            *h = acc;
        }
        for k in 0..n_phi {
            let mut acc = Complex64::new(0.0, 0.0);
            for (mi, h) in modes.iter().enumerate() {
                let m = mi as i64 - l_max as i64;
                acc += h * roots[root_index(-m, k, n_phi)];
            }
            values[grid.node_index(j, k)] = acc;
        }
    }
    GridField {
        grid: grid.clone(),
        values,
    }
}

/// Degree-wise power spectrum `S(l) = (2l+1)^(-1) sum_m |c_lm|^2`.
pub fn power_spectrum(c: &SHCoeffs) -> Vec<f64> {
    (0..=c.l_max())
        .map(|l| c.degree_energy(l) / (2 * l + 1) as f64)
        .collect()
}

/// Spectral Laplacian: multiplies each degree by `-l(l+1)`.
pub fn laplacian_spectral(c: &SHCoeffs) -> SHCoeffs {
    let mut out = c.clone();
    for l in 0..=c.l_max() {
        let eig = -((l * (l + 1)) as f64);
        for m in -(l as i64)..=l as i64 {
            let idx = SHCoeffs::index(l, m);
            out.data[idx] = c.data[idx].scale(eig);
        }
    }
    out
}

/// Fraction of total energy above degree `l_cut`; 0 for a zero field.
pub fn out_of_band_energy(c: &SHCoeffs, l_cut: usize) -> Result<f64> {
    if l_cut > c.l_max() {
        return Err(Error::CutoffExceedsBandlimit {
            l_cut,
            l_max: c.l_max(),
        });
    }
    let total = c.energy();
    if total == 0.0 {
        return Ok(0.0);
    }
    let high: f64 = ((l_cut + 1)..=c.l_max())
        .map(|l| c.degree_energy(l))
        .sum();
    Ok(high / total)
}
