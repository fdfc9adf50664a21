//! Unit-sphere geometry: coordinates, rotations, random directions, and
//! Gauss-Legendre sampling grids with quadrature weights.

use crate::error::{Error, Result};
use crate::legendre;
use rand::Rng;
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// Point on the unit sphere: colatitude `theta` in `[0, pi]` (0 at the north
/// pole) and longitude `phi` in `[0, 2*pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    /// Builds a point, rejecting colatitudes outside `[0, pi]` and reducing
    /// the longitude modulo `2*pi`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidColatitude { theta });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidLongitude { phi });
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    pub fn unit_vector(&self) -> Vec3 {
        unit_vector(*self)
    }
}

/// Cartesian 3-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(&self) -> Vec3 {
        self.scale(1.0 / self.norm())
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

/// Chart map `(theta, phi) -> (sin t cos p, sin t sin p, cos t)`.
pub fn unit_vector(p: SphericalPoint) -> Vec3 {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// Uniform random direction. Draws `z ~ U[-1,1)` then `phi ~ U[0,2*pi)`;
/// the result has unit norm by construction.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let s = (1.0 - z * z).sqrt();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(s * cp, s * sp, z)
}

/// Validated element of SO(3).
#[derive(Clone, Copy, Debug)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    const TOL: f64 = 1e-12;

    /// Validates `R^T R = I` (within 1e-12 per entry) and `det R = +1`.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let mut defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m[k][i] * m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((s - target).abs());
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        defect = defect.max((det - 1.0).abs());
        if defect > Self::TOL {
            return Err(Error::NotARotation { defect });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rodrigues formula; `axis` is normalized internally.
    pub fn axis_angle(axis: Vec3, angle: f64) -> Self {
        let u = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (u.x, u.y, u.z);
        Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }
}

/// Applies a raw 3x3 matrix to `v`, rejecting matrices that are not special
/// orthogonal.
pub fn apply_rotation(m: [[f64; 3]; 3], v: Vec3) -> Result<Vec3> {
    Ok(Rotation::from_matrix(m)?.apply(v))
}

/// Product sampling grid on the sphere for a bandlimit `L`:
/// `L+1` colatitudes at the roots of the Legendre polynomial of degree `L+1`
/// with the corresponding Gauss weights (summing to 2), and `2L+1` equispaced
/// longitudes starting at `phi = 0`.
///
/// Node enumeration is row-major over `(j, k)` with colatitudes ascending in
/// `theta` (north to south) and `phi_k = 2*pi*k/(2L+1)`.
#[derive(Clone, Debug)]
pub struct GaussLegendreGrid {
    bandlimit: usize,
    cos_theta: Vec<f64>, // strictly decreasing, inside (-1, 1)
    theta: Vec<f64>,     // acos(cos_theta), ascending
    weight: Vec<f64>,    // Gauss weights over d(cos theta), sum = 2
    n_phi: usize,
}

impl GaussLegendreGrid {
    pub fn new(bandlimit: usize) -> Self {
        let n = bandlimit + 1;
        let (cos_theta, weight) = legendre::gauss_legendre_rule(n);
        let theta = cos_theta.iter().map(|&x| x.acos()).collect();
        Self {
            bandlimit,
            cos_theta,
            theta,
            weight,
            n_phi: 2 * bandlimit + 1,
        }
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn node_count(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta[j]
    }

    pub fn cos_theta(&self, j: usize) -> f64 {
        self.cos_theta[j]
    }

    /// Colatitude Gauss weight (measure `d cos(theta)`).
    pub fn weight(&self, j: usize) -> f64 {
        self.weight[j]
    }

    pub fn phi(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n_phi as f64
    }

    /// Full 2-sphere measure carried by node `(j, *)`: `w_j * 2*pi/n_phi`.
    pub fn node_weight(&self, j: usize) -> f64 {
        self.weight[j] * TAU / self.n_phi as f64
    }

    pub fn node_index(&self, j: usize, k: usize) -> usize {
        j * self.n_phi + k
    }

    pub fn point(&self, j: usize, k: usize) -> SphericalPoint {
        SphericalPoint {
            theta: self.theta[j],
            phi: self.phi(k),
        }
    }

    /// All nodes in storage order.
    pub fn points(&self) -> Vec<SphericalPoint> {
        let mut out = Vec::with_capacity(self.node_count());
        for j in 0..self.n_theta() {
            for k in 0..self.n_phi {
                out.push(self.point(j, k));
            }
        }
        out
    }

    /// Two grids are interchangeable iff they share the bandlimit; nodes are
    /// then bitwise identical by construction.
    pub fn same_layout(&self, other: &GaussLegendreGrid) -> bool {
        self.bandlimit == other.bandlimit
    }

    /// CSV serialization: header `theta,phi,weight`, row-major over `(j, k)`,
    /// with the full per-node 2-sphere measure in the weight column.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "theta,phi,weight")?;
        for j in 0..self.n_theta() {
            let w = self.node_weight(j);
            for k in 0..self.n_phi {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", self.theta[j], self.phi(k), w)?;
            }
        }
        Ok(())
    }
}

/// Shorthand constructor matching the grid's role in the transforms.
pub fn gl_grid(bandlimit: usize) -> GaussLegendreGrid {
    GaussLegendreGrid::new(bandlimit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Test-local Legendre evaluator, independent of crate::legendre.
    fn legendre_oracle(n: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if n == 0 {
            return p0;
        }
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    fn bisect_root(n: usize, mut lo: f64, mut hi: f64) -> f64 {
        let flo = legendre_oracle(n, lo);
        assert!(flo * legendre_oracle(n, hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = legendre_oracle(n, mid);
            if flo * fm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn unit_vector_chart_points() {
        let p = |t, f| SphericalPoint::new(t, f).unwrap();
        let close = |v: Vec3, e: (f64, f64, f64)| {
            assert!((v.x - e.0).abs() < 1e-14);
            assert!((v.y - e.1).abs() < 1e-14);
            assert!((v.z - e.2).abs() < 1e-14);
        };
        close(unit_vector(p(0.0, 0.0)), (0.0, 0.0, 1.0));
        close(unit_vector(p(PI / 2.0, 0.0)), (1.0, 0.0, 0.0));
        close(unit_vector(p(PI / 2.0, PI / 2.0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn unit_vector_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = SphericalPoint::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)).unwrap();
            assert!((unit_vector(p).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn point_validation() {
        assert!(SphericalPoint::new(-0.1, 0.0).is_err());
        assert!(SphericalPoint::new(PI + 0.1, 0.0).is_err());
        assert!(SphericalPoint::new(f64::NAN, 0.0).is_err());
        let p = SphericalPoint::new(1.0, -0.5).unwrap();
        assert!((p.phi - (TAU - 0.5)).abs() < 1e-15);
        let q = SphericalPoint::new(1.0, TAU).unwrap();
        assert_eq!(q.phi, 0.0);
    }

    #[test]
    fn grid_l0_matches_bisection_oracle() {
        // Root of P_1 on [-1, 1] located independently by bisection.
        let root = bisect_root(1, -0.9, 0.9);
        let g = gl_grid(0);
        assert_eq!(g.n_theta(), 1);
        assert_eq!(g.n_phi(), 1);
        assert!((g.cos_theta(0) - root).abs() < 1e-14);
        assert!((g.weight(0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_l2_nodes_closed_form() {
        // Roots of P_3: {-sqrt(3/5), 0, sqrt(3/5)}; theta ascending means
        // cos(theta) descending.
        let g = gl_grid(2);
        let expected = [0.7745966692414834, 0.0, -0.7745966692414834];
        for (j, e) in expected.iter().enumerate() {
            assert!((g.cos_theta(j) - e).abs() < 1e-14, "node {j}");
        }
    }

    #[test]
    fn grid_weights_sum_to_two() {
        for l in [0usize, 1, 2, 5, 16, 33, 64] {
            let g = gl_grid(l);
            let s: f64 = (0..g.n_theta()).map(|j| g.weight(j)).sum();
            assert!((s - 2.0).abs() < 1e-12, "L={l}: sum={s}");
        }
    }

    #[test]
    fn grid_quadrature_exactness() {
        // For every l in 1..=2L+1 the rule must annihilate P_l.
        for l in [0usize, 1, 2, 5, 16] {
            let g = gl_grid(l);
            for deg in 1..=(2 * l + 1) {
                let s: f64 = (0..g.n_theta())
                    .map(|j| g.weight(j) * legendre_oracle(deg, g.cos_theta(j)))
                    .sum();
                assert!(s.abs() < 1e-10, "L={l} deg={deg}: {s}");
            }
        }
    }

    #[test]
    fn grid_contains_no_poles() {
        for l in [0usize, 3, 20, 64] {
            let g = gl_grid(l);
            for j in 0..g.n_theta() {
                assert!(g.theta(j) > 0.0 && g.theta(j) < PI);
                assert!(g.cos_theta(j) > -1.0 && g.cos_theta(j) < 1.0);
            }
        }
    }

    #[test]
    fn random_unit_moments() {
        // Monte-Carlo oracle: each Cartesian mean of 1e5 draws lies within
        // 4 sigma of 0, sigma = (3e5)^(-1/2) per component.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000usize;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let v = random_unit(&mut rng);
            assert!((v.norm() - 1.0).abs() < 1e-14);
            sx += v.x;
            sy += v.y;
            sz += v.z;
        }
        let bound = 4.0 / (3.0 * n as f64).sqrt();
        for m in [sx, sy, sz] {
            assert!((m / n as f64).abs() < bound);
        }
    }

    #[test]
    fn random_unit_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..32 {
            assert_eq!(random_unit(&mut a), random_unit(&mut b));
        }
    }

    #[test]
    fn rotation_basics() {
        let v = Vec3::new(1.0, 0.0, 0.0);
        let id = Rotation::identity();
        assert_eq!(id.apply(v), v);

        let r = Rotation::about_z(PI / 2.0);
        let w = r.apply(v);
        assert!((w.x - 0.0).abs() < 1e-15);
        assert!((w.y - 1.0).abs() < 1e-15);

        // Scaled matrix is rejected.
        let bad = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        assert!(apply_rotation(bad, v).is_err());
        // Reflection (det = -1) is rejected.
        let refl = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(apply_rotation(refl, v).is_err());
    }

    #[test]
    fn rotation_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = Rotation::axis_angle(random_unit(&mut rng), rng.gen_range(0.0..TAU));
            let v = random_unit(&mut rng).scale(rng.gen_range(0.1..5.0));
            let w = apply_rotation(*r.matrix(), v).unwrap();
            assert!((w.norm() - v.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_csv_layout() {
        let g = gl_grid(2);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta,phi,weight");
        assert_eq!(lines.len(), 1 + g.node_count());
        // Total measure is the sphere area 4*pi.
        let total: f64 = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn chart_injective_away_from_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = SphericalPoint::new(rng.gen_range(0.01..PI - 0.01), rng.gen_range(0.0..TAU))
                .unwrap();
            let b = SphericalPoint::new(rng.gen_range(0.01..PI - 0.01), rng.gen_range(0.0..TAU))
                .unwrap();
            let dist = (a.theta - b.theta).abs() + (a.phi - b.phi).abs();
            if dist > 1e-6 {
                let d = unit_vector(a) - unit_vector(b);
                assert!(d.norm() > 0.0, "chart collision at {a:?} vs {b:?}");
            }
        }
    }
}
