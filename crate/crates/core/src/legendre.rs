//! Legendre polynomials, Gauss-Legendre rules, and fully normalized
//! associated Legendre functions.
//!
//! The normalized functions `nalp(l, m, ..)` absorb the full spherical
//! normalization, so that `Y_lm = nalp * exp(i m phi)` is orthonormal over
//! the sphere with the Condon-Shortley phase. All recurrences run on the
//! normalized values; no factorial prefactor is ever formed, which keeps the
//! evaluation stable well past degree 600.

use crate::autodiff::Scalar;

/// `P_n(x)` by the standard three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    legendre_p_dp(n, x).0
}

/// `(P_n(x), P_n'(x))`.
pub(crate) fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm1, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = n as f64 * (pm1 - x * p) / (1.0 - x * x);
    (p, dp)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Nodes are returned in descending order (so that `theta = acos(x)` is
/// ascending) and are symmetrized about zero. Newton iteration from the
/// asymptotic initial guess; non-convergence is a defect, not an error state.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0f64; n];
    for (i, node) in nodes.iter_mut().enumerate() {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre_p_dp(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                converged = true;
                break;
            }
        }
        assert!(converged, "Legendre root solve failed at n={n}, i={i}");
        *node = x;
    }
    // Exact +/- symmetry (and an exact central zero for odd n).
    for i in 0..n / 2 {
        let s = 0.5 * (nodes[i] - nodes[n - 1 - i]);
        nodes[i] = s;
        nodes[n - 1 - i] = -s;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, dp) = legendre_p_dp(n, x);
            2.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    (nodes, weights)
}

/// Number of `(l, m)` pairs with `0 <= m <= l <= lmax`.
pub(crate) fn nalp_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Index of `(l, m)` in the m-major table layout used by `nalp_fill`.
pub(crate) fn nalp_index(lmax: usize, l: usize, m: usize) -> usize {
    debug_assert!(m <= l && l <= lmax);
    m * (lmax + 1) - m * (m.saturating_sub(1)) / 2 + (l - m)
}

const Y00: f64 = 0.28209479177387814; // (4 pi)^(-1/2)

/// Fills `out` with all normalized associated Legendre values
/// `nalp(l, m, cos_theta)` for `0 <= m <= l <= lmax`, given `ct = cos(theta)`
/// and `st = sin(theta)` as generic scalars. Layout per `nalp_index`.
pub(crate) fn nalp_fill<S: Scalar>(lmax: usize, ct: S, st: S, out: &mut Vec<S>) {
    out.clear();
    out.resize(nalp_len(lmax), S::constant(0.0));
    let mut pmm = S::constant(Y00);
    for m in 0..=lmax {
        let base = nalp_index(lmax, m, m);
        out[base] = pmm;
        if m < lmax {
            // Sub-diagonal: P(m+1, m) = sqrt(2m + 3) * ct * P(m, m)
            let pm1 = ct.scale(((2 * m + 3) as f64).sqrt()) * pmm;
            out[base + 1] = pm1;
            // Upward in l at fixed m.
            let (mut prev2, mut prev1) = (pmm, pm1);
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf))
                    / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                    .sqrt();
                let next = ct.scale(a) * prev1 - prev2.scale(b);
                out[nalp_index(lmax, l, m)] = next;
                prev2 = prev1;
                prev1 = next;
            }
            // Diagonal step: P(m+1, m+1) = -sqrt((2m+3)/(2m+2)) * st * P(m, m)
            let c = -(((2 * m + 3) as f64) / ((2 * m + 2) as f64)).sqrt();
            pmm = st.scale(c) * pmm;
        }
    }
}

/// Single normalized associated Legendre value for `0 <= m <= l`.
pub fn nalp(l: usize, m: usize, ct: f64, st: f64) -> f64 {
    debug_assert!(m <= l);
    let mut pmm = Y00;
    for k in 0..m {
        pmm *= -((((2 * k + 3) as f64) / ((2 * k + 2) as f64)).sqrt()) * st;
    }
    if l == m {
        return pmm;
    }
    let mut prev2 = pmm;
    let mut prev1 = ((2 * m + 3) as f64).sqrt() * ct * pmm;
    if l == m + 1 {
        return prev1;
    }
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf))
            / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
            .sqrt();
        let next = a * ct * prev1 - b * prev2;
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}
