//! Differentiation engines.
//!
//! Two independent mechanisms: reverse-mode accumulation over network
//! parameters (training gradients, see [`grad_params`]) and second-order
//! forward propagation in the chart variables, from which the spherical
//! Laplacian follows by the chart formula
//! `lap f = f_tt + cot(t) f_t + f_pp / sin^2(t)`.

mod dual;
mod reverse;

pub use dual::{Dual1, Dual2, Scalar};
pub use reverse::{grad_params, Tape};

pub(crate) use reverse::{backward_mse, record, PeCache};

use crate::error::{Error, Result};
use crate::geom::{GaussLegendreGrid, SphericalPoint};
use crate::model::{eval_network, EvalScratch, Network};
use crate::sh::GridField;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Colatitude margin below which the chart Laplacian is refused; every
/// Gauss-Legendre node satisfies it with orders of magnitude to spare.
pub const POLE_MARGIN: f64 = 1e-6;

fn laplacian_at<S: FnMut(Dual2, Dual2) -> Result<Dual2>>(
    p: SphericalPoint,
    mut eval: S,
) -> Result<f64> {
    if p.theta < POLE_MARGIN || p.theta > PI - POLE_MARGIN {
        return Err(Error::PoleProximity {
            theta: p.theta,
            margin: POLE_MARGIN,
        });
    }
    let y = eval(Dual2::var1(p.theta), Dual2::var2(p.phi))?;
    let (st, ct) = p.theta.sin_cos();
    Ok(y.d11 + (ct / st) * y.d1 + y.d22 / (st * st))
}

/// Spherical Laplacian of the network output at a point, by exact
/// second-order forward propagation through the full composition (including
/// the positional encoding).
pub fn spherical_laplacian(net: &Network, p: SphericalPoint) -> Result<f64> {
    let params: Vec<Dual2> = net.params().iter().map(|&v| Dual2::constant(v)).collect();
    let mut scratch = EvalScratch::new();
    laplacian_at(p, |t, f| eval_network(net.arch(), &params, t, f, &mut scratch))
}

/// Spherical Laplacian over every node of a grid (parameters are lifted to
/// dual constants once).
pub fn laplacian_field(net: &Network, grid: &GaussLegendreGrid) -> Result<GridField> {
    let params: Vec<Dual2> = net.params().iter().map(|&v| Dual2::constant(v)).collect();
    let mut scratch = EvalScratch::new();
    let mut values = Vec::with_capacity(grid.node_count());
    for j in 0..grid.n_theta() {
        for k in 0..grid.n_phi() {
            let p = grid.point(j, k);
            let v = laplacian_at(p, |t, f| {
                eval_network(net.arch(), &params, t, f, &mut scratch)
            })?;
            values.push(Complex64::new(v, 0.0));
        }
    }
    GridField::new(grid.clone(), values)
}

/// Directional derivative of the batch MSE along `direction` in parameter
/// space, computed by first-order forward propagation with dual-seeded
/// parameters. Returns `(loss, d loss / d t)` at `t = 0` for
/// `params + t * direction`; the reverse-mode gradient contracted with
/// `direction` must agree.
pub fn loss_directional(
    net: &Network,
    batch: &[(SphericalPoint, f64)],
    direction: &[f64],
) -> Result<(f64, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if direction.len() != net.param_count() {
        return Err(Error::DimensionMismatch {
            context: "direction".into(),
            expected: net.param_count(),
            got: direction.len(),
        });
    }
    let params: Vec<Dual1> = net
        .params()
        .iter()
        .zip(direction)
        .map(|(&v, &d)| Dual1::new(v, d))
        .collect();
    let mut scratch = EvalScratch::new();
    let inv_n = 1.0 / batch.len() as f64;
    let mut loss = Dual1::constant(0.0);
    for (p, target) in batch {
        let y = eval_network(
            net.arch(),
            &params,
            Dual1::constant(p.theta),
            Dual1::constant(p.phi),
            &mut scratch,
        )?;
        let r = y.add_const(-target);
        loss = loss + (r * r).scale(inv_n);
    }
    Ok((loss.v, loss.d))
}
