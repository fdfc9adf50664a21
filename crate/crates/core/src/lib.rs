//! Implicit neural representations on the 2-sphere.

pub mod autodiff;
pub mod error;
pub mod geom;
pub mod herglotz;
pub mod legendre;
pub mod model;
pub mod train;
pub mod sh;

pub use error::{Error, Result};
pub use geom::{gl_grid, GaussLegendreGrid, Rotation, SphericalPoint, Vec3};
pub use herglotz::{HerglotzNeuron, HerglotzVector};
pub use model::{forward, param_count, pe_eval, Arch, ModelConfig, Network, PeSpec};
pub use train::{fit, snr_db, FitOutcome, Standardizer, TrainConfig};
pub use sh::{GridField, SHCoeffs};
