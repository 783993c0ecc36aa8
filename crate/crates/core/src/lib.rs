//! Optimal output purity of quantum channels.
//!
//! Channels are stored as superoperators acting on column-stacked density
//! matrices. On top of that sit a zoo of standard channels, multi-start
//! optimizers for the minimal output entropy and maximal output p-norm, and
//! checks of when those quantities survive composition and tensor products.

pub mod channel;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod random;
pub mod state;
pub mod verify;
pub mod zoo;

pub use channel::{compose, tensor_channels, Channel, ChoiMatrix, Covariance, CptpVerdict};
pub use error::{PurityError, Result};
pub use optim::{maximize_output_pnorm, minimize_output_entropy, Objective, OptimizationReport, OptimizerConfig};
pub use state::{partial_trace, DensityOperator, PureState, SchattenP, Spectrum, Subsystem};
