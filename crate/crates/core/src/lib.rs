//! Boundary reconstruction for the heat equation in a doubly connected
//! planar domain: Laguerre semi-discretisation in time, single-layer
//! boundary integral equations with logarithmic quadrature, and a
//! regularised Newton-type iteration for the unknown inner curve.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod data_solver;
pub mod error;
pub mod field_solver;
pub mod fundseq;
pub mod geometry;
pub mod inversion;
pub mod kernels;
pub mod laguerre;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod synthesis;

pub use data_solver::{Mode, TikhonovNorm};
pub use error::{Error, Result};
pub use geometry::{make_shape, Curve, RadialCurve, ShapeParams};
pub use inversion::{reconstruct, ReconConfig, Reconstruction, StopReason};
pub use synthesis::{add_noise, synthesize, CauchyData};
