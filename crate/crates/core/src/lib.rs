//! Mesh-free Bayesian inversion on point-cloud manifolds with boundary.
//!
//! Given only points sampled from a manifold, this crate builds kernel-based
//! graph Laplacians, extends them past the boundary with ghost points,
//! assembles boundary-aware Matern-type Gaussian priors, evaluates elliptic
//! and heat forward maps, and samples posteriors with graph pCN.
//!
//! All numerical code is generic over the floating-point type through
//! [`Scalar`]; the aliases at the crate root fix `f64`, which is what the
//! Monte Carlo tolerances throughout the test suite assume.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod gpdm;
pub mod graph_ops;
pub mod inference;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod prior;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the main entry types.
pub type PointCloud = geometry::PointCloud<f64>;
pub type GhostSet = geometry::GhostSet<f64>;
pub type GraphOperator = graph_ops::GraphOperator<f64>;
pub type SpectralDecomposition = graph_ops::SpectralDecomposition<f64>;
pub type KernelConfig = graph_ops::KernelConfig<f64>;
pub type Calibration = graph_ops::Calibration<f64>;
pub type ExtrapolationMatrix = gpdm::ExtrapolationMatrix<f64>;
pub type GpdmOperator = gpdm::GpdmOperator<f64>;
pub type GpdmFactory = gpdm::GpdmFactory<f64>;
pub type MaternSpec = prior::MaternSpec<f64>;
pub type BoundaryBasis = prior::BoundaryBasis<f64>;
pub type PriorSample = prior::PriorSample<f64>;
pub type EllipticForwardModel = forward::EllipticForwardModel<f64>;
pub type HeatForwardModel = forward::HeatForwardModel<f64>;
pub type Observation = forward::Observation<f64>;
pub type PcnConfig = inference::PcnConfig<f64>;
pub type Chain = inference::Chain<f64>;
pub type PosteriorSummary = inference::PosteriorSummary<f64>;
