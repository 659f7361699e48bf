//! Indicator variograms and madograms of random fields on Euclidean spaces,
//! spheres and finite graphs.
//!
//! The crate is organized around the life cycle of a candidate model:
//!
//! - [`spaces`] hosts points and computes distances (Euclidean, great-circle,
//!   shortest-path, resistance and communicability distances).
//! - [`models`] holds the parametric catalog of indicator variograms, the
//!   Gaussian transforms and the closure combinators.
//! - [`validity`] evaluates a candidate on a finite configuration and tests the
//!   inequality hierarchy, plus exact small-n realizability by linear
//!   programming.
//! - [`simulate`] generates seeded realization ensembles (mixture-of-Gaussians
//!   median indicators, excursion sets, the Poisson-product construction on
//!   spheres, sequential indicator simulation on grids).
//! - [`estimate`] computes experimental variograms of any order.
//! - [`excursion`] evaluates the excursion-set indicator variogram of a
//!   standard Gaussian field by three independent routes.

pub mod error;
pub mod estimate;
pub mod excursion;
pub mod io;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod simulate;
pub mod spaces;
pub mod special;
pub mod validity;

pub use error::{Error, Result};
pub use linalg::SymmetricMatrix;
pub use models::{GaussianCorrelation, MixtureSpec, VariogramModel};
pub use rng::RngSpec;
pub use spaces::{Graph, GraphMetric, Point, Space};
