//! Numerical toolkit for the eccentric regularization loss.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] evaluates the pairwise loss, its exact gradient and the rule
//!   for picking the softening scale `N`.
//! * [`radius`] solves for the radius of the stationary hypersphere by
//!   quadrature and bisection, and carries the numerical checks that back
//!   the choice of `N`.
//! * [`particle`] minimizes the loss on a free point cloud.
//! * [`autoencoder`] trains a small dense autoencoder with the loss as a
//!   latent regularizer.
//! * [`latent`] analyses embeddings: spectra, principal coordinates,
//!   alignment of independent runs, similarity metrics, samplers and KNN.

pub mod autoencoder;
pub mod batch;
pub mod csv;
pub mod error;
pub mod kernel;
pub mod latent;
pub mod params;
pub mod particle;
pub mod radius;

pub use batch::PointBatch;
pub use error::{Error, Result};
pub use params::ParamSet;
