use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::choose_big_n;

/// Parameters of the eccentric loss: latent dimension `d`, repulsion
/// strength `mu`, softening scale `N` and the weight `lambda` applied when
/// the loss is combined with another objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub dim: usize,
    pub mu: f64,
    pub big_n: f64,
    pub lambda: f64,
}

impl ParamSet {
    pub fn new(dim: usize, mu: f64, big_n: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            dim,
            mu,
            big_n,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// Derives `N` from `(dim, mu)`. `mu` must lie in `[1, 2*dim + 1]`.
    pub fn with_auto_n(dim: usize, mu: f64, lambda: f64) -> Result<Self> {
        if !(1.0..=2.0 * dim as f64 + 1.0).contains(&mu) {
            return Err(Error::invalid(format!(
                "mu = {mu} outside [1, 2d+1] = [1, {}] required for derived N",
                2 * dim + 1
            )));
        }
        Self::new(dim, mu, choose_big_n(dim, mu)?, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::invalid(format!(
                "dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if !self.mu.is_finite() || !self.big_n.is_finite() || !self.lambda.is_finite() {
            return Err(Error::NonFinite("loss parameters"));
        }
        if self.big_n <= 0.0 {
            return Err(Error::invalid(format!("N must be positive, got {}", self.big_n)));
        }
        if self.lambda < 0.0 {
            return Err(Error::invalid(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}
