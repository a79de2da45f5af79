use serde::Serialize;

use super::spectrum::SpectrumReport;
use crate::error::{Error, Result};

/// Anything that maps a latent vector to an output vector.
pub trait Decoder {
    fn input_width(&self) -> usize;
    fn decode(&self, z: &[f64]) -> Result<Vec<f64>>;
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy)]
pub struct IdentityDecoder(pub usize);

impl Decoder for IdentityDecoder {
    fn input_width(&self) -> usize {
        self.0
    }

    fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentPair {
    pub component: usize,
    pub eigenvalue: f64,
    /// Decoded `mean + scale * sqrt(lambda_k) * v_k`.
    pub plus: Vec<f64>,
    /// Decoded `mean - scale * sqrt(lambda_k) * v_k`.
    pub minus: Vec<f64>,
}

/// Decodes the mean latent pushed in both directions along every principal
/// direction, in descending eigenvalue order.
pub fn decode_eigen_components<D: Decoder + ?Sized>(
    decoder: &D,
    spectrum: &SpectrumReport,
    scale: f64,
) -> Result<Vec<ComponentPair>> {
    if decoder.input_width() != spectrum.dim {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim,
            found: decoder.input_width(),
        });
    }
    (0..spectrum.dim)
        .map(|k| {
            let lambda = spectrum.eigenvalues[k];
            let step = scale * lambda.max(0.0).sqrt();
            let v = spectrum.eigenvector(k);
            let shifted = |sign: f64| -> Vec<f64> {
                spectrum
                    .mean
                    .iter()
                    .zip(&v)
                    .map(|(m, x)| m + sign * step * x)
                    .collect()
            };
            Ok(ComponentPair {
                component: k,
                eigenvalue: lambda,
                plus: decoder.decode(&shifted(1.0))?,
                minus: decoder.decode(&shifted(-1.0))?,
            })
        })
        .collect()
}
