use serde::Serialize;

use super::net::{DenseNet, ForwardTrace};
use crate::batch::{sq_dist, PointBatch};
use crate::error::{Error, Result};
use crate::kernel::{batch_loss, batch_loss_gradient};
use crate::params::ParamSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
}

/// `total = recon + lambda * reg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossParts {
    /// Squared L2 reconstruction error, averaged over the batch.
    pub recon: f64,
    /// Eccentric loss of the batch's latent codes.
    pub reg: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub encoder: Vec<f64>,
    pub decoder: Vec<f64>,
}

impl Autoencoder {
    pub fn new(encoder: DenseNet, decoder: DenseNet) -> Result<Self> {
        if encoder.spec().output_width() != decoder.spec().input_width() {
            return Err(Error::DimensionMismatch {
                expected: encoder.spec().output_width(),
                found: decoder.spec().input_width(),
            });
        }
        if encoder.spec().input_width() != decoder.spec().output_width() {
            return Err(Error::DimensionMismatch {
                expected: encoder.spec().input_width(),
                found: decoder.spec().output_width(),
            });
        }
        Ok(Self { encoder, decoder })
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.spec().output_width()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.spec().input_width()
    }

    pub fn total_loss(&self, batch: &PointBatch, params: &ParamSet) -> Result<LossParts> {
        self.evaluate(batch, params, false).map(|(parts, _)| parts)
    }

    pub fn loss_and_gradients(
        &self,
        batch: &PointBatch,
        params: &ParamSet,
    ) -> Result<(LossParts, Gradients)> {
        let (parts, grads) = self.evaluate(batch, params, true)?;
        Ok((parts, grads.expect("requested")))
    }

    fn evaluate(
        &self,
        batch: &PointBatch,
        params: &ParamSet,
        want_grad: bool,
    ) -> Result<(LossParts, Option<Gradients>)> {
        batch.check_dim(self.input_dim())?;
        batch.require_count(2)?;
        if params.dim != self.latent_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.latent_dim(),
                found: params.dim,
            });
        }
        let b = batch.count();
        let enc_traces: Vec<ForwardTrace> = batch
            .rows()
            .map(|x| self.encoder.forward(x))
            .collect::<Result<_>>()?;
        let mut latent = Vec::with_capacity(b * params.dim);
        for t in &enc_traces {
            latent.extend_from_slice(t.output());
        }
        let latent = PointBatch::new(b, params.dim, latent)?;
        let dec_traces: Vec<ForwardTrace> = latent
            .rows()
            .map(|z| self.decoder.forward(z))
            .collect::<Result<_>>()?;

        let recon = batch
            .rows()
            .zip(&dec_traces)
            .map(|(x, t)| sq_dist(x, t.output()))
            .sum::<f64>()
            / b as f64;
        let reg = batch_loss(&latent, params)?;
        let parts = LossParts {
            recon,
            reg,
            total: recon + params.lambda * reg,
        };
        if !want_grad {
            return Ok((parts, None));
        }

        let mut grads = Gradients {
            encoder: vec![0.0; self.encoder.params().len()],
            decoder: vec![0.0; self.decoder.params().len()],
        };
        let reg_grad = if params.lambda != 0.0 {
            Some(batch_loss_gradient(&latent, params)?)
        } else {
            None
        };
        let scale = 2.0 / b as f64;
        for (i, x) in batch.rows().enumerate() {
            let out = dec_traces[i].output();
            let g_out: Vec<f64> = out.iter().zip(x).map(|(o, v)| scale * (o - v)).collect();
            let mut g_z = self.decoder.backward(&dec_traces[i], &g_out, &mut grads.decoder);
            if let Some(rg) = &reg_grad {
                for (g, r) in g_z.iter_mut().zip(rg.row(i)) {
                    *g += params.lambda * r;
                }
            }
            self.encoder.backward(&enc_traces[i], &g_z, &mut grads.encoder);
        }
        Ok((parts, Some(grads)))
    }

    /// Latent codes of every row, in order.
    pub fn encode(&self, data: &PointBatch) -> Result<PointBatch> {
        let d = self.latent_dim();
        if data.count() == 0 {
            return Ok(PointBatch::zeros(0, d));
        }
        data.check_dim(self.input_dim())?;
        let mut out = Vec::with_capacity(data.count() * d);
        for x in data.rows() {
            out.extend(self.encoder.output(x)?);
        }
        PointBatch::new(data.count(), d, out)
    }
}
