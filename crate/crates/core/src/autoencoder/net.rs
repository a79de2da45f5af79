//! Dense feed-forward networks with reverse-mode gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::Decoder;

pub const LEAKY_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    LeakyRelu,
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }

    /// Derivative given the pre-activation `x` and the output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// Layer widths `(input, hidden..., output)` and one activation per affine layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseNetSpec {
    pub layer_widths: Vec<usize>,
    pub activations: Vec<Activation>,
}

impl DenseNetSpec {
    pub fn new(layer_widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        let spec = Self {
            layer_widths,
            activations,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Leaky-ReLU hidden layers, linear output.
    pub fn encoder(layer_widths: Vec<usize>) -> Result<Self> {
        Self::with_output(layer_widths, Activation::Identity)
    }

    /// Leaky-ReLU hidden layers, sigmoid output.
    pub fn decoder(layer_widths: Vec<usize>) -> Result<Self> {
        Self::with_output(layer_widths, Activation::Sigmoid)
    }

    fn with_output(layer_widths: Vec<usize>, last: Activation) -> Result<Self> {
        let layers = layer_widths.len().saturating_sub(1);
        let mut activations = vec![Activation::LeakyRelu; layers];
        if let Some(a) = activations.last_mut() {
            *a = last;
        }
        Self::new(layer_widths, activations)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::invalid("a network needs at least an input and an output width"));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if self.activations.len() != self.layer_widths.len() - 1 {
            return Err(Error::invalid(format!(
                "{} activations for {} layers",
                self.activations.len(),
                self.layer_widths.len() - 1
            )));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().expect("validated")
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; `activations[l + 1]` the output of layer `l`.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds the input")
    }
}

/// Parameters stored flat: for each layer the `out x in` weight matrix
/// (row-major), then its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    spec: DenseNetSpec,
    params: Vec<f64>,
}

impl DenseNet {
    pub fn from_params(spec: DenseNetSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: spec.parameter_count(),
                found: params.len(),
            });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(Self { spec, params })
    }

    /// Weights uniform in `+-sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng>(spec: DenseNetSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut params = Vec::with_capacity(spec.parameter_count());
        for w in spec.layer_widths.windows(2) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for _ in 0..w[0] * w[1] {
                params.push(rng.random_range(-limit..limit));
            }
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Ok(Self { spec, params })
    }

    pub fn spec(&self) -> &DenseNetSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.spec.layer_widths.windows(2).map(move |w| {
            let start = offset;
            offset += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.spec.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_width(),
                found: input.len(),
            });
        }
        let mut activations = vec![input.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.spec.activations.len());
        for ((start, n_in, n_out), &act) in self.layer_offsets().zip(&self.spec.activations) {
            let x = activations.last().expect("non-empty");
            let weights = &self.params[start..start + n_in * n_out];
            let bias = &self.params[start + n_in * n_out..start + n_in * n_out + n_out];
            let pre: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
                })
                .collect();
            let post = pre.iter().map(|&v| act.apply(v)).collect();
            pre_activations.push(pre);
            activations.push(post);
        }
        Ok(ForwardTrace {
            activations,
            pre_activations,
        })
    }

    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward(input)?;
        Ok(trace.activations.pop().expect("non-empty"))
    }

    /// Back-propagates `grad_output` through a recorded pass, adding the
    /// parameter gradient into `grad_params` and returning the gradient with
    /// respect to the input.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        grad_output: &[f64],
        grad_params: &mut [f64],
    ) -> Vec<f64> {
        assert_eq!(grad_params.len(), self.params.len());
        let layers: Vec<_> = self.layer_offsets().collect();
        let mut delta = grad_output.to_vec();
        for (l, &(start, n_in, n_out)) in layers.iter().enumerate().rev() {
            let act = self.spec.activations[l];
            let pre = &trace.pre_activations[l];
            let post = &trace.activations[l + 1];
            let x = &trace.activations[l];
            for o in 0..n_out {
                delta[o] *= act.derivative(pre[o], post[o]);
            }
            let weights = &self.params[start..start + n_in * n_out];
            let (gw, gb) = grad_params[start..start + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            let mut grad_in = vec![0.0; n_in];
            for o in 0..n_out {
                let dz = delta[o];
                gb[o] += dz;
                let row = o * n_in;
                for i in 0..n_in {
                    gw[row + i] += dz * x[i];
                    grad_in[i] += dz * weights[row + i];
                }
            }
            delta = grad_in;
        }
        delta
    }
}

impl Decoder for DenseNet {
    fn input_width(&self) -> usize {
        self.spec.input_width()
    }

    fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.output(z)
    }
}
