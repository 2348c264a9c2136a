use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};
use crate::rng::{rng_from, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Linear => z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub output_width: usize,
    /// A non-trainable layer has no weights: it applies its activation to the
    /// incoming values and requires `output_width` to equal its input width.
    pub trainable: bool,
    pub activation: Activation,
}

impl LayerSpec {
    pub const fn dense(output_width: usize, activation: Activation) -> Self {
        LayerSpec { output_width, trainable: true, activation }
    }

    pub const fn pass_through(width: usize, activation: Activation) -> Self {
        LayerSpec { output_width: width, trainable: false, activation }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_width: usize,
    pub layers: Vec<LayerSpec>,
}

impl Architecture {
    /// 16 -> 16 -> 32 -> 64 -> [64 pass-through] -> 64 -> 32 -> 16. Hidden
    /// layers use ReLU; the output layer is linear so that reconstructions can
    /// reach the negative half of the [-1, 1] feature range.
    pub fn standard() -> Self {
        use Activation::*;
        Architecture {
            input_width: 16,
            layers: vec![
                LayerSpec::dense(16, Relu),
                LayerSpec::dense(32, Relu),
                LayerSpec::dense(64, Relu),
                LayerSpec::pass_through(64, Relu),
                LayerSpec::dense(64, Relu),
                LayerSpec::dense(32, Relu),
                LayerSpec::dense(16, Linear),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_width == 0 || self.layers.is_empty() {
            return Err(invalid("architecture needs an input width and at least one layer"));
        }
        let mut width = self.input_width;
        for l in &self.layers {
            if l.output_width == 0 {
                return Err(invalid("layer width must be positive"));
            }
            if !l.trainable && l.output_width != width {
                return Err(invalid("pass-through layer must keep its input width"));
            }
            width = l.output_width;
        }
        if width != self.input_width {
            return Err(invalid("autoencoder output width must equal input width"));
        }
        Ok(())
    }
}

/// Resolved geometry of one layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub in_width: usize,
    pub out_width: usize,
    pub trainable: bool,
    pub activation: Activation,
    /// Start of this layer's weights (row-major out x in) followed by its
    /// biases in [`DenseAutoencoder::params`].
    pub offset: usize,
}

impl Layer {
    pub fn parameter_count(&self) -> usize {
        if self.trainable {
            self.in_width * self.out_width + self.out_width
        } else {
            0
        }
    }

    fn weights<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.offset..self.offset + self.in_width * self.out_width]
    }

    fn biases<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        let start = self.offset + self.in_width * self.out_width;
        &params[start..start + self.out_width]
    }
}

/// A fully-connected autoencoder with all parameters in one flat vector,
/// ordered layer by layer as weights (row-major, out x in) then biases.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseAutoencoder {
    architecture: Architecture,
    layers: Vec<Layer>,
    params: Vec<f64>,
}

impl DenseAutoencoder {
    /// Glorot-uniform weights, zero biases.
    pub fn new(architecture: &Architecture, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(architecture)?;
        let mut rng = rng_from(seed, &[stream::INIT]);
        for l in model.layers.clone() {
            if !l.trainable {
                continue;
            }
            let limit = (6.0 / (l.in_width + l.out_width) as f64).sqrt();
            for w in &mut model.params[l.offset..l.offset + l.in_width * l.out_width] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(model)
    }

    pub fn zeros(architecture: &Architecture) -> Result<Self> {
        architecture.validate()?;
        let mut layers = Vec::with_capacity(architecture.layers.len());
        let mut in_width = architecture.input_width;
        let mut offset = 0;
        for spec in &architecture.layers {
            let layer = Layer {
                in_width,
                out_width: spec.output_width,
                trainable: spec.trainable,
                activation: spec.activation,
                offset,
            };
            offset += layer.parameter_count();
            in_width = spec.output_width;
            layers.push(layer);
        }
        Ok(DenseAutoencoder { architecture: architecture.clone(), layers, params: vec![0.0; offset] })
    }

    /// Rebuilds a model from a flat parameter vector.
    pub fn from_params(architecture: &Architecture, params: Vec<f64>) -> Result<Self> {
        let mut model = Self::zeros(architecture)?;
        check_len(model.params.len(), params.len())?;
        model.params = params;
        Ok(model)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.architecture.input_width
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn layer_parameter_counts(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::parameter_count).collect()
    }

    pub fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.out_width).chain(core::iter::once(self.input_width())).max().unwrap_or(0)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.input_width(), x.len())?;
        let mut ws = Workspace::new(self);
        self.forward_cached(x, &mut ws);
        Ok(ws.acts.last().cloned().unwrap_or_default())
    }

    /// Reconstruction error of `x` under this model.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        let y = self.forward(x)?;
        reconstruction_mse(x, &y)
    }

    /// Forward pass keeping every layer output in `ws.acts`.
    pub(crate) fn forward_cached(&self, x: &[f64], ws: &mut Workspace) {
        let mut input = x;
        for (l, out) in self.layers.iter().zip(ws.acts.iter_mut()) {
            if l.trainable {
                let w = l.weights(&self.params);
                let b = l.biases(&self.params);
                for (o, slot) in out.iter_mut().enumerate() {
                    let row = &w[o * l.in_width..(o + 1) * l.in_width];
                    let z = row.iter().zip(input).fold(b[o], |acc, (wi, xi)| acc + wi * xi);
                    *slot = l.activation.apply(z);
                }
            } else {
                for (slot, &v) in out.iter_mut().zip(input) {
                    *slot = l.activation.apply(v);
                }
            }
            input = out;
        }
    }

    /// Mean reconstruction MSE over `samples` and its gradient, written into
    /// `grad` (overwritten, same layout as [`Self::params`]).
    pub fn loss_and_gradient<S: AsRef<[f64]>>(&self, samples: &[S], grad: &mut [f64]) -> Result<f64> {
        let mut ws = Workspace::new(self);
        self.loss_and_gradient_in(samples, grad, &mut ws)
    }

    pub(crate) fn loss_and_gradient_in<S: AsRef<[f64]>>(
        &self,
        samples: &[S],
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<f64> {
        check_len(self.params.len(), grad.len())?;
        if samples.is_empty() {
            return Err(crate::Error::EmptyDataset);
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let width = self.input_width();
        let scale = 2.0 / (width as f64 * samples.len() as f64);
        let mut total = 0.0;
        for s in samples {
            let x = s.as_ref();
            check_len(width, x.len())?;
            self.forward_cached(x, ws);
            let out = ws.acts.last().expect("model has layers");
            let mut sq = 0.0;
            for ((d, &y), &t) in ws.delta.iter_mut().zip(out.iter()).zip(x) {
                let e = y - t;
                sq += e * e;
                *d = scale * e;
            }
            total += sq / width as f64;
            self.backward(x, ws, grad);
        }
        Ok(total / samples.len() as f64)
    }

    /// Accumulates parameter gradients given dL/d(output) in `ws.delta`.
    fn backward(&self, x: &[f64], ws: &mut Workspace, grad: &mut [f64]) {
        for li in (0..self.layers.len()).rev() {
            let l = self.layers[li];
            let out = &ws.acts[li];
            let input: &[f64] = if li == 0 { x } else { &ws.acts[li - 1] };
            let delta = &mut ws.delta[..l.out_width];
            if l.activation == Activation::Relu {
                for (d, &a) in delta.iter_mut().zip(out.iter()) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            if !l.trainable {
                continue;
            }
            let w = l.weights(&self.params);
            let (gw, gb) = grad[l.offset..l.offset + l.parameter_count()].split_at_mut(l.in_width * l.out_width);
            let prev = &mut ws.delta_prev[..l.in_width];
            prev.iter_mut().for_each(|p| *p = 0.0);
            for o in 0..l.out_width {
                let d = delta[o];
                gb[o] += d;
                if d == 0.0 {
                    continue;
                }
                let row = &w[o * l.in_width..(o + 1) * l.in_width];
                let grow = &mut gw[o * l.in_width..(o + 1) * l.in_width];
                for i in 0..l.in_width {
                    grow[i] += d * input[i];
                    prev[i] += row[i] * d;
                }
            }
            ws.delta[..l.in_width].copy_from_slice(&ws.delta_prev[..l.in_width]);
        }
    }
}

/// Reusable activation and delta buffers for one model.
pub(crate) struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(model: &DenseAutoencoder) -> Self {
        let w = model.max_width();
        Workspace {
            acts: model.layers.iter().map(|l| vec![0.0; l.out_width]).collect(),
            delta: vec![0.0; w],
            delta_prev: vec![0.0; w],
        }
    }
}

/// Mean squared difference between an input and its reconstruction.
pub fn reconstruction_mse(x: &[f64], reconstruction: &[f64]) -> Result<f64> {
    check_len(x.len(), reconstruction.len())?;
    if x.is_empty() {
        return Err(invalid("empty vectors"));
    }
    let sum: f64 = x.iter().zip(reconstruction).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

/// The seeded 9696-parameter feature autoencoder.
pub fn build_model(seed: u64) -> DenseAutoencoder {
    DenseAutoencoder::new(&Architecture::standard(), seed).expect("fixed architecture is valid")
}
