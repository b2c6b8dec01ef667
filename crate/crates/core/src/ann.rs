//! Sliding-window feedforward network forecaster.
//!
//! The network maps the last `window` values (oldest first) to the next
//! value. Inputs and targets are standardized by a stored scaler; hidden
//! layers share one activation and the output layer is the identity.
//! Training is plain mini-batch gradient descent on mean squared error
//! with an optional L2 penalty on weights (biases are not penalized).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Logistic,
    Tanh,
    Relu,
    Identity,
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "sigmoid" => Ok(ActivationKind::Logistic),
            "tanh" => Ok(ActivationKind::Tanh),
            "relu" => Ok(ActivationKind::Relu),
            "identity" | "linear" => Ok(ActivationKind::Identity),
            other => Err(Error::InvalidArgument(format!("unknown activation '{other}'"))),
        }
    }
}

pub fn activation(kind: ActivationKind, x: f64) -> f64 {
    match kind {
        ActivationKind::Logistic => {
            if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            }
        }
        ActivationKind::Tanh => x.tanh(),
        ActivationKind::Relu => x.max(0.0),
        ActivationKind::Identity => x,
    }
}

/// Derivative with respect to the pre-activation `x`; the ReLU
/// subgradient at zero is taken as 0.
fn activation_derivative(kind: ActivationKind, x: f64) -> f64 {
    match kind {
        ActivationKind::Logistic => {
            let s = activation(kind, x);
            s * (1.0 - s)
        }
        ActivationKind::Tanh => {
            let t = x.tanh();
            1.0 - t * t
        }
        ActivationKind::Relu => {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        ActivationKind::Identity => 1.0,
    }
}

/// Affine standardization `(x - shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub shift: f64,
    pub scale: f64,
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler { shift: 0.0, scale: 1.0 };

    /// Mean and population standard deviation; a zero spread maps to scale 1.
    pub fn standardizing(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        Scaler { shift: mean, scale: if sd > 0.0 && sd.is_finite() { sd } else { 1.0 } }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn invert(&self, x: f64) -> f64 {
        x * self.scale + self.shift
    }
}

/// Dense layer; `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpForecaster {
    pub window: usize,
    /// `[window, hidden.., 1]`.
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub hidden_activation: ActivationKind,
    pub output_activation: ActivationKind,
    pub input_scaler: Scaler,
}

impl MlpForecaster {
    /// All-zero network.
    pub fn zeros(
        window: usize,
        hidden: &[usize],
        hidden_activation: ActivationKind,
        input_scaler: Scaler,
    ) -> Result<Self> {
        if window == 0 || hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Dimension(format!(
                "window {window} with hidden layers {hidden:?}"
            )));
        }
        let mut layer_sizes = vec![window];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(1);
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer { weights: vec![0.0; w[0] * w[1]], biases: vec![0.0; w[1]] })
            .collect();
        let net = MlpForecaster {
            window,
            layer_sizes,
            layers,
            hidden_activation,
            output_activation: ActivationKind::Identity,
            input_scaler,
        };
        net.validate()?;
        Ok(net)
    }

    /// Glorot-uniform weights `U(±√(6 / (fan_in + fan_out)))`, zero biases.
    pub fn initialize<R: Rng>(&mut self, rng: &mut R) {
        for (layer, w) in self.layers.iter_mut().zip(self.layer_sizes.windows(2)) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for v in layer.weights.iter_mut() {
                *v = rng.gen_range(-limit..=limit);
            }
            layer.biases.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Dimension(msg));
        if self.layer_sizes.len() < 3 {
            return bad("need input, at least one hidden and an output layer".into());
        }
        if self.layer_sizes[0] != self.window || *self.layer_sizes.last().unwrap() != 1 {
            return bad(format!("layer sizes {:?} for window {}", self.layer_sizes, self.window));
        }
        if self.layers.len() != self.layer_sizes.len() - 1 {
            return bad("layer count does not match sizes".into());
        }
        for (l, w) in self.layers.iter().zip(self.layer_sizes.windows(2)) {
            if l.weights.len() != w[0] * w[1] || l.biases.len() != w[1] {
                return bad(format!("layer {}x{} has wrong parameter count", w[1], w[0]));
            }
        }
        if !(self.input_scaler.scale > 0.0) || !self.input_scaler.scale.is_finite() {
            return bad(format!("scaler scale {} not positive", self.input_scaler.scale));
        }
        if self.output_activation != ActivationKind::Identity {
            return bad("output activation must be identity".into());
        }
        Ok(())
    }

    fn activation_for(&self, layer: usize) -> ActivationKind {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Forward pass in scaled space, keeping pre-activations and
    /// activations of every layer (`acts[0]` is the input).
    fn trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = acts.last().unwrap();
            let n_in = input.len();
            let kind = self.activation_for(i);
            let z: Vec<f64> = layer
                .biases
                .iter()
                .enumerate()
                .map(|(o, b)| {
                    let row = &layer.weights[o * n_in..(o + 1) * n_in];
                    b + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>()
                })
                .collect();
            let a = z.iter().map(|&v| activation(kind, v)).collect();
            pre.push(z);
            acts.push(a);
        }
        (pre, acts)
    }

    fn forward_scaled(&self, x: &[f64]) -> f64 {
        self.trace(x).1.last().unwrap()[0]
    }

    /// Prediction in original units for one window of raw values.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.window {
            return Err(Error::Dimension(format!(
                "input of length {} for window {}",
                input.len(),
                self.window
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite network input".into()));
        }
        let x: Vec<f64> = input.iter().map(|&v| self.input_scaler.apply(v)).collect();
        Ok(self.input_scaler.invert(self.forward_scaled(&x)))
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters, layer by layer, weights then biases.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_flat_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Dimension(format!(
                "{} parameters for a network with {}",
                params.len(),
                self.parameter_count()
            )));
        }
        let mut it = params.iter().copied();
        for l in self.layers.iter_mut() {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.biases.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let net: MlpForecaster = serde_json::from_str(s)?;
        net.validate()?;
        Ok(net)
    }
}

/// One training example: `window` consecutive values and the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPair {
    pub input: Vec<f64>,
    pub target: f64,
}

pub fn make_windows(series: &TimeSeries, w: usize) -> Result<Vec<WindowPair>> {
    windows_from_values(&series.values(), w)
}

fn windows_from_values(values: &[f64], w: usize) -> Result<Vec<WindowPair>> {
    if w == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if values.len() < w + 1 {
        return Err(Error::TooShort(format!("{} values for window {w}", values.len())));
    }
    Ok(values
        .windows(w + 1)
        .map(|s| WindowPair { input: s[..w].to_vec(), target: s[w] })
        .collect())
}

/// Gradient with the same layout as the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Layer>,
}

impl Gradient {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }
}

fn scaled_pair(net: &MlpForecaster, p: &WindowPair) -> (Vec<f64>, f64) {
    let s = &net.input_scaler;
    (p.input.iter().map(|&v| s.apply(v)).collect(), s.apply(p.target))
}

/// Mean squared error in scaled units plus `l2 · Σ w²`.
pub fn loss(net: &MlpForecaster, batch: &[WindowPair], l2: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("loss of an empty batch".into()));
    }
    let mut sse = 0.0;
    for p in batch {
        check_pair(net, p)?;
        let (x, y) = scaled_pair(net, p);
        sse += (net.forward_scaled(&x) - y).powi(2);
    }
    let penalty: f64 = net.layers.iter().flat_map(|l| &l.weights).map(|w| w * w).sum();
    Ok(sse / batch.len() as f64 + l2 * penalty)
}

fn check_pair(net: &MlpForecaster, p: &WindowPair) -> Result<()> {
    if p.input.len() != net.window {
        return Err(Error::Dimension(format!(
            "window of {} for a network of window {}",
            p.input.len(),
            net.window
        )));
    }
    Ok(())
}

/// Exact gradient of [`loss`] by backpropagation.
pub fn gradient(net: &MlpForecaster, batch: &[WindowPair], l2: f64) -> Result<Gradient> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("gradient of an empty batch".into()));
    }
    let mut grad = Gradient {
        layers: net
            .layers
            .iter()
            .map(|l| Layer { weights: vec![0.0; l.weights.len()], biases: vec![0.0; l.biases.len()] })
            .collect(),
    };
    let scale = 2.0 / batch.len() as f64;
    for p in batch {
        check_pair(net, p)?;
        let (x, y) = scaled_pair(net, p);
        let (pre, acts) = net.trace(&x);
        let out = acts.last().unwrap()[0];
        let mut delta: Vec<f64> = vec![
            scale * (out - y) * activation_derivative(net.output_activation, pre.last().unwrap()[0]),
        ];
        for li in (0..net.layers.len()).rev() {
            let input = &acts[li];
            let n_in = input.len();
            let g = &mut grad.layers[li];
            for (o, d) in delta.iter().enumerate() {
                g.biases[o] += d;
                for (k, a) in input.iter().enumerate() {
                    g.weights[o * n_in + k] += d * a;
                }
            }
            if li > 0 {
                let w = &net.layers[li].weights;
                let kind = net.activation_for(li - 1);
                delta = (0..n_in)
                    .map(|k| {
                        let back: f64 = delta.iter().enumerate().map(|(o, d)| w[o * n_in + k] * d).sum();
                        back * activation_derivative(kind, pre[li - 1][k])
                    })
                    .collect();
            }
        }
    }
    if l2 != 0.0 {
        for (g, l) in grad.layers.iter_mut().zip(&net.layers) {
            for (gw, w) in g.weights.iter_mut().zip(&l.weights) {
                *gw += 2.0 * l2 * w;
            }
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.01, epochs: 200, batch_size: 32, seed: 0, l2: 0.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be positive".into()));
        }
        if !(self.l2 >= 0.0) || !self.l2.is_finite() {
            return Err(Error::InvalidArgument(format!("l2 {} must be >= 0", self.l2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    pub best_loss: f64,
    /// 0 when no epoch improved on the initial network.
    pub best_epoch: usize,
    pub final_loss: f64,
}

/// Trains with a scaler standardizing the training values.
pub fn train(
    series: &TimeSeries,
    w: usize,
    hidden: &[usize],
    activation: ActivationKind,
    cfg: &TrainConfig,
) -> Result<(MlpForecaster, TrainReport)> {
    let scaler = Scaler::standardizing(&series.values());
    train_with_scaler(series, w, hidden, activation, cfg, scaler)
}

/// Trains with an explicit scaler. Returns the parameters of the epoch
/// with the lowest full-training-set loss (the initial network counts as
/// epoch 0).
pub fn train_with_scaler(
    series: &TimeSeries,
    w: usize,
    hidden: &[usize],
    activation: ActivationKind,
    cfg: &TrainConfig,
    scaler: Scaler,
) -> Result<(MlpForecaster, TrainReport)> {
    cfg.validate()?;
    let pairs = make_windows(series, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = MlpForecaster::zeros(w, hidden, activation, scaler)?;
    net.initialize(&mut rng);

    let initial_loss = loss(&net, &pairs, cfg.l2)?;
    if !initial_loss.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }
    let mut best = (net.clone(), initial_loss, 0);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut params = net.flat_parameters();
    let mut final_loss = initial_loss;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<WindowPair> = chunk.iter().map(|&i| pairs[i].clone()).collect();
            let g = gradient(&net, &batch, cfg.l2)?.flat();
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= cfg.learning_rate * gi;
            }
            net.set_flat_parameters(&params)?;
        }
        final_loss = loss(&net, &pairs, cfg.l2)?;
        if !final_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        if final_loss < best.1 {
            best = (net.clone(), final_loss, epoch);
        }
    }
    let (net, best_loss, best_epoch) = best;
    Ok((net, TrainReport { initial_loss, best_loss, best_epoch, final_loss }))
}

/// Multi-step forecasts, feeding each prediction back as the newest lag.
pub fn forecast_recursive(net: &MlpForecaster, history: &TimeSeries, horizon: usize) -> Result<Vec<f64>> {
    forecast_recursive_values(net, &history.values(), horizon)
}

pub fn forecast_recursive_values(net: &MlpForecaster, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if history.len() < net.window {
        return Err(Error::TooShort(format!(
            "history of {} for window {}",
            history.len(),
            net.window
        )));
    }
    let mut window = history[history.len() - net.window..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let y = net.forward(&window)?;
        out.push(y);
        window.remove(0);
        window.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn daily(values: &[f64]) -> TimeSeries {
        TimeSeries::daily_from_values(NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn activation_values() {
        assert_eq!(activation(ActivationKind::Logistic, 0.0), 0.5);
        assert_eq!(activation(ActivationKind::Tanh, 0.0), 0.0);
        assert_eq!(activation(ActivationKind::Relu, -2.0), 0.0);
        assert_eq!(activation(ActivationKind::Relu, 3.0), 3.0);
        assert_eq!(activation(ActivationKind::Identity, -4.5), -4.5);
        let big = activation(ActivationKind::Logistic, 800.0);
        let small = activation(ActivationKind::Logistic, -800.0);
        assert!(big.is_finite() && big <= 1.0 && small >= 0.0 && small.is_finite());
        assert!((activation(ActivationKind::Logistic, -35.0) - (-35f64).exp() / (1.0 + (-35f64).exp())).abs() < 1e-30);
    }

    #[test]
    fn activation_ranges() {
        // tanh rounds to ±1 beyond |x| ≈ 19 in f64
        for i in -150..=150 {
            let x = i as f64 * 0.1;
            let l = activation(ActivationKind::Logistic, x);
            let t = activation(ActivationKind::Tanh, x);
            assert!(l > 0.0 && l < 1.0);
            assert!(t > -1.0 && t < 1.0);
            assert!(activation(ActivationKind::Relu, x) >= 0.0);
        }
    }

    #[test]
    fn windows() {
        let w = make_windows(&daily(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(
            w,
            vec![
                WindowPair { input: vec![1.0, 2.0], target: 3.0 },
                WindowPair { input: vec![2.0, 3.0], target: 4.0 }
            ]
        );
        assert_eq!(make_windows(&daily(&[1.0, 2.0, 3.0]), 2).unwrap().len(), 1);
        assert_eq!(
            make_windows(&daily(&[5.0, 6.0]), 1).unwrap(),
            vec![WindowPair { input: vec![5.0], target: 6.0 }]
        );
        assert!(matches!(make_windows(&daily(&[1.0, 2.0]), 2), Err(Error::TooShort(_))));
    }

    #[test]
    fn forward_examples() {
        let zero = MlpForecaster::zeros(3, &[4], ActivationKind::Tanh, Scaler::IDENTITY).unwrap();
        assert_eq!(zero.forward(&[1.0, -5.0, 100.0]).unwrap(), 0.0);

        // w=1, hidden unit weight 2 bias 1, identity; output passes it through
        let mut affine = MlpForecaster::zeros(1, &[1], ActivationKind::Identity, Scaler::IDENTITY).unwrap();
        affine.set_flat_parameters(&[2.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(affine.forward(&[3.0]).unwrap(), 7.0);

        let logistic = MlpForecaster::zeros(1, &[1], ActivationKind::Logistic, Scaler::IDENTITY).unwrap();
        let mut l = logistic.clone();
        l.set_flat_parameters(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(l.forward(&[9.0]).unwrap(), 0.5);

        assert!(matches!(zero.forward(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let net = MlpForecaster::zeros(2, &[3], ActivationKind::Tanh, Scaler::IDENTITY).unwrap();
        let batch = vec![
            WindowPair { input: vec![1.0, 2.0], target: 0.0 },
            WindowPair { input: vec![-1.0, 0.5], target: 0.0 },
        ];
        assert!(gradient(&net, &batch, 0.0).unwrap().flat().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn output_bias_gradient_is_linear_in_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = MlpForecaster::zeros(2, &[3], ActivationKind::Tanh, Scaler::IDENTITY).unwrap();
        net.initialize(&mut rng);
        let mut batch: Vec<WindowPair> = (0..5)
            .map(|i| WindowPair { input: vec![i as f64 * 0.1, -0.2], target: 0.3 * i as f64 })
            .collect();
        let g1 = gradient(&net, &batch, 0.0).unwrap();
        for p in batch.iter_mut() {
            let pred = net.forward(&p.input).unwrap();
            p.target = pred - 2.0 * (pred - p.target);
        }
        let g2 = gradient(&net, &batch, 0.0).unwrap();
        let b1 = g1.layers.last().unwrap().biases[0];
        let b2 = g2.layers.last().unwrap().biases[0];
        assert!((b2 - 2.0 * b1).abs() < 1e-12);
    }

    #[test]
    fn relu_subgradient_at_zero() {
        assert_eq!(activation_derivative(ActivationKind::Relu, 0.0), 0.0);
    }

    #[test]
    fn constant_series_is_learned() {
        let s = daily(&[37.5; 60]);
        let cfg = TrainConfig { epochs: 20, ..Default::default() };
        let (net, _) = train(&s, 7, &[16], ActivationKind::Tanh, &cfg).unwrap();
        for p in make_windows(&s, 7).unwrap() {
            assert!((net.forward(&p.input).unwrap() - 37.5).abs() < 0.375);
        }
    }

    #[test]
    fn ramp_is_learned_and_extrapolated() {
        let values: Vec<f64> = (0..60).map(|i| 10.0 + i as f64).collect();
        let range = 59.0;
        let s = daily(&values);
        let cfg = TrainConfig { learning_rate: 0.05, epochs: 400, batch_size: 8, seed: 1, l2: 0.0 };
        let (net, report) = train(&s, 2, &[4], ActivationKind::Identity, &cfg).unwrap();
        assert!(report.best_loss <= report.initial_loss);
        for p in make_windows(&s, 2).unwrap() {
            assert!((net.forward(&p.input).unwrap() - p.target).abs() < 0.02 * range);
        }
        let f = forecast_recursive(&net, &s, 3).unwrap();
        for (h, v) in f.iter().enumerate() {
            assert!((v - (70.0 + h as f64)).abs() < 0.05 * range, "{f:?}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let values: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64).collect();
        let s = daily(&values);
        let cfg = TrainConfig { epochs: 10, seed: 3, ..Default::default() };
        let a = train(&s, 4, &[5], ActivationKind::Tanh, &cfg).unwrap();
        let b = train(&s, 4, &[5], ActivationKind::Tanh, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaler_equivalence() {
        let values: Vec<f64> = (0..80).map(|i| 40.0 + 10.0 * ((i as f64) * 0.3).sin()).collect();
        let s = daily(&values);
        let scaler = Scaler { shift: 35.0, scale: 4.0 };
        let standardized: Vec<f64> = values.iter().map(|&v| scaler.apply(v)).collect();
        let cfg = TrainConfig { epochs: 30, seed: 5, ..Default::default() };
        let (a, _) = train_with_scaler(&s, 5, &[6], ActivationKind::Tanh, &cfg, scaler).unwrap();
        let (b, _) =
            train_with_scaler(&daily(&standardized), 5, &[6], ActivationKind::Tanh, &cfg, Scaler::IDENTITY)
                .unwrap();
        for p in make_windows(&s, 5).unwrap() {
            let xa = a.forward(&p.input).unwrap();
            let xs: Vec<f64> = p.input.iter().map(|&v| scaler.apply(v)).collect();
            let xb = scaler.invert(b.forward(&xs).unwrap());
            assert!((xa - xb).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_config() {
        let s = daily(&[1.0; 20]);
        for cfg in [
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { learning_rate: 1.5, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { l2: -1.0, ..Default::default() },
        ] {
            assert!(train(&s, 3, &[2], ActivationKind::Tanh, &cfg).is_err());
        }
    }

    #[test]
    fn recursive_forecast_fixed_points() {
        // constant output c: hidden weights 0, output bias c
        let mut c = MlpForecaster::zeros(3, &[2], ActivationKind::Tanh, Scaler::IDENTITY).unwrap();
        c.layers[1].biases[0] = 4.0;
        assert_eq!(forecast_recursive(&c, &daily(&[1.0, 2.0, 3.0]), 3).unwrap(), vec![4.0; 3]);

        // passes the newest lag through
        let mut last = MlpForecaster::zeros(2, &[1], ActivationKind::Identity, Scaler::IDENTITY).unwrap();
        last.set_flat_parameters(&[0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(forecast_recursive(&last, &daily(&[1.0, 9.0]), 4).unwrap(), vec![9.0; 4]);
        assert!(forecast_recursive(&last, &daily(&[1.0]), 1).is_err());
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut net = MlpForecaster::zeros(4, &[5, 3], ActivationKind::Logistic, Scaler { shift: 0.1, scale: 3.7 })
            .unwrap();
        net.initialize(&mut rng);
        let back = MlpForecaster::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
        let bits = |n: &MlpForecaster| n.flat_parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&net));
        let mut broken = net.clone();
        broken.layers[0].biases.pop();
        assert!(MlpForecaster::from_json(&serde_json::to_string(&broken).unwrap()).is_err());
    }
}
