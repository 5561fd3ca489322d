//! Dense feed-forward network with ReLU hidden layers.
//!
//! Layer `k` stores a weight matrix of shape `(layer_dims[k], layer_dims[k + 1])`
//! (fan-in rows, fan-out columns) and a bias vector of length `layer_dims[k + 1]`,
//! so a batch of row-major inputs maps through `z = a · W + b`. Rows of the first
//! weight matrix correspond one-to-one with input variables, which is what makes
//! [`NetworkModel::drop_input_columns`] a plain row selection.
//!
//! All arithmetic is `f64`.

mod train;

pub use train::{train, EpochLoss, TrainConfig, TrainOutcome};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower clamp applied to probabilities before taking logarithms.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
}

/// Output transform paired with its loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    /// Softmax probabilities scored with cross-entropy.
    SoftmaxCrossEntropy,
    /// Raw affine outputs scored with `½‖y − ŷ‖²`.
    IdentitySquaredError,
}

impl OutputHead {
    pub fn is_classification(self) -> bool {
        matches!(self, OutputHead::SoftmaxCrossEntropy)
    }
}

/// A minibatch (or any set of rows) with matching targets.
#[derive(Debug, Clone)]
pub struct Batch {
    inputs: Array2<f64>,
    targets: Array2<f64>,
}

impl Batch {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::Config("batch must contain at least one row".into()));
        }
        if inputs.nrows() != targets.nrows() {
            return Err(Error::shape("batch rows", inputs.nrows(), targets.nrows()));
        }
        Ok(Self { inputs, targets })
    }

    /// Builds one-hot targets from class indices in `0..n_classes`.
    pub fn classification(inputs: Array2<f64>, labels: &[usize], n_classes: usize) -> Result<Self> {
        if labels.len() != inputs.nrows() {
            return Err(Error::shape("batch labels", inputs.nrows(), labels.len()));
        }
        let mut targets = Array2::zeros((labels.len(), n_classes));
        for (row, &label) in labels.iter().enumerate() {
            if label >= n_classes {
                return Err(Error::Config(format!(
                    "label {label} out of range for {n_classes} classes"
                )));
            }
            targets[[row, label]] = 1.0;
        }
        Self::new(inputs, targets)
    }

    pub fn regression(inputs: Array2<f64>, y: &[f64]) -> Result<Self> {
        if y.len() != inputs.nrows() {
            return Err(Error::shape("batch targets", inputs.nrows(), y.len()));
        }
        let targets = Array2::from_shape_vec((y.len(), 1), y.to_vec())
            .map_err(|e| Error::Config(e.to_string()))?;
        Self::new(inputs, targets)
    }

    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.inputs.view()
    }

    pub fn targets(&self) -> ArrayView2<'_, f64> {
        self.targets.view()
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Batch {
        Batch {
            inputs: self.inputs.select(Axis(0), indices),
            targets: self.targets.select(Axis(0), indices),
        }
    }

    /// Keeps the input columns listed in `columns`; targets are untouched.
    pub fn select_columns(&self, columns: &[usize]) -> Batch {
        Batch {
            inputs: self.inputs.select(Axis(1), columns),
            targets: self.targets.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    hidden_activation: HiddenActivation,
    output_head: OutputHead,
    rng_seed: u64,
}

impl NetworkModel {
    /// Creates a network with Glorot-uniform weights `U(±sqrt(6 / (fan_in + fan_out)))`
    /// and zero biases.
    pub fn new(layer_dims: &[usize], output_head: OutputHead, seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Config(format!(
                "layer dims must list at least input and output sizes, all positive; got {layer_dims:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite positive limit");
            weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || dist.sample(&mut rng)));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            hidden_activation: HiddenActivation::Relu,
            output_head,
            rng_seed: seed,
        })
    }

    /// Assembles a model from explicit parameters.
    pub fn from_parts(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        output_head: OutputHead,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Config(format!(
                "need one bias per weight matrix ({} weights, {} biases)",
                weights.len(),
                biases.len()
            )));
        }
        let mut layer_dims = vec![weights[0].nrows()];
        for (k, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != *layer_dims.last().unwrap() {
                return Err(Error::shape("weight chain", layer_dims[k], w.nrows()));
            }
            if b.len() != w.ncols() {
                return Err(Error::shape("bias length", w.ncols(), b.len()));
            }
            layer_dims.push(w.ncols());
        }
        if layer_dims.contains(&0) {
            return Err(Error::Config("layer dims must be positive".into()));
        }
        let model = Self {
            layer_dims,
            weights,
            biases,
            hidden_activation: HiddenActivation::Relu,
            output_head,
            rng_seed: 0,
        };
        if !model.is_finite() {
            return Err(Error::Numeric("model parameters contain NaN or Inf".into()));
        }
        Ok(model)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn output_head(&self) -> OutputHead {
        self.output_head
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn check_inputs(&self, inputs: &ArrayView2<'_, f64>) -> Result<()> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::shape("network input width", self.input_dim(), inputs.ncols()));
        }
        Ok(())
    }

    /// Output rows: probabilities for the softmax head, raw values for the identity head.
    pub fn forward(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_inputs(&inputs)?;
        let mut acts = self.forward_trace(inputs);
        Ok(acts.pop().expect("at least one layer"))
    }

    /// Post-activation outputs of every layer; the last entry is the head output.
    fn forward_trace(&self, inputs: ArrayView2<'_, f64>) -> Vec<Array2<f64>> {
        let n_layers = self.weights.len();
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        for k in 0..n_layers {
            let mut z = match acts.last() {
                Some(prev) => prev.dot(&self.weights[k]),
                None => inputs.dot(&self.weights[k]),
            };
            z += &self.biases[k];
            if k + 1 < n_layers {
                z.mapv_inplace(|v| v.max(0.0));
            } else if self.output_head == OutputHead::SoftmaxCrossEntropy {
                softmax_rows(&mut z);
            }
            acts.push(z);
        }
        acts
    }

    /// Backpropagates `delta` (the loss gradient at the head's pre-activation) through
    /// the network. Parameter gradients are written into `grads` when supplied; the
    /// gradient with respect to the inputs is returned when `want_inputs` is set.
    fn backward(
        &self,
        inputs: ArrayView2<'_, f64>,
        acts: &[Array2<f64>],
        mut delta: Array2<f64>,
        mut grads: Option<&mut Gradients>,
        want_inputs: bool,
    ) -> Option<Array2<f64>> {
        for k in (0..self.weights.len()).rev() {
            if let Some(g) = grads.as_deref_mut() {
                g.weights[k] = if k == 0 {
                    inputs.t().dot(&delta)
                } else {
                    acts[k - 1].t().dot(&delta)
                };
                g.biases[k] = delta.sum_axis(Axis(0));
            }
            if k == 0 {
                return want_inputs.then(|| delta.dot(&self.weights[0].t()));
            }
            let mut next = delta.dot(&self.weights[k].t());
            ndarray::Zip::from(&mut next)
                .and(&acts[k - 1])
                .for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
            delta = next;
        }
        None
    }

    /// Per-sample gradient of the single-sample loss with respect to every input
    /// coordinate: entry `(i, j)` is `∂L(y_i, f(x_i)) / ∂x_j`.
    pub fn input_gradients(&self, batch: &Batch) -> Result<Array2<f64>> {
        let inputs = batch.inputs();
        self.check_inputs(&inputs)?;
        check_targets(self, &batch.targets())?;
        let acts = self.forward_trace(inputs.view());
        let delta = head_delta(acts.last().unwrap(), &batch.targets());
        Ok(self
            .backward(inputs, &acts, delta, None, true)
            .expect("input gradients requested"))
    }

    /// Mean loss and parameter gradients of the mean loss over `batch`.
    pub(crate) fn loss_and_gradients(&self, batch: &Batch, grads: &mut Gradients) -> f64 {
        let inputs = batch.inputs();
        let acts = self.forward_trace(inputs.view());
        let out = acts.last().unwrap();
        let loss_value = mean_loss_unchecked(out.view(), batch.targets(), self.output_head);
        let mut delta = head_delta(out, &batch.targets());
        delta /= batch.len() as f64;
        self.backward(inputs, &acts, delta, Some(grads), false);
        loss_value
    }

    pub(crate) fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            w.scaled_add(-learning_rate, g);
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            b.scaled_add(-learning_rate, g);
        }
    }

    /// Removes input neurons: the first weight matrix keeps only the rows in `keep`
    /// (strictly increasing positions); every other parameter is copied unchanged.
    pub fn drop_input_columns(&self, keep: &[usize]) -> Result<NetworkModel> {
        if keep.is_empty() {
            return Err(Error::Config("cannot drop every input column".into()));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("keep indices must be strictly increasing".into()));
        }
        if let Some(&last) = keep.last() {
            if last >= self.input_dim() {
                return Err(Error::Config(format!(
                    "keep index {last} out of range for input dim {}",
                    self.input_dim()
                )));
            }
        }
        let mut model = self.clone();
        model.weights[0] = self.weights[0].select(Axis(0), keep);
        model.layer_dims[0] = keep.len();
        Ok(model)
    }
}

/// Parameter gradients, laid out like the model.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub(crate) fn zeros_like(model: &NetworkModel) -> Self {
        Self {
            weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }
}

fn check_targets(model: &NetworkModel, targets: &ArrayView2<'_, f64>) -> Result<()> {
    if targets.ncols() != model.output_dim() {
        return Err(Error::shape("target width", model.output_dim(), targets.ncols()));
    }
    Ok(())
}

/// Gradient of the single-sample loss with respect to the head's pre-activation.
/// Both heads reduce to `output − target` (softmax with one-hot targets).
fn head_delta(out: &Array2<f64>, targets: &ArrayView2<'_, f64>) -> Array2<f64> {
    out - targets
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Loss of each row: cross-entropy `−Σ y_k ln max(p_k, ε)` or `½‖y − ŷ‖²`.
pub fn per_sample_loss(
    outputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    head: OutputHead,
) -> Result<Array1<f64>> {
    if outputs.dim() != targets.dim() {
        return Err(Error::shape(
            "loss operands",
            format!("{:?}", outputs.dim()),
            format!("{:?}", targets.dim()),
        ));
    }
    if outputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("loss inputs contain NaN or Inf".into()));
    }
    Ok(per_sample_loss_unchecked(outputs, targets, head))
}

fn per_sample_loss_unchecked(
    outputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    head: OutputHead,
) -> Array1<f64> {
    outputs
        .rows()
        .into_iter()
        .zip(targets.rows())
        .map(|(o, t)| match head {
            OutputHead::SoftmaxCrossEntropy => o
                .iter()
                .zip(t.iter())
                .filter(|(_, &y)| y != 0.0)
                .map(|(&p, &y)| -y * p.max(LOG_CLAMP).ln())
                .sum::<f64>(),
            OutputHead::IdentitySquaredError => {
                0.5 * o.iter().zip(t.iter()).map(|(a, b)| (b - a) * (b - a)).sum::<f64>()
            }
        })
        .collect()
}

fn mean_loss_unchecked(outputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>, head: OutputHead) -> f64 {
    per_sample_loss_unchecked(outputs, targets, head).mean().unwrap_or(f64::NAN)
}

/// Mean of [`per_sample_loss`] over the batch.
pub fn loss(outputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>, head: OutputHead) -> Result<f64> {
    let per_sample = per_sample_loss(outputs, targets, head)?;
    per_sample
        .mean()
        .ok_or_else(|| Error::Config("loss of an empty batch".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array};

    fn relu_net(dims: &[usize], head: OutputHead, seed: u64) -> NetworkModel {
        NetworkModel::new(dims, head, seed).unwrap()
    }

    #[test]
    fn init_shapes_chain_and_stay_within_limit() {
        let model = relu_net(&[7, 5, 3, 2], OutputHead::SoftmaxCrossEntropy, 1);
        for (k, w) in model.weights().iter().enumerate() {
            assert_eq!(w.dim(), (model.layer_dims()[k], model.layer_dims()[k + 1]));
            let limit = (6.0 / (w.nrows() + w.ncols()) as f64).sqrt();
            assert!(w.iter().all(|v| v.abs() <= limit));
        }
        assert!(model.biases().iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn zero_softmax_model_is_uniform() {
        let model = NetworkModel::from_parts(
            vec![Array2::zeros((3, 2))],
            vec![Array1::zeros(2)],
            OutputHead::SoftmaxCrossEntropy,
        )
        .unwrap();
        let out = model.forward(array![[1.0, -2.0, 3.0], [0.3, 0.0, 9.0]].view()).unwrap();
        for v in out.iter() {
            assert_eq!(*v, 0.5);
        }
    }

    #[test]
    fn single_linear_unit_is_affine() {
        let model = NetworkModel::from_parts(
            vec![array![[1.0], [2.0]]],
            vec![array![0.0]],
            OutputHead::IdentitySquaredError,
        )
        .unwrap();
        let out = model.forward(array![[1.0, 0.0]].view()).unwrap();
        assert_eq!(out[[0, 0]], 1.0);
    }

    #[test]
    fn negative_preactivations_leave_only_bias_path() {
        let model = NetworkModel::from_parts(
            vec![array![[-1.0, -2.0], [-1.0, -0.5]], array![[3.0], [4.0]]],
            vec![array![-0.1, -0.2], array![0.75]],
            OutputHead::IdentitySquaredError,
        )
        .unwrap();
        let out = model.forward(array![[0.5, 2.0], [1.0, 1.0]].view()).unwrap();
        assert_eq!(out, array![[0.75], [0.75]]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let model = relu_net(&[3, 2], OutputHead::SoftmaxCrossEntropy, 0);
        let err = model.forward(Array2::zeros((2, 4)).view()).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let model = relu_net(&[6, 8, 4], OutputHead::SoftmaxCrossEntropy, 3);
        let x = Array::from_shape_fn((20, 6), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let out = model.forward(x.view()).unwrap();
        for row in out.rows() {
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_examples() {
        let ce = loss(array![[1.0, 0.0]].view(), array![[1.0, 0.0]].view(), OutputHead::SoftmaxCrossEntropy)
            .unwrap();
        assert!(ce <= 1e-12);
        let ce = loss(array![[0.5, 0.5]].view(), array![[1.0, 0.0]].view(), OutputHead::SoftmaxCrossEntropy)
            .unwrap();
        assert_abs_diff_eq!(ce, std::f64::consts::LN_2, epsilon = 1e-15);
        let se = loss(array![[1.0]].view(), array![[3.0]].view(), OutputHead::IdentitySquaredError).unwrap();
        assert_eq!(se, 2.0);
    }

    #[test]
    fn confident_mistake_is_clamped() {
        let ce = loss(array![[0.0, 1.0]].view(), array![[1.0, 0.0]].view(), OutputHead::SoftmaxCrossEntropy)
            .unwrap();
        assert_abs_diff_eq!(ce, -LOG_CLAMP.ln(), epsilon = 1e-9);
    }

    #[test]
    fn loss_rejects_non_finite() {
        let err = loss(array![[f64::NAN]].view(), array![[1.0]].view(), OutputHead::IdentitySquaredError)
            .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn linear_unit_input_gradient_closed_form() {
        let model = NetworkModel::from_parts(
            vec![array![[2.0], [-1.0]]],
            vec![array![0.0]],
            OutputHead::IdentitySquaredError,
        )
        .unwrap();
        let batch = Batch::regression(array![[1.0, 1.0]], &[3.0]).unwrap();
        let g = model.input_gradients(&batch).unwrap();
        assert_eq!(g, array![[-4.0, 2.0]]);
    }

    #[test]
    fn duplicated_sample_gives_identical_rows() {
        let model = relu_net(&[5, 4, 3], OutputHead::SoftmaxCrossEntropy, 9);
        let x = array![[0.1, 0.2, -0.3, 0.4, 0.5], [0.1, 0.2, -0.3, 0.4, 0.5]];
        let batch = Batch::classification(x, &[2, 2], 3).unwrap();
        let g = model.input_gradients(&batch).unwrap();
        assert_eq!(g.row(0), g.row(1));
    }

    #[test]
    fn drop_keep_all_is_identity() {
        let model = relu_net(&[4, 3, 2], OutputHead::SoftmaxCrossEntropy, 5);
        assert_eq!(model.drop_input_columns(&[0, 1, 2, 3]).unwrap(), model);
    }

    #[test]
    fn drop_keeps_selected_rows() {
        let model = relu_net(&[3, 4, 2], OutputHead::SoftmaxCrossEntropy, 5);
        let reduced = model.drop_input_columns(&[0]).unwrap();
        assert_eq!(reduced.weights()[0].nrows(), 1);
        assert_eq!(reduced.weights()[0].row(0), model.weights()[0].row(0));
        assert_eq!(reduced.weights()[1], model.weights()[1]);
        assert_eq!(reduced.layer_dims(), &[1, 4, 2]);
    }

    #[test]
    fn drop_rejects_bad_keep_sets() {
        let model = relu_net(&[3, 2], OutputHead::SoftmaxCrossEntropy, 5);
        assert!(matches!(model.drop_input_columns(&[]), Err(Error::Config(_))));
        assert!(matches!(model.drop_input_columns(&[1, 1]), Err(Error::Config(_))));
        assert!(matches!(model.drop_input_columns(&[3]), Err(Error::Config(_))));
    }

    #[test]
    fn batch_builders_validate() {
        assert!(Batch::classification(Array2::zeros((2, 2)), &[0, 3], 2).is_err());
        assert!(Batch::regression(Array2::zeros((2, 2)), &[1.0]).is_err());
        assert!(Batch::new(Array2::zeros((0, 2)), Array2::zeros((0, 1))).is_err());
        let b = Batch::classification(Array2::zeros((3, 2)), &[0, 1, 1], 2).unwrap();
        for row in b.targets().rows() {
            assert_eq!(row.sum(), 1.0);
        }
    }
}
