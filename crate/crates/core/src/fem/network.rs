//! BiLSTM fusion network with an affine softmax head, and its exact
//! gradients by backpropagation through time.
//!
//! Gate layout follows the usual `[input, forget, cell, output]` stacking of
//! the four `H`-row blocks in `w_ih`, `w_hh` and `bias`.

use ndarray::{s, Array1, Array2, ArrayView1, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FemError;
use crate::corpus::Label;
use crate::encoder::SEGMENTS;

/// Probabilities below this are clamped before taking logarithms.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmDirection {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub bias: Array1<f64>,
}

struct StepCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    tanh_c: Array1<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..bound))
}

impl LstmDirection {
    fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        LstmDirection {
            w_ih: uniform(4 * hidden, input, bound, rng),
            w_hh: uniform(4 * hidden, hidden, bound, rng),
            bias: Array1::from_shape_simple_fn(4 * hidden, || rng.random_range(-bound..bound)),
        }
    }

    fn zeros_like(&self) -> Self {
        LstmDirection {
            w_ih: Array2::zeros(self.w_ih.raw_dim()),
            w_hh: Array2::zeros(self.w_hh.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.ncols()
    }

    /// Runs the recurrence over `inputs` from a zero state and returns the
    /// final hidden state.
    fn run<'a>(&self, inputs: impl Iterator<Item = &'a Array1<f64>>) -> (Array1<f64>, Vec<StepCache>) {
        let hn = self.hidden();
        let mut h = Array1::zeros(hn);
        let mut c = Array1::zeros(hn);
        let mut caches = Vec::with_capacity(SEGMENTS);
        for x in inputs {
            let z = self.w_ih.dot(x) + self.w_hh.dot(&h) + &self.bias;
            let i = z.slice(s![0..hn]).mapv(sigmoid);
            let f = z.slice(s![hn..2 * hn]).mapv(sigmoid);
            let g = z.slice(s![2 * hn..3 * hn]).mapv(f64::tanh);
            let o = z.slice(s![3 * hn..4 * hn]).mapv(sigmoid);
            let c_new = &f * &c + &i * &g;
            let tanh_c = c_new.mapv(f64::tanh);
            let h_new = &o * &tanh_c;
            caches.push(StepCache {
                x: x.clone(),
                h_prev: std::mem::replace(&mut h, h_new),
                c_prev: std::mem::replace(&mut c, c_new),
                i,
                f,
                g,
                o,
                tanh_c,
            });
        }
        (h, caches)
    }

    /// Accumulates parameter gradients given dL/d(final hidden state).
    fn backprop(&self, caches: &[StepCache], dh_final: ArrayView1<f64>, grads: &mut LstmDirection) {
        let hn = self.hidden();
        let mut dh = dh_final.to_owned();
        let mut dc = Array1::<f64>::zeros(hn);
        let mut dz = Array1::<f64>::zeros(4 * hn);
        for step in caches.iter().rev() {
            let d_o = &dh * &step.tanh_c;
            dc += &(&dh * &step.o * &step.tanh_c.mapv(|t| 1.0 - t * t));
            let di = &dc * &step.g;
            let dg = &dc * &step.i;
            let df = &dc * &step.c_prev;
            Zip::from(dz.slice_mut(s![0..hn]))
                .and(&di)
                .and(&step.i)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));
            Zip::from(dz.slice_mut(s![hn..2 * hn]))
                .and(&df)
                .and(&step.f)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));
            Zip::from(dz.slice_mut(s![2 * hn..3 * hn]))
                .and(&dg)
                .and(&step.g)
                .for_each(|z, &d, &v| *z = d * (1.0 - v * v));
            Zip::from(dz.slice_mut(s![3 * hn..4 * hn]))
                .and(&d_o)
                .and(&step.o)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));

            outer_add(&mut grads.w_ih, &dz, &step.x);
            outer_add(&mut grads.w_hh, &dz, &step.h_prev);
            grads.bias += &dz;

            dh = self.w_hh.t().dot(&dz);
            dc = &dc * &step.f;
        }
    }
}

fn outer_add(target: &mut Array2<f64>, col: &Array1<f64>, row: &Array1<f64>) {
    for (mut target_row, &a) in target.rows_mut().into_iter().zip(col) {
        if a != 0.0 {
            target_row.scaled_add(a, row);
        }
    }
}

/// All trainable tensors. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemParams {
    pub forward: LstmDirection,
    pub backward: LstmDirection,
    /// 2 × 2H; row 0 scores misinformation, row 1 information.
    pub classifier_w: Array2<f64>,
    pub classifier_b: Array1<f64>,
}

impl FemParams {
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let forward = LstmDirection::init(input_dim, hidden, rng);
        let backward = LstmDirection::init(input_dim, hidden, rng);
        let bound = 1.0 / ((2 * hidden) as f64).sqrt();
        FemParams {
            forward,
            backward,
            classifier_w: uniform(2, 2 * hidden, bound, rng),
            classifier_b: Array1::from_shape_simple_fn(2, || rng.random_range(-bound..bound)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        FemParams {
            forward: self.forward.zeros_like(),
            backward: self.backward.zeros_like(),
            classifier_w: Array2::zeros(self.classifier_w.raw_dim()),
            classifier_b: Array1::zeros(2),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.w_ih.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    /// Flat views of every tensor in a fixed order.
    pub fn tensors(&self) -> [&[f64]; 8] {
        fn v(a: Option<&[f64]>) -> &[f64] {
            a.expect("parameters are in standard layout")
        }
        [
            v(self.forward.w_ih.as_slice()),
            v(self.forward.w_hh.as_slice()),
            v(self.forward.bias.as_slice()),
            v(self.backward.w_ih.as_slice()),
            v(self.backward.w_hh.as_slice()),
            v(self.backward.bias.as_slice()),
            v(self.classifier_w.as_slice()),
            v(self.classifier_b.as_slice()),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 8] {
        fn v(a: Option<&mut [f64]>) -> &mut [f64] {
            a.expect("parameters are in standard layout")
        }
        [
            v(self.forward.w_ih.as_slice_mut()),
            v(self.forward.w_hh.as_slice_mut()),
            v(self.forward.bias.as_slice_mut()),
            v(self.backward.w_ih.as_slice_mut()),
            v(self.backward.w_hh.as_slice_mut()),
            v(self.backward.bias.as_slice_mut()),
            v(self.classifier_w.as_slice_mut()),
            v(self.classifier_b.as_slice_mut()),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
pub struct ForwardTrace {
    /// Softmax output; index 0 = misinformation, 1 = information.
    pub probabilities: [f64; 2],
    pub logits: [f64; 2],
    /// Post-ReLU, pre-dropout BiLSTM state (2H).
    pub hidden: Array1<f64>,
    pre_relu: Array1<f64>,
    dropped: Array1<f64>,
    hidden_mask: Option<Array1<f64>>,
    forward_steps: Vec<StepCache>,
    backward_steps: Vec<StepCache>,
}

pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e = [(logits[0] - m).exp(), (logits[1] - m).exp()];
    let z = e[0] + e[1];
    [e[0] / z, e[1] / z]
}

fn dropout_mask<R: Rng>(len: usize, rate: f64, rng: &mut R) -> Array1<f64> {
    let keep = 1.0 - rate;
    Array1::from_shape_simple_fn(len, || if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
}

/// Network weights plus the dropout rate used when training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemNetwork {
    pub params: FemParams,
    pub dropout_rate: f64,
}

impl FemNetwork {
    pub fn new<R: Rng>(input_dim: usize, hidden: usize, dropout_rate: f64, rng: &mut R) -> Self {
        FemNetwork {
            params: FemParams::init(input_dim, hidden, rng),
            dropout_rate,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.params.input_dim()
    }

    pub fn hidden_size(&self) -> usize {
        self.params.hidden()
    }

    /// Forward pass over five segment vectors. Dropout (on the input sequence
    /// and before the head) is applied only when `dropout` carries an RNG.
    pub fn trace<R: Rng>(&self, segments: &[&[f64]], dropout: Option<&mut R>) -> Result<ForwardTrace, FemError> {
        let d = self.input_dim();
        if segments.len() != SEGMENTS {
            return Err(FemError::DimensionMismatch(format!(
                "expected {SEGMENTS} segments, got {}",
                segments.len()
            )));
        }
        if let Some(bad) = segments.iter().find(|s| s.len() != d) {
            return Err(FemError::DimensionMismatch(format!(
                "segment has dimension {}, network expects {d}",
                bad.len()
            )));
        }
        let rate = self.dropout_rate;
        let mut rng = dropout.filter(|_| rate > 0.0);
        let xs: Vec<Array1<f64>> = segments
            .iter()
            .map(|s| {
                let x = ArrayView1::from(*s).to_owned();
                match rng.as_deref_mut() {
                    Some(r) => x * dropout_mask(d, rate, r),
                    None => x,
                }
            })
            .collect();

        let p = &self.params;
        let (hf, forward_steps) = p.forward.run(xs.iter());
        let (hb, backward_steps) = p.backward.run(xs.iter().rev());
        let mut pre_relu = Array1::zeros(2 * p.hidden());
        pre_relu.slice_mut(s![..p.hidden()]).assign(&hf);
        pre_relu.slice_mut(s![p.hidden()..]).assign(&hb);
        let hidden = pre_relu.mapv(|v| v.max(0.0));
        let hidden_mask = rng.map(|r| dropout_mask(hidden.len(), rate, r));
        let dropped = match &hidden_mask {
            Some(m) => &hidden * m,
            None => hidden.clone(),
        };
        let z = p.classifier_w.dot(&dropped) + &p.classifier_b;
        let logits = [z[0], z[1]];
        Ok(ForwardTrace {
            probabilities: softmax2(logits),
            logits,
            hidden,
            pre_relu,
            dropped,
            hidden_mask,
            forward_steps,
            backward_steps,
        })
    }

    /// Inference-mode class probabilities.
    pub fn probabilities(&self, segments: &[&[f64]]) -> Result<[f64; 2], FemError> {
        Ok(self.trace::<rand_chacha::ChaCha8Rng>(segments, None)?.probabilities)
    }

    /// Accumulates gradients for one traced sample given dL/dlogits.
    fn backward(&self, trace: &ForwardTrace, dlogits: [f64; 2], grads: &mut FemParams) {
        let p = &self.params;
        let dl = Array1::from(dlogits.to_vec());
        outer_add(&mut grads.classifier_w, &dl, &trace.dropped);
        grads.classifier_b += &dl;

        let mut dh = p.classifier_w.t().dot(&dl);
        if let Some(m) = &trace.hidden_mask {
            dh *= m;
        }
        Zip::from(&mut dh).and(&trace.pre_relu).for_each(|g, &r| {
            if r <= 0.0 {
                *g = 0.0
            }
        });
        let hn = p.hidden();
        p.forward
            .backprop(&trace.forward_steps, dh.slice(s![..hn]), &mut grads.forward);
        p.backward
            .backprop(&trace.backward_steps, dh.slice(s![hn..]), &mut grads.backward);
    }

    /// Mean cross-entropy plus `lambda·‖W‖²` over a batch, with gradients for
    /// every parameter. Dropout is active when `dropout` carries an RNG.
    pub fn loss_and_gradients<R: Rng>(
        &self,
        batch: &[(Vec<&[f64]>, Label)],
        lambda: f64,
        mut dropout: Option<&mut R>,
    ) -> Result<(f64, FemParams), FemError> {
        let mut grads = self.params.zeros_like();
        let n = batch.len().max(1) as f64;
        let mut data_loss = 0.0;
        for (segments, label) in batch {
            let trace = self.trace(segments, dropout.as_deref_mut())?;
            let y = label.as_index();
            let py = trace.probabilities[y];
            data_loss -= py.max(PROB_EPSILON).ln();
            // d(-ln p_y)/dz = p - onehot(y); zero where the clamp is active.
            if py >= PROB_EPSILON {
                let mut dz = trace.probabilities;
                dz[y] -= 1.0;
                self.backward(&trace, [dz[0] / n, dz[1] / n], &mut grads);
            }
        }
        let w = &self.params.classifier_w;
        grads.classifier_w.scaled_add(2.0 * lambda, w);
        let l2 = lambda * w.iter().map(|x| x * x).sum::<f64>();
        Ok((data_loss / n + l2, grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(d: usize, h: usize, seed: u64) -> FemNetwork {
        FemNetwork::new(d, h, 0.3, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn random_segments(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..SEGMENTS)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    fn loss_only(net: &FemNetwork, batch: &[(Vec<&[f64]>, Label)], lambda: f64) -> f64 {
        net.loss_and_gradients::<ChaCha8Rng>(batch, lambda, None).unwrap().0
    }

    // Central differences over every parameter tensor, including the
    // recurrent weights.
    #[test]
    fn all_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = net(6, 3, 5);
        let data: Vec<Vec<Vec<f64>>> = (0..3).map(|_| random_segments(6, &mut rng)).collect();
        let labels = [Label::Misinformation, Label::Information, Label::Information];
        let batch: Vec<(Vec<&[f64]>, Label)> = data
            .iter()
            .zip(labels)
            .map(|(segs, l)| (segs.iter().map(Vec::as_slice).collect(), l))
            .collect();
        let (_, grads) = model.loss_and_gradients::<ChaCha8Rng>(&batch, 0.01, None).unwrap();
        let step = 1e-5;
        let mut probe = model.clone();
        for t in 0..8 {
            for k in 0..grads.tensors()[t].len() {
                let orig = probe.params.tensors()[t][k];
                probe.params.tensors_mut()[t][k] = orig + step;
                let up = loss_only(&probe, &batch, 0.01);
                probe.params.tensors_mut()[t][k] = orig - step;
                let down = loss_only(&probe, &batch, 0.01);
                probe.params.tensors_mut()[t][k] = orig;
                let numeric = (up - down) / (2.0 * step);
                let analytic = grads.tensors()[t][k];
                let scale = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / scale < 1e-4 || (numeric - analytic).abs() < 1e-9,
                    "tensor {t} index {k}: analytic {analytic} numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn gradients_with_fixed_dropout_masks_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = net(4, 2, 9);
        let segs = random_segments(4, &mut rng);
        let batch = vec![(segs.iter().map(Vec::as_slice).collect::<Vec<_>>(), Label::Information)];
        let mask_rng = ChaCha8Rng::seed_from_u64(77);
        let run = |m: &FemNetwork| {
            let mut r = mask_rng.clone();
            m.loss_and_gradients(&batch, 0.0, Some(&mut r)).unwrap()
        };
        let (_, grads) = run(&model);
        let mut probe = model.clone();
        let k = 1;
        let orig = probe.params.classifier_w[[0, k]];
        probe.params.classifier_w[[0, k]] = orig + 1e-5;
        let up = run(&probe).0;
        probe.params.classifier_w[[0, k]] = orig - 1e-5;
        let down = run(&probe).0;
        let numeric = (up - down) / 2e-5;
        assert!((numeric - grads.classifier_w[[0, k]]).abs() < 1e-7);
    }

    #[test]
    fn wrong_segment_count_is_dimension_mismatch() {
        let model = net(4, 2, 1);
        let v = vec![0.0; 4];
        let segs: Vec<&[f64]> = vec![&v; 4];
        assert!(matches!(
            model.probabilities(&segs),
            Err(FemError::DimensionMismatch(_))
        ));
        let w = vec![0.0; 3];
        let segs: Vec<&[f64]> = vec![&w; 5];
        assert!(matches!(
            model.probabilities(&segs),
            Err(FemError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn softmax_of_two_and_zero() {
        let p = softmax2([2.0, 0.0]);
        // 1 / (1 + e^-2)
        assert!((p[0] - 0.8807970779778823).abs() < 1e-12);
        assert!((p[1] - 0.11920292202211755).abs() < 1e-12);
    }
}
