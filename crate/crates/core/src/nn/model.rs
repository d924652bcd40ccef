//! The sensing model: an analog front end followed by the digital stack
//! CONV → ReLU → MAXPOOL → CONV → ReLU → MAXPOOL → FC → ReLU → FC → ReLU → FC.

use std::hash::{Hash, Hasher};

use rand::Rng;
use rayon::prelude::*;

use super::layers::{
    argmax, conv1d_backward, conv1d_forward, dense_backward, dense_forward, maxpool1d_backward,
    maxpool1d_forward, relu, relu_backward, softmax_xent, Padding,
};
use super::tensor::Tensor;
use crate::datasets::EnvelopeSignal;
use crate::error::{domain, shape, Error, Result};
use crate::physics::{
    accumulate_pump_grad, decay_grad, decimate, mirp_forward_with_decay, pump_grad_through_rms,
    untrained_forward_with_decay, Decimation, WeightBank,
};
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

pub const KERNEL_SIZE: usize = 3;
pub const POOL_SIZE: usize = 3;
/// Full-size filter and unit counts before the scale divisor.
pub const BASE_FILTERS: usize = 128;
pub const BASE_FC1: usize = 512;
pub const BASE_FC2: usize = 128;

/// Records per gradient work unit. Fixed so that the reduction order does not
/// depend on the thread count.
pub const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontEnd {
    /// Trainable pump pulses shaping the damped kernel.
    Mirp,
    /// Continuous-wave pump: a fixed damped integrator per input channel.
    Untrained,
    /// Direct digitization of the envelope, decimated by the stride.
    Conventional,
}

impl FrontEnd {
    pub fn name(self) -> &'static str {
        match self {
            FrontEnd::Mirp => "mirp",
            FrontEnd::Untrained => "untrained",
            FrontEnd::Conventional => "conventional",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mirp" => Ok(FrontEnd::Mirp),
            "untrained" => Ok(FrontEnd::Untrained),
            "conventional" => Ok(FrontEnd::Conventional),
            _ => domain(format!("unknown sensing mode '{s}' (expected mirp, untrained or conventional)")),
        }
    }

    fn code(self) -> u8 {
        match self {
            FrontEnd::Mirp => 0,
            FrontEnd::Untrained => 1,
            FrontEnd::Conventional => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        [FrontEnd::Mirp, FrontEnd::Untrained, FrontEnd::Conventional]
            .get(c as usize)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown front-end code {c}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub front_end: FrontEnd,
    /// Input channels J.
    pub channels: usize,
    /// Samples per channel M.
    pub len: usize,
    /// Readout stride k.
    pub stride: usize,
    /// Frequency modes L (pump kernels per input channel).
    pub modes: usize,
    pub classes: usize,
    /// Divides every filter and unit count.
    pub scale: usize,
    /// ReLU on the measured features of the optical front ends.
    pub physical_relu: bool,
    /// Train the decay factor through `ln(ΓΔt/2)`.
    pub train_linewidth: bool,
    pub decimation: Decimation,
}

impl ModelSpec {
    pub fn new(front_end: FrontEnd, channels: usize, len: usize, stride: usize, classes: usize) -> Self {
        Self {
            front_end,
            channels,
            len,
            stride,
            modes: 16,
            classes,
            scale: 4,
            physical_relu: true,
            train_linewidth: false,
            decimation: Decimation::Pick,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.len == 0 {
            return domain("input must have at least one channel and one sample");
        }
        if self.stride == 0 || self.stride > self.len {
            return domain(format!("stride must lie in 1..={}, got {}", self.len, self.stride));
        }
        if self.modes == 0 {
            return domain("mode count must be >= 1");
        }
        if self.classes < 2 {
            return domain(format!("need at least two classes, got {}", self.classes));
        }
        if self.scale == 0 || BASE_FILTERS % self.scale != 0 || BASE_FC1 % self.scale != 0 {
            return domain(format!("scale {} must divide {BASE_FILTERS}", self.scale));
        }
        if self.train_linewidth && self.front_end == FrontEnd::Conventional {
            return domain("a trainable linewidth needs an optical front end");
        }
        Ok(())
    }

    pub fn readouts(&self) -> usize {
        self.len / self.stride
    }

    /// Channels entering the first convolution.
    pub fn feature_channels(&self) -> usize {
        match self.front_end {
            FrontEnd::Mirp => self.channels * self.modes,
            _ => self.channels,
        }
    }

    pub fn filters(&self) -> usize {
        BASE_FILTERS / self.scale
    }

    pub fn fc1_units(&self) -> usize {
        BASE_FC1 / self.scale
    }

    pub fn fc2_units(&self) -> usize {
        BASE_FC2 / self.scale
    }

    fn applies_relu(&self) -> bool {
        self.physical_relu && self.front_end != FrontEnd::Conventional
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub name: String,
    pub tensor: Tensor<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layout {
    pump: Option<usize>,
    rate: Option<usize>,
    conv1: usize,
    conv2: usize,
    fc1: usize,
    fc2: usize,
    fc3: usize,
}

/// Gradients in parameter order. Before [`Model::finish_grads`] the pump slot
/// holds the gradient with respect to the normalized bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub values: Vec<Vec<T>>,
    pub records: usize,
    finished: bool,
}

impl<T: Scalar> Grads<T> {
    fn add(&mut self, other: &Grads<T>) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.records += other.records;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats<T> {
    pub loss_sum: T,
    pub correct: usize,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T = f64> {
    spec: ModelSpec,
    params: Vec<Param<T>>,
    layout: Layout,
    /// Fixed decay factor `d` when the linewidth is not trained.
    decay: T,
}

/// Per-batch front-end state shared by every record.
struct Front<T> {
    bank: Option<WeightBank<T>>,
    decay: T,
}

struct Trace<T> {
    readout: Vec<T>,
    a0: Tensor<T>,
    z1: Tensor<T>,
    arg1: Vec<usize>,
    p1: Tensor<T>,
    z2: Tensor<T>,
    arg2: Vec<usize>,
    p2: Tensor<T>,
    h1: Vec<T>,
    r1: Vec<T>,
    h2: Vec<T>,
    r2: Vec<T>,
    logits: Vec<T>,
}

impl<T: Scalar> Trace<T> {
    /// Hash of every ReLU mask and pooling choice, used to spot kinks.
    fn pattern(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in [&self.readout, self.z1.data(), self.z2.data(), &self.h1, &self.h2] {
            for x in v.iter() {
                (*x > T::zero()).hash(&mut h);
            }
        }
        self.arg1.hash(&mut h);
        self.arg2.hash(&mut h);
        h.finish()
    }
}

fn uniform<T: Scalar>(shape: &[usize], bound: f64, rng: &mut impl Rng) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::lit(rng.random_range(-bound..=bound))).collect();
    Tensor::from_vec(shape, data).expect("shape product matches")
}

impl<T: Scalar> Model<T> {
    /// Builds a model with freshly initialized parameters. `decay` is the
    /// per-bin factor `exp(−ΓΔt/2)`.
    pub fn new(spec: ModelSpec, decay: f64, seed: u64) -> Result<Self> {
        spec.validate()?;
        if !(0.0..=1.0).contains(&decay) {
            return domain(format!("decay factor must lie in [0, 1], got {decay}"));
        }
        if spec.train_linewidth && !(decay > 0.0 && decay < 1.0) {
            return domain("a trainable linewidth needs a decay factor strictly inside (0, 1)");
        }
        let mut params = Vec::new();
        let mut push = |name: &str, tensor: Tensor<T>| {
            params.push(Param { name: name.to_string(), tensor });
            params.len() - 1
        };
        let rng_for = |i: u64| stream(seed, Purpose::Init, &[i]);

        let pump = if spec.front_end == FrontEnd::Mirp {
            let bank = WeightBank::<T>::random(spec.channels, spec.modes, spec.len, spec.stride, &mut rng_for(0))?;
            let t = Tensor::from_vec(&[spec.channels, spec.modes, spec.len], bank.weights().to_vec())?;
            Some(push("phys.pump", t))
        } else {
            None
        };
        let rate = if spec.train_linewidth {
            let theta = (-decay.ln()).ln();
            Some(push("phys.log_rate", Tensor::from_vec(&[1], vec![T::lit(theta)])?))
        } else {
            None
        };

        let c0 = spec.feature_channels();
        let f = spec.filters();
        let r = spec.readouts();
        let dims: [(&str, Vec<usize>, usize); 5] = [
            ("conv1", vec![f, c0, KERNEL_SIZE], c0 * KERNEL_SIZE),
            ("conv2", vec![f, f, KERNEL_SIZE], f * KERNEL_SIZE),
            ("fc1", vec![spec.fc1_units(), f * r], f * r),
            ("fc2", vec![spec.fc2_units(), spec.fc1_units()], spec.fc1_units()),
            ("fc3", vec![spec.classes, spec.fc2_units()], spec.fc2_units()),
        ];
        let mut starts = [0usize; 5];
        for (i, (name, shape, fan_in)) in dims.iter().enumerate() {
            let bound = 1.0 / (*fan_in as f64).sqrt();
            let w = uniform(shape, bound, &mut rng_for(i as u64 + 1));
            starts[i] = push(&format!("{name}.weight"), w);
            push(&format!("{name}.bias"), Tensor::zeros(&[shape[0]]));
        }
        let layout = Layout {
            pump,
            rate,
            conv1: starts[0],
            conv2: starts[1],
            fc1: starts[2],
            fc2: starts[3],
            fc3: starts[4],
        };
        Ok(Self { spec, params, layout, decay: T::lit(decay) })
    }

    /// Rebuilds a model from a stored spec, decay and parameter list.
    pub fn from_parts(spec: ModelSpec, decay: f64, params: Vec<Param<T>>) -> Result<Self> {
        let mut model = Self::new(spec, decay, 0)?;
        if params.len() != model.params.len() {
            return shape(format!("expected {} parameter tensors, got {}", model.params.len(), params.len()));
        }
        for (dst, src) in model.params.iter_mut().zip(params) {
            if dst.name != src.name || dst.tensor.shape() != src.tensor.shape() {
                return shape(format!(
                    "parameter '{}' {:?} does not match expected '{}' {:?}",
                    src.name,
                    src.tensor.shape(),
                    dst.name,
                    dst.tensor.shape()
                ));
            }
            *dst = src;
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Param<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param<T>] {
        &mut self.params
    }

    pub fn param(&self, name: &str) -> Option<&Tensor<T>> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.tensor)
    }

    pub fn num_params(&self) -> usize {
        self.params.iter().map(|p| p.tensor.len()).sum()
    }

    /// Current decay factor `d`.
    pub fn decay(&self) -> T {
        match self.layout.rate {
            Some(i) => (-self.params[i].tensor.data()[0].exp()).exp(),
            None => self.decay,
        }
    }

    /// The decay fixed at construction (the starting point when trained).
    pub fn base_decay(&self) -> T {
        self.decay
    }

    pub fn zero_grads(&self) -> Grads<T> {
        Grads {
            values: self.params.iter().map(|p| vec![T::zero(); p.tensor.len()]).collect(),
            records: 0,
            finished: false,
        }
    }

    fn front(&self) -> Result<Front<T>> {
        let bank = match self.layout.pump {
            Some(i) => Some(WeightBank::from_vec(
                self.spec.channels,
                self.spec.modes,
                self.spec.len,
                self.spec.stride,
                self.params[i].tensor.data().to_vec(),
            )?),
            None => None,
        };
        Ok(Front { bank, decay: self.decay() })
    }

    fn check_input(&self, x: &EnvelopeSignal<T>) -> Result<()> {
        if x.channels != self.spec.channels || x.len() != self.spec.len {
            return shape(format!(
                "record is {}x{}, model expects {}x{}",
                x.channels,
                x.len(),
                self.spec.channels,
                self.spec.len
            ));
        }
        Ok(())
    }

    fn readout_with(&self, front: &Front<T>, x: &EnvelopeSignal<T>) -> Result<Vec<T>> {
        self.check_input(x)?;
        Ok(match self.spec.front_end {
            FrontEnd::Mirp => {
                let bank = front.bank.as_ref().expect("mirp model has a bank");
                mirp_forward_with_decay(x, bank, front.decay, 1.0)?.values
            }
            FrontEnd::Untrained => untrained_forward_with_decay(x, front.decay, self.spec.stride, 1.0)?.values,
            FrontEnd::Conventional => decimate(x, self.spec.stride, self.spec.decimation)?,
        })
    }

    /// Noiseless normalized front-end readouts, `feature_channels × R`.
    pub fn readout(&self, x: &EnvelopeSignal<T>) -> Result<Vec<T>> {
        self.readout_with(&self.front()?, x)
    }

    /// Readouts for many records, in order.
    pub fn readouts(&self, records: &[EnvelopeSignal<T>]) -> Result<Vec<Vec<T>>> {
        let front = self.front()?;
        records.par_iter().map(|x| self.readout_with(&front, x)).collect()
    }

    fn tensor(&self, i: usize) -> &Tensor<T> {
        &self.params[i].tensor
    }

    fn trace(&self, readout: Vec<T>) -> Result<Trace<T>> {
        let c0 = self.spec.feature_channels();
        let r = self.spec.readouts();
        if readout.len() != c0 * r {
            return shape(format!("readout has {} values, expected {c0}x{r}", readout.len()));
        }
        let a0 = if self.spec.applies_relu() { relu(&readout) } else { readout.clone() };
        let a0 = Tensor::from_vec(&[c0, r], a0)?;
        let l = self.layout;
        let z1 = conv1d_forward(&a0, self.tensor(l.conv1), self.tensor(l.conv1 + 1), 1, Padding::Same)?;
        let a1 = Tensor::from_vec(z1.shape(), relu(z1.data()))?;
        let (p1, arg1) = maxpool1d_forward(&a1, POOL_SIZE, 1, Padding::Same)?;
        let z2 = conv1d_forward(&p1, self.tensor(l.conv2), self.tensor(l.conv2 + 1), 1, Padding::Same)?;
        let a2 = Tensor::from_vec(z2.shape(), relu(z2.data()))?;
        let (p2, arg2) = maxpool1d_forward(&a2, POOL_SIZE, 1, Padding::Same)?;
        let h1 = dense_forward(p2.data(), self.tensor(l.fc1), self.tensor(l.fc1 + 1))?;
        let r1 = relu(&h1);
        let h2 = dense_forward(&r1, self.tensor(l.fc2), self.tensor(l.fc2 + 1))?;
        let r2 = relu(&h2);
        let logits = dense_forward(&r2, self.tensor(l.fc3), self.tensor(l.fc3 + 1))?;
        Ok(Trace { readout, a0, z1, arg1, p1, z2, arg2, p2, h1, r1, h2, r2, logits })
    }

    /// Logits from precomputed (possibly noisy) readouts.
    pub fn logits_from_readout(&self, readout: &[T]) -> Result<Vec<T>> {
        Ok(self.trace(readout.to_vec())?.logits)
    }

    pub fn logits(&self, x: &EnvelopeSignal<T>) -> Result<Vec<T>> {
        self.logits_from_readout(&self.readout(x)?)
    }

    pub fn predict_readout(&self, readout: &[T]) -> Result<usize> {
        Ok(argmax(&self.logits_from_readout(readout)?))
    }

    pub fn predict(&self, x: &EnvelopeSignal<T>) -> Result<usize> {
        self.predict_readout(&self.readout(x)?)
    }

    /// Cross-entropy of one record without gradients.
    pub fn loss(&self, x: &EnvelopeSignal<T>) -> Result<T> {
        let logits = self.logits(x)?;
        Ok(softmax_xent(&logits, x.label)?.0)
    }

    /// Loss plus a fingerprint of every activation branch taken.
    pub fn loss_and_pattern(&self, x: &EnvelopeSignal<T>) -> Result<(T, u64)> {
        let trace = self.trace(self.readout(x)?)?;
        let pattern = trace.pattern();
        Ok((softmax_xent(&trace.logits, x.label)?.0, pattern))
    }

    /// Adds one record's gradient to `grads`. `readout` may carry
    /// precomputed features when the front end holds no trainable state.
    fn accumulate(
        &self,
        front: &Front<T>,
        x: &EnvelopeSignal<T>,
        readout: Option<&[T]>,
        grads: &mut Grads<T>,
        scratch: &mut Vec<T>,
    ) -> Result<(T, bool)> {
        let trainable_front = self.layout.pump.is_some() || self.layout.rate.is_some();
        let readout = match readout {
            Some(r) if !trainable_front => r.to_vec(),
            _ => self.readout_with(front, x)?,
        };
        let t = self.trace(readout)?;
        let (loss, g_logits) = softmax_xent(&t.logits, x.label)?;
        let correct = argmax(&t.logits) == x.label;
        let l = self.layout;
        let g = &mut grads.values;

        let (gw, gb) = split_pair(g, l.fc3);
        let mut g_r2 = dense_backward(&t.r2, self.tensor(l.fc3), &g_logits, gw, gb);
        relu_backward(&t.h2, &mut g_r2);
        let (gw, gb) = split_pair(g, l.fc2);
        let mut g_r1 = dense_backward(&t.r1, self.tensor(l.fc2), &g_r2, gw, gb);
        relu_backward(&t.h1, &mut g_r1);
        let (gw, gb) = split_pair(g, l.fc1);
        let g_p2 = dense_backward(t.p2.data(), self.tensor(l.fc1), &g_r1, gw, gb);
        let g_p2 = Tensor::from_vec(t.p2.shape(), g_p2)?;
        let mut g_a2 = maxpool1d_backward(&g_p2, &t.arg2, t.z2.shape());
        relu_backward(t.z2.data(), g_a2.data_mut());
        let (gw, gb) = split_pair(g, l.conv2);
        let g_p1 = conv1d_backward(&t.p1, self.tensor(l.conv2), &g_a2, 1, Padding::Same, gw, gb)?;
        let mut g_a1 = maxpool1d_backward(&g_p1, &t.arg1, t.z1.shape());
        relu_backward(t.z1.data(), g_a1.data_mut());
        let (gw, gb) = split_pair(g, l.conv1);
        let g_a0 = conv1d_backward(&t.a0, self.tensor(l.conv1), &g_a1, 1, Padding::Same, gw, gb)?;

        if trainable_front {
            let mut g_read = g_a0.into_vec();
            if self.spec.applies_relu() {
                relu_backward(&t.readout, &mut g_read);
            }
            if let Some(i) = l.pump {
                let bank = front.bank.as_ref().expect("mirp model has a bank");
                accumulate_pump_grad(&g_read, x, bank, front.decay, &mut g[i], scratch)?;
            }
            if let Some(i) = l.rate {
                let gd = decay_grad(&g_read, x, front.bank.as_ref(), front.decay, self.spec.stride)?;
                let theta = self.tensor(i).data()[0];
                g[i][0] += gd * (-(theta.exp()) * front.decay);
            }
        }
        grads.records += 1;
        Ok((loss, correct))
    }

    /// Summed (unfinished) gradients over `batch`, evaluated in fixed chunks
    /// of [`GRAD_CHUNK`] records and reduced in chunk order.
    pub fn batch_grads(
        &self,
        batch: &[&EnvelopeSignal<T>],
        readouts: Option<&[&[T]]>,
    ) -> Result<(Grads<T>, BatchStats<T>)> {
        if let Some(r) = readouts {
            if r.len() != batch.len() {
                return shape("readout list does not match the batch");
            }
        }
        let front = self.front()?;
        let chunks: Vec<Result<(Grads<T>, T, usize)>> = batch
            .par_chunks(GRAD_CHUNK)
            .enumerate()
            .map(|(ci, chunk)| {
                let mut grads = self.zero_grads();
                let mut scratch = Vec::new();
                let mut loss = T::zero();
                let mut correct = 0;
                for (i, x) in chunk.iter().enumerate() {
                    let r = readouts.map(|r| r[ci * GRAD_CHUNK + i]);
                    let (l, c) = self.accumulate(&front, x, r, &mut grads, &mut scratch)?;
                    loss += l;
                    correct += c as usize;
                }
                Ok((grads, loss, correct))
            })
            .collect();
        let mut total = self.zero_grads();
        let mut stats = BatchStats { loss_sum: T::zero(), correct: 0, records: 0 };
        for chunk in chunks {
            let (g, l, c) = chunk?;
            total.add(&g);
            stats.loss_sum += l;
            stats.correct += c;
        }
        stats.records = total.records;
        Ok((total, stats))
    }

    /// Turns summed gradients into the gradient of the mean loss, including
    /// the bank normalization.
    pub fn finish_grads(&self, grads: &mut Grads<T>) -> Result<()> {
        if grads.finished {
            return Ok(());
        }
        if let Some(i) = self.layout.pump {
            let bank = self.front()?.bank.expect("mirp model has a bank");
            grads.values[i] = pump_grad_through_rms(&bank, &grads.values[i])?;
        }
        if grads.records > 0 {
            let inv = T::lit(1.0 / grads.records as f64);
            for v in grads.values.iter_mut().flatten() {
                *v *= inv;
            }
        }
        grads.finished = true;
        Ok(())
    }

    /// Gradient of the mean loss over `batch`.
    pub fn gradient(&self, batch: &[&EnvelopeSignal<T>]) -> Result<(Grads<T>, BatchStats<T>)> {
        let (mut g, stats) = self.batch_grads(batch, None)?;
        self.finish_grads(&mut g)?;
        Ok((g, stats))
    }

    pub(crate) fn encode_spec(&self) -> Vec<f64> {
        let s = &self.spec;
        vec![
            s.front_end.code() as f64,
            s.channels as f64,
            s.len as f64,
            s.stride as f64,
            s.modes as f64,
            s.classes as f64,
            s.scale as f64,
            s.physical_relu as u8 as f64,
            s.train_linewidth as u8 as f64,
            matches!(s.decimation, Decimation::Boxcar) as u8 as f64,
            self.decay.as_f64(),
        ]
    }

    pub(crate) fn decode_spec(v: &[f64]) -> Result<(ModelSpec, f64)> {
        if v.len() != 11 || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("malformed model spec record".into()));
        }
        let u = |i: usize| v[i] as usize;
        let spec = ModelSpec {
            front_end: FrontEnd::from_code(v[0] as u8)?,
            channels: u(1),
            len: u(2),
            stride: u(3),
            modes: u(4),
            classes: u(5),
            scale: u(6),
            physical_relu: v[7] != 0.0,
            train_linewidth: v[8] != 0.0,
            decimation: if v[9] != 0.0 { Decimation::Boxcar } else { Decimation::Pick },
        };
        Ok((spec, v[10]))
    }
}

fn split_pair<T>(g: &mut [Vec<T>], i: usize) -> (&mut [T], &mut [T]) {
    let (a, b) = g.split_at_mut(i + 1);
    (&mut a[i], &mut b[0])
}
