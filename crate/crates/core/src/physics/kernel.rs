//! The micro-ring as a signal processor.
//!
//! A pump pulse train `W_l[m]` multiplies the RF envelope `X[m]` inside the
//! ring, and the ring's field keeps an exponentially fading memory of the
//! products. With delta-like pump pulses at the bin centres this is the
//! recurrence
//!
//! ```text
//! s[m] = d · s[m-1] + (W[m] / w_rms) · X[m],      d = exp(-Γ Δt / 2)
//! ```
//!
//! read out every `k` bins. Readout `r` (1-based) samples `s[r·k]`, so a map
//! has `⌊M/k⌋` readouts per mode.
//!
//! Feature maps store the *normalized* readout `ỹ = y / a`, where
//! `a = 2·sqrt(β·n_sig)` is the physical amplitude of the homodyne signal in
//! units of the vacuum quadrature noise. The signal term of `ỹ` is therefore
//! independent of the RF power, and the power only enters through the noise
//! added in [`super::noise`].

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::link::snr_conventional;
use super::params::{RingParams, SrParams};
use crate::datasets::EnvelopeSignal;
use crate::error::{domain, shape, Error, Result};
use crate::scalar::Scalar;

/// Programmable pump amplitudes `Ŵ`, one `L × M` block per input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBank<T = f64> {
    channels: usize,
    modes: usize,
    len: usize,
    stride: usize,
    weights: Vec<T>,
}

impl<T: Scalar> WeightBank<T> {
    pub fn from_vec(
        channels: usize,
        modes: usize,
        len: usize,
        stride: usize,
        weights: Vec<T>,
    ) -> Result<Self> {
        if weights.len() != channels * modes * len {
            return shape(format!(
                "weight bank of {channels}x{modes}x{len} needs {} entries, got {}",
                channels * modes * len,
                weights.len()
            ));
        }
        if stride == 0 || stride > len {
            return domain(format!("stride must lie in 1..={len}, got {stride}"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return domain("weight bank entries must be finite");
        }
        Ok(Self { channels, modes, len, stride, weights })
    }

    /// Continuous-wave pump: every entry equal to `value`.
    pub fn constant(channels: usize, modes: usize, len: usize, stride: usize, value: T) -> Result<Self> {
        Self::from_vec(channels, modes, len, stride, vec![value; channels * modes * len])
    }

    /// Gaussian initialization, unit variance.
    pub fn random(
        channels: usize,
        modes: usize,
        len: usize,
        stride: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let weights = (0..channels * modes * len)
            .map(|_| T::lit(StandardNormal.sample(rng)))
            .collect();
        Self::from_vec(channels, modes, len, stride, weights)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn readouts(&self) -> usize {
        self.len / self.stride
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    /// Pulse train of input channel `j`, mode `l`.
    pub fn row(&self, j: usize, l: usize) -> &[T] {
        let start = (j * self.modes + l) * self.len;
        &self.weights[start..start + self.len]
    }

    /// Root-mean-square over every entry of the bank.
    pub fn rms(&self) -> T {
        let n = T::lit(self.weights.len() as f64);
        (self.weights.iter().map(|&w| w * w).sum::<T>() / n).sqrt()
    }

    fn checked_rms(&self) -> Result<T> {
        let rms = self.rms();
        if rms > T::zero() && rms.is_finite() {
            Ok(rms)
        } else {
            Err(Error::DegenerateWeights)
        }
    }
}

/// Readouts of the physical layer: `channels × readouts`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T = f64> {
    pub channels: usize,
    pub readouts: usize,
    /// Normalized readouts `ỹ`.
    pub values: Vec<T>,
    /// Signal amplitude per unit normalized readout: `2·sqrt(β n_sig)` for
    /// homodyne maps, `sqrt(SNR)` of the receiver for conventional maps.
    pub amplitude: f64,
    pub noisy: bool,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn zeros(channels: usize, readouts: usize, amplitude: f64) -> Self {
        Self {
            channels,
            readouts,
            values: vec![T::zero(); channels * readouts],
            amplitude,
            noisy: false,
        }
    }

    pub fn row(&self, c: usize) -> &[T] {
        &self.values[c * self.readouts..(c + 1) * self.readouts]
    }

    /// Readouts in physical units (noise-quadrature units for homodyne maps).
    pub fn physical_values(&self) -> Vec<T> {
        let a = T::lit(self.amplitude);
        self.values.iter().map(|&v| v * a).collect()
    }
}

/// Streaming damped sum of `weights · signal`, read out every `stride` bins.
///
/// `out[r] = inv_norm · Σ_{m ≤ m_r} weights[m]·signal[m]·decay^(m_r − m)` with
/// `m_r = (r+1)·stride − 1` (0-based). `weights = None` means a constant unit pump.
pub fn damped_readout<T: Scalar>(
    signal: &[T],
    weights: Option<&[T]>,
    inv_norm: T,
    decay: T,
    stride: usize,
    out: &mut [T],
) {
    debug_assert!(stride >= 1);
    debug_assert_eq!(out.len(), signal.len() / stride);
    let mut acc = T::zero();
    let mut r = 0;
    let mut next = stride - 1;
    for (m, &x) in signal.iter().enumerate() {
        let p = match weights {
            Some(w) => w[m] * x,
            None => x,
        };
        acc = decay * acc + p;
        if m == next {
            out[r] = acc * inv_norm;
            r += 1;
            if r == out.len() {
                break;
            }
            next += stride;
        }
    }
}

/// Reverse-time companion of [`damped_readout`]:
/// `out[m] = Σ_{r : m_r ≥ m} grad[r]·decay^(m_r − m)`.
pub fn damped_readout_adjoint<T: Scalar>(grad: &[T], decay: T, stride: usize, len: usize, out: &mut [T]) {
    debug_assert_eq!(out.len(), len);
    let mut acc = T::zero();
    let last = grad.len() * stride;
    for m in (0..len).rev() {
        if m >= last {
            out[m] = T::zero();
            continue;
        }
        acc = acc * decay;
        if (m + 1) % stride == 0 {
            acc += grad[(m + 1) / stride - 1];
        }
        out[m] = acc;
    }
}

fn check_signal<T: Scalar>(x: &EnvelopeSignal<T>, channels: usize, len: usize) -> Result<()> {
    if x.channels != channels || x.len() != len {
        return shape(format!(
            "signal is {}x{}, weight bank expects {channels}x{len}",
            x.channels,
            x.len()
        ));
    }
    Ok(())
}

fn homodyne_amplitude(ring: &RingParams, n_sig: f64) -> Result<f64> {
    if !(n_sig >= 0.0) {
        return domain(format!("signal photon number must be >= 0, got {n_sig}"));
    }
    Ok(2.0 * (ring.beta * n_sig).sqrt())
}

/// Noiseless readout of the programmed ring for every input channel and pump
/// mode. Output channel `j·L + l` is mode `l` of input channel `j`.
pub fn mirp_forward<T: Scalar>(
    x: &EnvelopeSignal<T>,
    bank: &WeightBank<T>,
    ring: &RingParams,
    n_sig: f64,
) -> Result<FeatureMap<T>> {
    let amplitude = homodyne_amplitude(ring, n_sig)?;
    mirp_forward_with_decay(x, bank, T::lit(ring.decay()), amplitude)
}

/// [`mirp_forward`] with an explicit per-bin decay factor.
pub fn mirp_forward_with_decay<T: Scalar>(
    x: &EnvelopeSignal<T>,
    bank: &WeightBank<T>,
    decay: T,
    amplitude: f64,
) -> Result<FeatureMap<T>> {
    check_signal(x, bank.channels, bank.len)?;
    let inv_norm = bank.checked_rms()?.recip();
    let r = bank.readouts();
    let mut out = FeatureMap::zeros(bank.channels * bank.modes, r, amplitude);
    for j in 0..bank.channels {
        let xs = x.channel(j);
        for l in 0..bank.modes {
            let c = j * bank.modes + l;
            damped_readout(
                xs,
                Some(bank.row(j, l)),
                inv_norm,
                decay,
                bank.stride,
                &mut out.values[c * r..(c + 1) * r],
            );
        }
    }
    Ok(out)
}

/// CW-pumped ring: one output channel per input channel (all modes would be
/// identical copies).
pub fn untrained_forward<T: Scalar>(
    x: &EnvelopeSignal<T>,
    ring: &RingParams,
    stride: usize,
    n_sig: f64,
) -> Result<FeatureMap<T>> {
    let amplitude = homodyne_amplitude(ring, n_sig)?;
    untrained_forward_with_decay(x, T::lit(ring.decay()), stride, amplitude)
}

pub fn untrained_forward_with_decay<T: Scalar>(
    x: &EnvelopeSignal<T>,
    decay: T,
    stride: usize,
    amplitude: f64,
) -> Result<FeatureMap<T>> {
    let len = x.len();
    if stride == 0 || stride > len {
        return domain(format!("stride must lie in 1..={len}, got {stride}"));
    }
    let r = len / stride;
    let mut out = FeatureMap::zeros(x.channels, r, amplitude);
    for j in 0..x.channels {
        damped_readout(
            x.channel(j),
            None,
            T::one(),
            decay,
            stride,
            &mut out.values[j * r..(j + 1) * r],
        );
    }
    Ok(out)
}

/// How the conventional receiver reduces the envelope to the ADC rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Decimation {
    /// Keep every `k`-th sample.
    #[default]
    Pick,
    /// Average each window of `k` samples.
    Boxcar,
}

/// Conventional receiver digitized at `1/(kΔt)`.
pub fn conventional_forward<T: Scalar>(
    x: &EnvelopeSignal<T>,
    sr: &SrParams,
    p_rf: f64,
    stride: usize,
    decimation: Decimation,
) -> Result<FeatureMap<T>> {
    let values = decimate(x, stride, decimation)?;
    Ok(FeatureMap {
        channels: x.channels,
        readouts: x.len() / stride,
        values,
        amplitude: snr_conventional(p_rf, sr).sqrt(),
        noisy: false,
    })
}

/// Reduces each channel to `⌊M/k⌋` samples, channel-major.
pub fn decimate<T: Scalar>(x: &EnvelopeSignal<T>, stride: usize, decimation: Decimation) -> Result<Vec<T>> {
    let len = x.len();
    if stride == 0 || stride > len {
        return domain(format!("stride must lie in 1..={len}, got {stride}"));
    }
    let r = len / stride;
    let inv_k = T::lit(1.0 / stride as f64);
    let mut out = Vec::with_capacity(x.channels * r);
    for j in 0..x.channels {
        let xs = x.channel(j);
        out.extend((0..r).map(|i| {
            let end = (i + 1) * stride;
            match decimation {
                Decimation::Pick => xs[end - 1],
                Decimation::Boxcar => xs[end - stride..end].iter().copied().sum::<T>() * inv_k,
            }
        }));
    }
    Ok(out)
}

pub fn accumulate_pump_grad<T: Scalar>(
    grad_out: &[T],
    x: &EnvelopeSignal<T>,
    bank: &WeightBank<T>,
    decay: T,
    grad_u: &mut [T],
    scratch: &mut Vec<T>,
) -> Result<()> {
    check_signal(x, bank.channels, bank.len)?;
    let r = bank.readouts();
    if grad_out.len() != bank.channels * bank.modes * r {
        return shape(format!(
            "readout gradient has {} entries, expected {}",
            grad_out.len(),
            bank.channels * bank.modes * r
        ));
    }
    if grad_u.len() != bank.weights.len() {
        return shape("pump gradient buffer does not match the bank");
    }
    scratch.resize(bank.len, T::zero());
    for j in 0..bank.channels {
        let xs = x.channel(j);
        for l in 0..bank.modes {
            let c = j * bank.modes + l;
            damped_readout_adjoint(&grad_out[c * r..(c + 1) * r], decay, bank.stride, bank.len, scratch);
            let g = &mut grad_u[c * bank.len..(c + 1) * bank.len];
            for ((gi, &xi), &si) in g.iter_mut().zip(xs).zip(scratch.iter()) {
                *gi += xi * si;
            }
        }
    }
    Ok(())
}

/// Pulls a gradient with respect to `u = Ŵ / ŵ_rms` back through the RMS
/// normalization: `∂L/∂Ŵ_i = (g_i − u_i·⟨g, u⟩/N) / ŵ_rms`.
pub fn pump_grad_through_rms<T: Scalar>(bank: &WeightBank<T>, grad_u: &[T]) -> Result<Vec<T>> {
    let rms = bank.checked_rms()?;
    let inv = rms.recip();
    let n = T::lit(bank.weights.len() as f64);
    let dot: T = bank.weights.iter().zip(grad_u).map(|(&w, &g)| w * inv * g).sum();
    let coupling = dot / n;
    Ok(bank
        .weights
        .iter()
        .zip(grad_u)
        .map(|(&w, &g)| (g - w * inv * coupling) * inv)
        .collect())
}

/// Exact gradient of a loss with respect to `Ŵ`, given `∂L/∂ỹ` for one record.
pub fn physical_layer_backward<T: Scalar>(
    grad_out: &[T],
    x: &EnvelopeSignal<T>,
    bank: &WeightBank<T>,
    decay: T,
) -> Result<Vec<T>> {
    let mut grad_u = vec![T::zero(); bank.weights.len()];
    let mut scratch = Vec::new();
    accumulate_pump_grad(grad_out, x, bank, decay, &mut grad_u, &mut scratch)?;
    pump_grad_through_rms(bank, &grad_u)
}

/// `∂L/∂d` through the damped kernel, for a trainable linewidth.
///
/// Uses the forward-mode pair `s[m] = d s[m-1] + p[m]`,
/// `t[m] = d t[m-1] + s[m-1]`, where `t = ∂s/∂d`.
pub fn decay_grad<T: Scalar>(
    grad_out: &[T],
    x: &EnvelopeSignal<T>,
    weights: Option<&WeightBank<T>>,
    decay: T,
    stride: usize,
) -> Result<T> {
    let len = x.len();
    let (modes, inv_norm) = match weights {
        Some(b) => {
            check_signal(x, b.channels, b.len)?;
            (b.modes, b.checked_rms()?.recip())
        }
        None => (1, T::one()),
    };
    let r = len / stride;
    if grad_out.len() != x.channels * modes * r {
        return shape("readout gradient does not match the layer output");
    }
    let mut total = T::zero();
    for j in 0..x.channels {
        let xs = x.channel(j);
        for l in 0..modes {
            let c = j * modes + l;
            let g = &grad_out[c * r..(c + 1) * r];
            let w = weights.map(|b| b.row(j, l));
            let (mut s, mut t) = (T::zero(), T::zero());
            for m in 0..r * stride {
                let p = match w {
                    Some(w) => w[m] * xs[m],
                    None => xs[m],
                };
                t = decay * t + s;
                s = decay * s + p;
                if (m + 1) % stride == 0 {
                    total += g[(m + 1) / stride - 1] * t * inv_norm;
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn signal(channels: usize, samples: Vec<f64>) -> EnvelopeSignal<f64> {
        EnvelopeSignal::new(channels, samples, 0)
    }

    /// O(M²) double sum, straight from the definition.
    fn brute_force(x: &[f64], w: &[f64], rms: f64, d: f64, k: usize) -> Vec<f64> {
        (1..=x.len() / k)
            .map(|r| {
                let mr = r * k;
                (1..=mr)
                    .map(|m| w[m - 1] / rms * x[m - 1] * d.powi((mr - m) as i32))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn zero_signal_gives_zero_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bank = WeightBank::<f64>::random(1, 3, 40, 4, &mut rng).unwrap();
        let x = signal(1, vec![0.0; 40]);
        let f = mirp_forward(&x, &bank, &RingParams::default(), 17.0).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert_eq!(f.readouts, 10);
        assert_eq!(f.channels, 3);
    }

    #[test]
    fn infinite_linewidth_samples_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bank = WeightBank::<f64>::random(1, 2, 30, 3, &mut rng).unwrap();
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = signal(1, xs.clone());
        let ring = RingParams { linewidth: f64::INFINITY, ..Default::default() };
        let f = mirp_forward(&x, &bank, &ring, 1.0).unwrap();
        let rms = bank.rms();
        for l in 0..2 {
            for r in 0..10 {
                let m = (r + 1) * 3 - 1;
                let expected = bank.row(0, l)[m] * xs[m] / rms;
                assert!((f.row(l)[r] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn steady_state_of_constant_drive() {
        let bank = WeightBank::<f64>::constant(1, 1, 784, 49, 1.0).unwrap();
        let x = signal(1, vec![1.0; 784]);
        let ring = RingParams::default();
        let n_sig = 17.0;
        let f = mirp_forward(&x, &bank, &ring, n_sig).unwrap();
        let d = (-std::f64::consts::PI).exp();
        assert!((d - 0.04322).abs() < 1e-5);
        let a = 2.0 * (ring.beta * n_sig).sqrt();
        let steady = 1.0 / (1.0 - d);
        assert!((steady - 1.0452).abs() < 1e-4);
        let y = f.physical_values();
        assert!((y[15] - steady * a).abs() < 1e-12 * a);
        let bf = brute_force(&x.samples, bank.weights(), 1.0, d, 49);
        assert!((bf[15] - steady).abs() < 1e-12);
    }

    #[test]
    fn unit_decay_is_prefix_dot_product() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 - 5.0).collect();
        let ws: Vec<f64> = (0..12).map(|i| 1.0 + (i % 3) as f64).collect();
        let bank = WeightBank::from_vec(1, 1, 12, 4, ws.clone()).unwrap();
        let f = mirp_forward_with_decay(&signal(1, xs.clone()), &bank, 1.0, 1.0).unwrap();
        let rms = bank.rms();
        for r in 0..3 {
            let end = (r + 1) * 4;
            let dot: f64 = (0..end).map(|m| ws[m] * xs[m]).sum::<f64>() / rms;
            assert!((f.values[r] - dot).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_mismatched_inputs() {
        let bank = WeightBank::<f64>::constant(1, 2, 10, 2, 0.0).unwrap();
        let x = signal(1, vec![1.0; 10]);
        assert!(matches!(
            mirp_forward(&x, &bank, &RingParams::default(), 1.0),
            Err(Error::DegenerateWeights)
        ));
        let bank = WeightBank::<f64>::constant(1, 2, 10, 2, 1.0).unwrap();
        let x = signal(1, vec![1.0; 12]);
        assert!(matches!(
            mirp_forward(&x, &bank, &RingParams::default(), 1.0),
            Err(Error::Shape(_))
        ));
        assert!(WeightBank::<f64>::constant(1, 1, 10, 11, 1.0).is_err());
        assert!(WeightBank::<f64>::constant(1, 1, 10, 0, 1.0).is_err());
    }

    #[test]
    fn untrained_matches_constant_bank_for_any_level() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let x = signal(1, xs);
        let ring = RingParams { linewidth: std::f64::consts::TAU * 0.3e9, ..Default::default() };
        let u = untrained_forward(&x, &ring, 5, 3.0).unwrap();
        for c in [0.5, 1.0, -3.0] {
            let bank = WeightBank::constant(1, 1, 50, 5, c).unwrap();
            let m = mirp_forward(&x, &bank, &ring, 3.0).unwrap();
            let sign = c.signum();
            for (a, b) in m.values.iter().zip(&u.values) {
                assert!((a - sign * b).abs() < 1e-12);
            }
        }
        let zero = untrained_forward(&signal(1, vec![0.0; 50]), &ring, 5, 3.0).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let ones = untrained_forward(&signal(1, vec![1.0; 784]), &RingParams::default(), 49, 3.0).unwrap();
        assert!((ones.values[10] - 1.0 / (1.0 - (-std::f64::consts::PI).exp())).abs() < 1e-12);
    }

    #[test]
    fn conventional_decimation() {
        let xs: Vec<f64> = (0..784).map(|i| i as f64).collect();
        let x = signal(1, xs.clone());
        let sr = SrParams::default();
        let k1 = conventional_forward(&x, &sr, 1e-12, 1, Decimation::Pick).unwrap();
        assert_eq!(k1.values, xs);
        let k49 = conventional_forward(&x, &sr, 1e-12, 49, Decimation::Pick).unwrap();
        assert_eq!(k49.readouts, 16);
        assert_eq!(k49.values[0], 48.0);
        assert_eq!(k49.values[15], 783.0);
        let boxcar = conventional_forward(&x, &sr, 1e-12, 49, Decimation::Boxcar).unwrap();
        assert!((boxcar.values[0] - 24.0).abs() < 1e-12);
        let z = conventional_forward(&signal(1, vec![0.0; 784]), &sr, 1e-12, 49, Decimation::Pick).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        assert!((k49.amplitude.powi(2) - snr_conventional(1e-12, &sr)).abs() < 1e-15);
    }

    #[test]
    fn adjoint_is_transpose() {
        // <A u, g> == <u, A^T g> for the readout operator A.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let len = 23;
        let k = 4;
        let u: Vec<f64> = (0..len).map(|_| rng.random::<f64>() - 0.5).collect();
        let g: Vec<f64> = (0..len / k).map(|_| rng.random::<f64>() - 0.5).collect();
        let d = 0.7;
        let mut au = vec![0.0; len / k];
        damped_readout(&u, None, 1.0, d, k, &mut au);
        let mut atg = vec![0.0; len];
        damped_readout_adjoint(&g, d, k, len, &mut atg);
        let lhs: f64 = au.iter().zip(&g).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(&atg).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(atg[20..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn f32_kernel_tracks_f64() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bank = WeightBank::<f64>::random(1, 2, 100, 10, &mut rng).unwrap();
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).cos()).collect();
        let f64_map = mirp_forward_with_decay(&signal(1, xs.clone()), &bank, 0.8, 1.0).unwrap();
        let bank32 = WeightBank::<f32>::from_vec(
            1,
            2,
            100,
            10,
            bank.weights().iter().map(|&w| w as f32).collect(),
        )
        .unwrap();
        let x32 = EnvelopeSignal::new(1, xs.iter().map(|&v| v as f32).collect(), 0);
        let f32_map = mirp_forward_with_decay(&x32, &bank32, 0.8f32, 1.0).unwrap();
        for (a, b) in f64_map.values.iter().zip(&f32_map.values) {
            assert!((a - *b as f64).abs() < 1e-4 * (1.0 + a.abs()));
        }
    }
}
