//! Forward and backward passes of the fixed layer set. Sequence tensors are
//! `channels × length`, row-major.

use super::tensor::Tensor;
use crate::error::{shape, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Valid,
    /// Zero padding (−∞ for pooling) so that the output length is
    /// `ceil(len / stride)`.
    Same,
}

fn pads(len: usize, size: usize, stride: usize, padding: Padding) -> (usize, usize) {
    match padding {
        Padding::Valid => (0, if len >= size { (len - size) / stride + 1 } else { 0 }),
        Padding::Same => {
            let out = len.div_ceil(stride);
            let total = ((out - 1) * stride + size).saturating_sub(len);
            (total / 2, out)
        }
    }
}

/// Multi-channel cross-correlation. `weight` is `out × in × size`.
pub fn conv1d_forward<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    stride: usize,
    padding: Padding,
) -> Result<Tensor<T>> {
    let (cin, len) = (input.dim(0), input.dim(1));
    let (cout, wcin, size) = (weight.dim(0), weight.dim(1), weight.dim(2));
    if wcin != cin || bias.len() != cout {
        return shape(format!("conv1d: input has {cin} channels, kernel expects {wcin}; bias {} for {cout}", bias.len()));
    }
    let (pad, out_len) = pads(len, size, stride, padding);
    let mut out = Tensor::zeros(&[cout, out_len]);
    let x = input.data();
    let w = weight.data();
    let o = out.data_mut();
    for co in 0..cout {
        let orow = &mut o[co * out_len..(co + 1) * out_len];
        orow.fill(bias.data()[co]);
        for ci in 0..cin {
            let xrow = &x[ci * len..(ci + 1) * len];
            for kk in 0..size {
                let wv = w[(co * cin + ci) * size + kk];
                if stride == 1 {
                    // output t reads input t + kk - pad
                    let lo = pad.saturating_sub(kk);
                    let hi = (len + pad).saturating_sub(kk).min(out_len);
                    if lo >= hi {
                        continue;
                    }
                    let src = &xrow[lo + kk - pad..hi + kk - pad];
                    for (ov, &xv) in orow[lo..hi].iter_mut().zip(src) {
                        *ov += wv * xv;
                    }
                } else {
                    for (t, ov) in orow.iter_mut().enumerate() {
                        let pos = (t * stride + kk) as isize - pad as isize;
                        if pos >= 0 && (pos as usize) < len {
                            *ov += wv * xrow[pos as usize];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Accumulates kernel and bias gradients and returns `∂L/∂input`.
pub fn conv1d_backward<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    grad_out: &Tensor<T>,
    stride: usize,
    padding: Padding,
    grad_weight: &mut [T],
    grad_bias: &mut [T],
) -> Result<Tensor<T>> {
    let (cin, len) = (input.dim(0), input.dim(1));
    let (cout, _, size) = (weight.dim(0), weight.dim(1), weight.dim(2));
    let (pad, out_len) = pads(len, size, stride, padding);
    if grad_out.shape() != [cout, out_len] {
        return shape(format!("conv1d backward: gradient shape {:?}, expected [{cout}, {out_len}]", grad_out.shape()));
    }
    let x = input.data();
    let w = weight.data();
    let g = grad_out.data();
    let mut grad_in = Tensor::zeros(&[cin, len]);
    let gi = grad_in.data_mut();
    for co in 0..cout {
        let grow = &g[co * out_len..(co + 1) * out_len];
        grad_bias[co] += grow.iter().copied().sum::<T>();
        for ci in 0..cin {
            let xrow = &x[ci * len..(ci + 1) * len];
            let girow = &mut gi[ci * len..(ci + 1) * len];
            for kk in 0..size {
                let widx = (co * cin + ci) * size + kk;
                let wv = w[widx];
                if stride == 1 {
                    let lo = pad.saturating_sub(kk);
                    let hi = (len + pad).saturating_sub(kk).min(out_len);
                    if lo >= hi {
                        continue;
                    }
                    let off = kk as isize - pad as isize;
                    let range = (lo as isize + off) as usize..(hi as isize + off) as usize;
                    let mut acc = T::zero();
                    for ((&gv, &xv), giv) in grow[lo..hi].iter().zip(&xrow[range.clone()]).zip(&mut girow[range]) {
                        acc += gv * xv;
                        *giv += gv * wv;
                    }
                    grad_weight[widx] += acc;
                } else {
                    for (t, &gv) in grow.iter().enumerate() {
                        let pos = (t * stride + kk) as isize - pad as isize;
                        if pos >= 0 && (pos as usize) < len {
                            grad_weight[widx] += gv * xrow[pos as usize];
                            girow[pos as usize] += gv * wv;
                        }
                    }
                }
            }
        }
    }
    Ok(grad_in)
}

/// Windowed maximum per channel. Returns the output and the flat input index
/// of each maximum (first one on ties).
pub fn maxpool1d_forward<T: Scalar>(
    input: &Tensor<T>,
    size: usize,
    stride: usize,
    padding: Padding,
) -> Result<(Tensor<T>, Vec<usize>)> {
    if size == 0 || stride == 0 {
        return Err(Error::Domain("pool size and stride must be >= 1".into()));
    }
    let (c, len) = (input.dim(0), input.dim(1));
    let (pad, out_len) = pads(len, size, stride, padding);
    let mut out = Tensor::zeros(&[c, out_len]);
    let mut arg = vec![0usize; c * out_len];
    let x = input.data();
    for ch in 0..c {
        for t in 0..out_len {
            let start = (t * stride) as isize - pad as isize;
            let mut best = T::neg_infinity();
            let mut best_i = usize::MAX;
            for kk in 0..size as isize {
                let pos = start + kk;
                if pos >= 0 && (pos as usize) < len {
                    let v = x[ch * len + pos as usize];
                    if v > best || best_i == usize::MAX {
                        best = v;
                        best_i = ch * len + pos as usize;
                    }
                }
            }
            out.data_mut()[ch * out_len + t] = best;
            arg[ch * out_len + t] = best_i;
        }
    }
    Ok((out, arg))
}

pub fn maxpool1d_backward<T: Scalar>(grad_out: &Tensor<T>, argmax: &[usize], input_shape: &[usize]) -> Tensor<T> {
    let mut grad_in = Tensor::zeros(input_shape);
    let gi = grad_in.data_mut();
    for (&g, &i) in grad_out.data().iter().zip(argmax) {
        if i != usize::MAX {
            gi[i] += g;
        }
    }
    grad_in
}

/// `weight · x + bias` with `weight` stored `out × in`.
pub fn dense_forward<T: Scalar>(x: &[T], weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Vec<T>> {
    let (out, inp) = (weight.dim(0), weight.dim(1));
    if x.len() != inp || bias.len() != out {
        return shape(format!("dense: input {} / bias {} against weight {out}x{inp}", x.len(), bias.len()));
    }
    let w = weight.data();
    Ok((0..out)
        .map(|o| {
            let row = &w[o * inp..(o + 1) * inp];
            bias.data()[o] + row.iter().zip(x).map(|(&a, &b)| a * b).sum::<T>()
        })
        .collect())
}

pub fn dense_backward<T: Scalar>(
    x: &[T],
    weight: &Tensor<T>,
    grad_out: &[T],
    grad_weight: &mut [T],
    grad_bias: &mut [T],
) -> Vec<T> {
    let (out, inp) = (weight.dim(0), weight.dim(1));
    let w = weight.data();
    let mut grad_in = vec![T::zero(); inp];
    for o in 0..out {
        let g = grad_out[o];
        if g == T::zero() {
            continue;
        }
        grad_bias[o] += g;
        let row = &w[o * inp..(o + 1) * inp];
        let grow = &mut grad_weight[o * inp..(o + 1) * inp];
        for i in 0..inp {
            grow[i] += g * x[i];
            grad_in[i] += g * row[i];
        }
    }
    grad_in
}

pub fn relu<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect()
}

/// Masks `grad` by the sign of the pre-activation `x`.
pub fn relu_backward<T: Scalar>(x: &[T], grad: &mut [T]) {
    for (g, &v) in grad.iter_mut().zip(x) {
        if v <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Cross-entropy of the softmax of `logits` against `label`, with its
/// gradient `softmax − onehot`.
pub fn softmax_xent<T: Scalar>(logits: &[T], label: usize) -> Result<(T, Vec<T>)> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange { label, classes: logits.len() });
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    let grad = logits
        .iter()
        .enumerate()
        .map(|(i, &z)| (z - lse).exp() - if i == label { T::one() } else { T::zero() })
        .collect();
    Ok((lse - logits[label], grad))
}

pub fn argmax<T: Scalar>(x: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}
