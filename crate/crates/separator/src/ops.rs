//! Layer primitives with hand-written backward passes. Activations are
//! channel-major: `data[c * len + t]`.

use ambisep_core::Real;

use crate::config::{KERNEL, STRIDE};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub channels: usize,
    pub len: usize,
    pub data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(channels: usize, len: usize) -> Self {
        Self { channels, len, data: vec![T::zero(); channels * len] }
    }

    pub fn from_data(channels: usize, len: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), channels * len, "tensor data does not match its shape");
        Self { channels, len, data }
    }

    pub fn row(&self, c: usize) -> &[T] {
        &self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn row_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.channels, self.len), (other.channels, other.len));
        Self::from_data(self.channels, self.len, self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect())
    }
}

/// `extra[o] = Σ_j v[o, j] θ_j`, or zeros without conditioning.
pub fn cond_bias<T: Real>(v: Option<&[T]>, theta: Option<[T; 2]>, out: usize) -> Vec<T> {
    match (v, theta) {
        (Some(v), Some(th)) => (0..out).map(|o| v[2 * o] * th[0] + v[2 * o + 1] * th[1]).collect(),
        _ => vec![T::zero(); out],
    }
}

/// Accumulates `gv[o, j] += gb[o] θ_j`.
pub fn cond_grad<T: Real>(gb: &[T], theta: [T; 2], gv: &mut [T]) {
    for (o, &g) in gb.iter().enumerate() {
        gv[2 * o] += g * theta[0];
        gv[2 * o + 1] += g * theta[1];
    }
}

fn row_sums<T: Real>(t: &Tensor<T>) -> Vec<T> {
    (0..t.channels).map(|c| t.row(c).iter().copied().sum()).collect()
}

/// Strided convolution, weights `(co, ci, K)`.
pub fn conv_forward<T: Real>(x: &Tensor<T>, w: &[T], b: &[T], extra: &[T]) -> Tensor<T> {
    let co = b.len();
    let ci = x.channels;
    let lo = (x.len - KERNEL) / STRIDE + 1;
    let mut y = Tensor::zeros(co, lo);
    for o in 0..co {
        let wo = &w[o * ci * KERNEL..(o + 1) * ci * KERNEL];
        let yo = y.row_mut(o);
        for (t, v) in yo.iter_mut().enumerate() {
            let mut acc = b[o] + extra[o];
            for (i, wk) in wo.chunks_exact(KERNEL).enumerate() {
                let xs = &x.row(i)[STRIDE * t..STRIDE * t + KERNEL];
                for (&a, &c) in wk.iter().zip(xs) {
                    acc += a * c;
                }
            }
            *v = acc;
        }
    }
    y
}

/// Returns `(gx, gb)` and accumulates into `gw`.
pub fn conv_backward<T: Real>(x: &Tensor<T>, w: &[T], gy: &Tensor<T>, gw: &mut [T]) -> (Tensor<T>, Vec<T>) {
    let (co, ci) = (gy.channels, x.channels);
    let mut gx = Tensor::zeros(ci, x.len);
    for o in 0..co {
        let go = gy.row(o);
        for i in 0..ci {
            let xi = x.row(i);
            for k in 0..KERNEL {
                let idx = (o * ci + i) * KERNEL + k;
                let mut acc = T::zero();
                for (t, &g) in go.iter().enumerate() {
                    acc += g * xi[STRIDE * t + k];
                }
                gw[idx] += acc;
                let wk = w[idx];
                let gxi = gx.row_mut(i);
                for (t, &g) in go.iter().enumerate() {
                    gxi[STRIDE * t + k] += g * wk;
                }
            }
        }
    }
    (gx, row_sums(gy))
}

/// 1×1 convolution, weights `(co, ci)`.
pub fn pointwise_forward<T: Real>(x: &Tensor<T>, w: &[T], b: &[T], extra: &[T]) -> Tensor<T> {
    let co = b.len();
    let ci = x.channels;
    let mut y = Tensor::zeros(co, x.len);
    if x.len < 32 {
        // short rows: dot products over a time-major copy
        let mut xt = vec![T::zero(); ci * x.len];
        for i in 0..ci {
            for (t, &v) in x.row(i).iter().enumerate() {
                xt[t * ci + i] = v;
            }
        }
        for o in 0..co {
            let wo = &w[o * ci..(o + 1) * ci];
            for (t, v) in y.row_mut(o).iter_mut().enumerate() {
                let mut acc = b[o] + extra[o];
                for (&a, &c) in wo.iter().zip(&xt[t * ci..(t + 1) * ci]) {
                    acc += a * c;
                }
                *v = acc;
            }
        }
        return y;
    }
    for o in 0..co {
        let yo = y.row_mut(o);
        yo.iter_mut().for_each(|v| *v = b[o] + extra[o]);
        for i in 0..ci {
            let wi = w[o * ci + i];
            for (v, &xv) in yo.iter_mut().zip(x.row(i)) {
                *v += wi * xv;
            }
        }
    }
    y
}

pub fn pointwise_backward<T: Real>(x: &Tensor<T>, w: &[T], gy: &Tensor<T>, gw: &mut [T]) -> (Tensor<T>, Vec<T>) {
    let (co, ci) = (gy.channels, x.channels);
    let mut gx = Tensor::zeros(ci, x.len);
    for o in 0..co {
        let go = gy.row(o);
        for i in 0..ci {
            let mut acc = T::zero();
            for (&g, &xv) in go.iter().zip(x.row(i)) {
                acc += g * xv;
            }
            gw[o * ci + i] += acc;
            let wi = w[o * ci + i];
            for (gv, &g) in gx.row_mut(i).iter_mut().zip(go) {
                *gv += g * wi;
            }
        }
    }
    (gx, row_sums(gy))
}

/// Transposed strided convolution, weights `(ci, co, K)`; output length `(l−1)·S + K`.
pub fn convt_forward<T: Real>(x: &Tensor<T>, w: &[T], b: &[T], extra: &[T]) -> Tensor<T> {
    let co = b.len();
    let ci = x.channels;
    let lo = (x.len - 1) * STRIDE + KERNEL;
    let mut y = Tensor::zeros(co, lo);
    for o in 0..co {
        let yo = y.row_mut(o);
        yo.iter_mut().for_each(|v| *v = b[o] + extra[o]);
        for i in 0..ci {
            let wk = &w[(i * co + o) * KERNEL..(i * co + o + 1) * KERNEL];
            // descending t keeps every output's terms in ascending tap order
            for (t, &xv) in x.row(i).iter().enumerate().rev() {
                for (v, &a) in yo[STRIDE * t..STRIDE * t + KERNEL].iter_mut().zip(wk) {
                    *v += a * xv;
                }
            }
        }
    }
    y
}

pub fn convt_backward<T: Real>(x: &Tensor<T>, w: &[T], gy: &Tensor<T>, gw: &mut [T]) -> (Tensor<T>, Vec<T>) {
    let (co, ci) = (gy.channels, x.channels);
    let mut gx = Tensor::zeros(ci, x.len);
    for o in 0..co {
        let go = gy.row(o);
        for i in 0..ci {
            let xi = x.row(i);
            for k in 0..KERNEL {
                let idx = (i * co + o) * KERNEL + k;
                let mut acc = T::zero();
                for (t, &xv) in xi.iter().enumerate() {
                    acc += xv * go[STRIDE * t + k];
                }
                gw[idx] += acc;
                let wk = w[idx];
                let gxi = gx.row_mut(i);
                for (t, gv) in gxi.iter_mut().enumerate() {
                    *gv += wk * go[STRIDE * t + k];
                }
            }
        }
    }
    (gx, row_sums(gy))
}

pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

pub fn relu_forward<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    Tensor::from_data(x.channels, x.len, x.data.iter().map(|&v| v.max(T::zero())).collect())
}

/// Gradient through ReLU; the derivative at exactly 0 is taken as 0.
pub fn relu_backward<T: Real>(pre: &Tensor<T>, gy: &Tensor<T>) -> Tensor<T> {
    Tensor::from_data(
        pre.channels,
        pre.len,
        pre.data.iter().zip(&gy.data).map(|(&p, &g)| if p > T::zero() { g } else { T::zero() }).collect(),
    )
}

/// Gated linear unit over channels: `a ⊙ σ(b)` with `[a; b] = x`.
pub fn glu_forward<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let c = x.channels / 2;
    assert_eq!(2 * c, x.channels, "GLU needs an even channel count");
    let n = c * x.len;
    let (a, b) = x.data.split_at(n);
    Tensor::from_data(c, x.len, a.iter().zip(b).map(|(&a, &b)| a * sigmoid(b)).collect())
}

pub fn glu_backward<T: Real>(x: &Tensor<T>, gy: &Tensor<T>) -> Tensor<T> {
    let n = gy.data.len();
    let (a, b) = x.data.split_at(n);
    let mut gx = vec![T::zero(); 2 * n];
    for j in 0..n {
        let s = sigmoid(b[j]);
        gx[j] = gy.data[j] * s;
        gx[n + j] = gy.data[j] * a[j] * s * (T::one() - s);
    }
    Tensor::from_data(x.channels, x.len, gx)
}
