//! Linear convolution (direct and FFT overlap-add).

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

/// Kernels at or below this length are convolved directly.
pub const DIRECT_KERNEL_MAX: usize = 128;

/// Full linear convolution by direct summation, length `x.len() + h.len() - 1`.
pub fn convolve_direct<T: Real>(x: &[T], h: &[T]) -> Vec<T> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![T::zero(); x.len() + h.len() - 1];
    for (j, &hj) in h.iter().enumerate() {
        if hj == T::zero() {
            continue;
        }
        for (yi, &xi) in y[j..j + x.len()].iter_mut().zip(x) {
            *yi += xi * hj;
        }
    }
    y
}

/// Full linear convolution by FFT overlap-add.
pub fn convolve_fft<T: Real>(x: &[T], h: &[T]) -> Vec<T> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let full = x.len() + h.len() - 1;
    multi_convolve_fft(x, &[h], full).pop().unwrap()
}

/// Full linear convolution, picking the method by kernel length.
pub fn convolve<T: Real>(x: &[T], h: &[T]) -> Vec<T> {
    if h.len() <= DIRECT_KERNEL_MAX {
        convolve_direct(x, h)
    } else {
        convolve_fft(x, h)
    }
}

/// Convolves one signal with several kernels of equal length, sharing the
/// signal spectrum. Each output is the full convolution truncated to `out_len`.
pub fn multi_convolve<T: Real>(x: &[T], kernels: &[&[T]], out_len: usize) -> Vec<Vec<T>> {
    let klen = kernels.iter().map(|k| k.len()).max().unwrap_or(0);
    if klen <= DIRECT_KERNEL_MAX {
        kernels
            .iter()
            .map(|k| {
                let mut y = convolve_direct(x, k);
                y.resize(out_len, T::zero());
                y
            })
            .collect()
    } else {
        multi_convolve_fft(x, kernels, out_len)
    }
}

fn multi_convolve_fft<T: Real>(x: &[T], kernels: &[&[T]], out_len: usize) -> Vec<Vec<T>> {
    let klen = kernels.iter().map(|k| k.len()).max().unwrap_or(1).max(1);
    let fft_len = (2 * klen).next_power_of_two().max(256);
    let block = fft_len - klen + 1;
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);
    let scale = T::one() / T::from_len(fft_len);

    let spectra: Vec<Vec<Complex<T>>> = kernels
        .iter()
        .map(|k| {
            let mut buf: Vec<Complex<T>> =
                (0..fft_len).map(|i| Complex::new(k.get(i).copied().unwrap_or_else(T::zero), T::zero())).collect();
            fwd.process(&mut buf);
            buf
        })
        .collect();

    let mut outs = vec![vec![T::zero(); out_len]; kernels.len()];
    let mut xbuf = vec![Complex::new(T::zero(), T::zero()); fft_len];
    let mut ybuf = xbuf.clone();
    let mut start = 0;
    while start < x.len() && start < out_len {
        let end = (start + block).min(x.len());
        for (i, v) in xbuf.iter_mut().enumerate() {
            let s = start + i;
            *v = Complex::new(if s < end { x[s] } else { T::zero() }, T::zero());
        }
        fwd.process(&mut xbuf);
        for (spec, out) in spectra.iter().zip(outs.iter_mut()) {
            for ((y, a), b) in ybuf.iter_mut().zip(&xbuf).zip(spec) {
                *y = *a * *b;
            }
            inv.process(&mut ybuf);
            let stop = (start + fft_len).min(out_len);
            for (o, y) in out[start..stop].iter_mut().zip(&ybuf) {
                *o += y.re * scale;
            }
        }
        start += block;
    }
    outs
}
