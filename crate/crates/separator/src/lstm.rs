//! Bidirectional LSTM stack (gate order i, f, g, o) with backpropagation
//! through time. Sequences are time-major: `x[t * dim + j]`.

use ambisep_core::Real;

use crate::ops::sigmoid;

/// Weights of one direction of one layer, borrowed from the flat parameter vector.
pub struct CellWeights<'a, T> {
    pub w_ih: &'a [T],
    pub w_hh: &'a [T],
    pub b: &'a [T],
}

/// Per-step activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct DirCache<T> {
    /// `[i, f, g, o]` per step, `4H` each, in time order.
    gates: Vec<T>,
    /// Cell state per step.
    c: Vec<T>,
    /// Hidden state per step.
    h: Vec<T>,
}

/// Runs one direction over `x` (`len × input`); returns hidden states in time order.
pub fn cell_forward<T: Real>(w: &CellWeights<T>, x: &[T], len: usize, input: usize, hidden: usize, reverse: bool) -> DirCache<T> {
    let h4 = 4 * hidden;
    let mut gates = vec![T::zero(); len * h4];
    let mut c = vec![T::zero(); len * hidden];
    let mut h = vec![T::zero(); len * hidden];
    let mut h_prev = vec![T::zero(); hidden];
    let mut c_prev = vec![T::zero(); hidden];
    let mut z = vec![T::zero(); h4];
    for step in 0..len {
        let t = if reverse { len - 1 - step } else { step };
        let xt = &x[t * input..(t + 1) * input];
        for (r, zr) in z.iter_mut().enumerate() {
            let mut acc = w.b[r];
            let wi = &w.w_ih[r * input..(r + 1) * input];
            for (a, b) in wi.iter().zip(xt) {
                acc += *a * *b;
            }
            let wh = &w.w_hh[r * hidden..(r + 1) * hidden];
            for (a, b) in wh.iter().zip(&h_prev) {
                acc += *a * *b;
            }
            *zr = acc;
        }
        let g = &mut gates[t * h4..(t + 1) * h4];
        for j in 0..hidden {
            let ig = sigmoid(z[j]);
            let fg = sigmoid(z[hidden + j]);
            let gg = z[2 * hidden + j].tanh();
            let og = sigmoid(z[3 * hidden + j]);
            g[j] = ig;
            g[hidden + j] = fg;
            g[2 * hidden + j] = gg;
            g[3 * hidden + j] = og;
            let cv = fg * c_prev[j] + ig * gg;
            c[t * hidden + j] = cv;
            h[t * hidden + j] = og * cv.tanh();
        }
        h_prev.copy_from_slice(&h[t * hidden..(t + 1) * hidden]);
        c_prev.copy_from_slice(&c[t * hidden..(t + 1) * hidden]);
    }
    DirCache { gates, c, h }
}

impl<T: Real> DirCache<T> {
    pub fn hidden_states(&self) -> &[T] {
        &self.h
    }
}

/// Gradient accumulators of one direction.
pub struct CellGrads<'a, T> {
    pub w_ih: &'a mut [T],
    pub w_hh: &'a mut [T],
    pub b: &'a mut [T],
}

/// Backpropagates `gh` (gradient w.r.t. hidden states, time order) and
/// returns the gradient w.r.t. `x`.
#[allow(clippy::too_many_arguments)]
pub fn cell_backward<T: Real>(
    w: &CellWeights<T>,
    cache: &DirCache<T>,
    x: &[T],
    gh: &[T],
    len: usize,
    input: usize,
    hidden: usize,
    reverse: bool,
    grads: &mut CellGrads<T>,
) -> Vec<T> {
    let h4 = 4 * hidden;
    let mut gx = vec![T::zero(); len * input];
    let mut dh_next = vec![T::zero(); hidden];
    let mut dc_next = vec![T::zero(); hidden];
    let mut dz = vec![T::zero(); h4];
    let zero = vec![T::zero(); hidden];
    for step in (0..len).rev() {
        let t = if reverse { len - 1 - step } else { step };
        let prev_t = if step == 0 {
            None
        } else if reverse {
            Some(t + 1)
        } else {
            Some(t - 1)
        };
        let c_prev = prev_t.map_or(&zero[..], |p| &cache.c[p * hidden..(p + 1) * hidden]);
        let h_prev = prev_t.map_or(&zero[..], |p| &cache.h[p * hidden..(p + 1) * hidden]);
        let g = &cache.gates[t * h4..(t + 1) * h4];
        for j in 0..hidden {
            let (ig, fg, gg, og) = (g[j], g[hidden + j], g[2 * hidden + j], g[3 * hidden + j]);
            let ct = cache.c[t * hidden + j];
            let tc = ct.tanh();
            let dh = gh[t * hidden + j] + dh_next[j];
            let d_o = dh * tc;
            let dc = dc_next[j] + dh * og * (T::one() - tc * tc);
            let di = dc * gg;
            let dg = dc * ig;
            let df = dc * c_prev[j];
            dc_next[j] = dc * fg;
            dz[j] = di * ig * (T::one() - ig);
            dz[hidden + j] = df * fg * (T::one() - fg);
            dz[2 * hidden + j] = dg * (T::one() - gg * gg);
            dz[3 * hidden + j] = d_o * og * (T::one() - og);
        }
        let xt = &x[t * input..(t + 1) * input];
        dh_next.iter_mut().for_each(|v| *v = T::zero());
        let gxt = &mut gx[t * input..(t + 1) * input];
        for (r, &d) in dz.iter().enumerate() {
            grads.b[r] += d;
            let gwi = &mut grads.w_ih[r * input..(r + 1) * input];
            let wi = &w.w_ih[r * input..(r + 1) * input];
            for j in 0..input {
                gwi[j] += d * xt[j];
                gxt[j] += d * wi[j];
            }
            let gwh = &mut grads.w_hh[r * hidden..(r + 1) * hidden];
            let wh = &w.w_hh[r * hidden..(r + 1) * hidden];
            for j in 0..hidden {
                gwh[j] += d * h_prev[j];
                dh_next[j] += d * wh[j];
            }
        }
    }
    gx
}
