//! Parameters and the forward/backward pass of the conditioned
//! encoder–decoder.
//!
//! Encoder level `q`: `h = ReLU(conv_{8,4}(x) + b + V₁θ̄)`,
//! `e = GLU(W·h + b + V₂θ̄)`. Bottleneck: bidirectional LSTM stack and a
//! linear map back to the bottleneck width. Decoder level `q`:
//! `g = GLU(W·(x + e_q) + b + V₁θ̄)`, `y = convT_{8,4}(g) + b + V₂θ̄`, with
//! ReLU on every level except the last, which emits one channel.

use ambisep_core::{Error, Real, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ModelConfig, ParamLayout};
use crate::lstm::{cell_backward, cell_forward, CellGrads, CellWeights, DirCache};
use crate::ops::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub config: ModelConfig,
    pub layout: ParamLayout,
    pub values: Vec<T>,
}

impl<T: Real> ModelParams<T> {
    /// Fan-in scaled uniform initialization `U(−1/√fan_in, 1/√fan_in)`;
    /// biases use the fan-in of their layer's weights.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::for_config(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = config.level_channels(config.depth);
        let mut values = vec![T::zero(); layout.total];
        let mut last_fan = 1;
        for spec in &layout.entries {
            let fan = ParamLayout::fan_in(spec, hidden);
            let fan = if fan == 0 { last_fan } else { fan };
            last_fan = fan;
            let bound = 1.0 / (fan as f64).sqrt();
            for v in &mut values[spec.range()] {
                *v = T::lit(rng.random_range(-bound..=bound));
            }
        }
        Ok(Self { config, layout, values })
    }

    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::for_config(&config);
        let values = vec![T::zero(); layout.total];
        Ok(Self { config, layout, values })
    }

    pub fn from_values(config: ModelConfig, values: Vec<T>) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::for_config(&config);
        if values.len() != layout.total {
            return Err(Error::Shape(format!("config needs {} parameters, got {}", layout.total, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(Self { config, layout, values })
    }

    pub fn get(&self, name: &str) -> &[T] {
        &self.values[self.layout.offset(name)]
    }

    fn opt(&self, name: &str) -> Option<&[T]> {
        self.layout.get(name).map(|s| &self.values[s.range()])
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            config: self.config,
            layout: self.layout.clone(),
            values: self.values.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

struct EncCache<T> {
    x: Tensor<T>,
    pre1: Tensor<T>,
    h: Tensor<T>,
    pre2: Tensor<T>,
}

struct DecCache<T> {
    z: Tensor<T>,
    pre3: Tensor<T>,
    g: Tensor<T>,
    pre4: Tensor<T>,
}

struct LstmCache<T> {
    /// Time-major inputs of each layer.
    inputs: Vec<Vec<T>>,
    dirs: Vec<[DirCache<T>; 2]>,
    /// Time-major output of the last layer (`2H` per step).
    out: Vec<T>,
    steps: usize,
}

/// Activations recorded by [`forward_cached`].
pub struct Cache<T> {
    theta: Option<[T; 2]>,
    pad: usize,
    len: usize,
    enc: Vec<EncCache<T>>,
    lstm: LstmCache<T>,
    dec: Vec<DecCache<T>>,
}

fn to_time_major<T: Real>(x: &Tensor<T>) -> Vec<T> {
    let mut out = vec![T::zero(); x.data.len()];
    for c in 0..x.channels {
        for (t, &v) in x.row(c).iter().enumerate() {
            out[t * x.channels + c] = v;
        }
    }
    out
}

fn to_channel_major<T: Real>(x: &[T], steps: usize, dim: usize) -> Tensor<T> {
    let mut out = Tensor::zeros(dim, steps);
    for t in 0..steps {
        for c in 0..dim {
            out.data[c * steps + t] = x[t * dim + c];
        }
    }
    out
}

fn cell<'a, T>(p: &'a ModelParams<T>, layer: usize, dir: &str) -> CellWeights<'a, T>
where
    T: Real,
{
    CellWeights {
        w_ih: p.get(&format!("lstm{layer}.{dir}.w_ih")),
        w_hh: p.get(&format!("lstm{layer}.{dir}.w_hh")),
        b: p.get(&format!("lstm{layer}.{dir}.b")),
    }
}

fn check_input<T: Real>(p: &ModelParams<T>, tracks: &Tensor<T>, theta: Option<[T; 2]>) -> Result<()> {
    let cfg = &p.config;
    if tracks.channels != cfg.input_channels() {
        return Err(Error::Shape(format!(
            "{} mode expects {} input channels, got {}",
            cfg.mode.as_str(),
            cfg.input_channels(),
            tracks.channels
        )));
    }
    if tracks.len == 0 {
        return Err(Error::Empty("input tracks".into()));
    }
    if cfg.mode.conditioned() != theta.is_some() {
        return Err(Error::Shape(format!(
            "{} mode {} a condition",
            cfg.mode.as_str(),
            if cfg.mode.conditioned() { "needs" } else { "takes no" }
        )));
    }
    Ok(())
}

/// Forward pass keeping every activation for [`backward`].
pub fn forward_cached<T: Real>(p: &ModelParams<T>, tracks: &Tensor<T>, theta: Option<[T; 2]>) -> Result<(Vec<T>, Cache<T>)> {
    check_input(p, tracks, theta)?;
    let cfg = p.config;
    let total = cfg.valid_length(tracks.len);
    let pad = total - tracks.len;
    let mut x = Tensor::zeros(tracks.channels, total);
    for c in 0..tracks.channels {
        x.row_mut(c)[pad..].copy_from_slice(tracks.row(c));
    }

    let mut enc = Vec::with_capacity(cfg.depth);
    for q in 1..=cfg.depth {
        let co = cfg.level_channels(q);
        let e1 = cond_bias(p.opt(&format!("enc{q}.conv.v")), theta, co);
        let pre1 = conv_forward(&x, p.get(&format!("enc{q}.conv.w")), p.get(&format!("enc{q}.conv.b")), &e1);
        let h = relu_forward(&pre1);
        let e2 = cond_bias(p.opt(&format!("enc{q}.glu.v")), theta, 2 * co);
        let pre2 = pointwise_forward(&h, p.get(&format!("enc{q}.glu.w")), p.get(&format!("enc{q}.glu.b")), &e2);
        let out = glu_forward(&pre2);
        enc.push(EncCache { x, pre1, h, pre2 });
        x = out;
    }

    let hidden = cfg.level_channels(cfg.depth);
    let steps = x.len;
    let mut inputs = Vec::with_capacity(cfg.lstm_layers);
    let mut dirs = Vec::with_capacity(cfg.lstm_layers);
    let mut seq = to_time_major(&x);
    for layer in 0..cfg.lstm_layers {
        let dim = if layer == 0 { hidden } else { 2 * hidden };
        let f = cell_forward(&cell(p, layer, "fwd"), &seq, steps, dim, hidden, false);
        let b = cell_forward(&cell(p, layer, "bwd"), &seq, steps, dim, hidden, true);
        let mut next = vec![T::zero(); steps * 2 * hidden];
        for t in 0..steps {
            next[t * 2 * hidden..t * 2 * hidden + hidden].copy_from_slice(&f.hidden_states()[t * hidden..(t + 1) * hidden]);
            next[t * 2 * hidden + hidden..(t + 1) * 2 * hidden].copy_from_slice(&b.hidden_states()[t * hidden..(t + 1) * hidden]);
        }
        inputs.push(seq);
        dirs.push([f, b]);
        seq = next;
    }
    let lstm_out = to_channel_major(&seq, steps, 2 * hidden);
    x = pointwise_forward(&lstm_out, p.get("lstm.linear.w"), p.get("lstm.linear.b"), &vec![T::zero(); hidden]);
    let lstm = LstmCache { inputs, dirs, out: seq, steps };

    let mut dec = Vec::with_capacity(cfg.depth);
    for q in (1..=cfg.depth).rev() {
        let co = cfg.level_channels(q);
        let out_ch = if q == 1 { 1 } else { cfg.level_channels(q - 1) };
        let z = x.add(&glu_output(&enc[q - 1]));
        let e3 = cond_bias(p.opt(&format!("dec{q}.glu.v")), theta, 2 * co);
        let pre3 = pointwise_forward(&z, p.get(&format!("dec{q}.glu.w")), p.get(&format!("dec{q}.glu.b")), &e3);
        let g = glu_forward(&pre3);
        let e4 = cond_bias(p.opt(&format!("dec{q}.convt.v")), theta, out_ch);
        let pre4 = convt_forward(&g, p.get(&format!("dec{q}.convt.w")), p.get(&format!("dec{q}.convt.b")), &e4);
        x = if q == 1 { pre4.clone() } else { relu_forward(&pre4) };
        dec.push(DecCache { z, pre3, g, pre4 });
    }
    let out = x.row(0)[pad..].to_vec();
    Ok((out, Cache { theta, pad, len: tracks.len, enc, lstm, dec }))
}

/// Encoder output of a level, recomputed from its cached pre-activation.
fn glu_output<T: Real>(c: &EncCache<T>) -> Tensor<T> {
    glu_forward(&c.pre2)
}

/// Single-channel estimate for `tracks` under condition `theta`.
pub fn forward<T: Real>(p: &ModelParams<T>, tracks: &Tensor<T>, theta: Option<[T; 2]>) -> Result<Vec<T>> {
    forward_cached(p, tracks, theta).map(|(y, _)| y)
}

/// Parameter gradient of a scalar loss whose gradient w.r.t. the output is `g_out`.
pub fn backward<T: Real>(p: &ModelParams<T>, cache: &Cache<T>, g_out: &[T]) -> Vec<T> {
    let cfg = p.config;
    assert_eq!(g_out.len(), cache.len, "output gradient length");
    let mut grads = vec![T::zero(); p.layout.total];
    let range = |name: &str| p.layout.offset(name);
    let total = cache.len + cache.pad;
    let mut gx = Tensor::zeros(1, total);
    gx.row_mut(0)[cache.pad..].copy_from_slice(g_out);

    let mut skip_grads: Vec<Option<Tensor<T>>> = (0..cfg.depth).map(|_| None).collect();
    for q in 1..=cfg.depth {
        let dc = &cache.dec[cfg.depth - q];
        let g_pre4 = if q == 1 { gx } else { relu_backward(&dc.pre4, &gx) };
        let (g_g, gb4) = convt_backward(&dc.g, p.get(&format!("dec{q}.convt.w")), &g_pre4, &mut grads[range(&format!("dec{q}.convt.w"))]);
        accumulate(&mut grads[range(&format!("dec{q}.convt.b"))], &gb4);
        if let Some(th) = cache.theta {
            cond_grad(&gb4, th, &mut grads[range(&format!("dec{q}.convt.v"))]);
        }
        let g_pre3 = glu_backward(&dc.pre3, &g_g);
        let (g_z, gb3) = pointwise_backward(&dc.z, p.get(&format!("dec{q}.glu.w")), &g_pre3, &mut grads[range(&format!("dec{q}.glu.w"))]);
        accumulate(&mut grads[range(&format!("dec{q}.glu.b"))], &gb3);
        if let Some(th) = cache.theta {
            cond_grad(&gb3, th, &mut grads[range(&format!("dec{q}.glu.v"))]);
        }
        skip_grads[q - 1] = Some(g_z.clone());
        gx = g_z;
    }

    // bottleneck
    let hidden = cfg.level_channels(cfg.depth);
    let lc = &cache.lstm;
    let steps = lc.steps;
    let lstm_out = to_channel_major(&lc.out, steps, 2 * hidden);
    let (g_lstm_out, gbl) = pointwise_backward(&lstm_out, p.get("lstm.linear.w"), &gx, &mut grads[range("lstm.linear.w")]);
    accumulate(&mut grads[range("lstm.linear.b")], &gbl);
    let mut g_seq = to_time_major(&g_lstm_out);
    for layer in (0..cfg.lstm_layers).rev() {
        let dim = if layer == 0 { hidden } else { 2 * hidden };
        let mut gh_f = vec![T::zero(); steps * hidden];
        let mut gh_b = vec![T::zero(); steps * hidden];
        for t in 0..steps {
            gh_f[t * hidden..(t + 1) * hidden].copy_from_slice(&g_seq[t * 2 * hidden..t * 2 * hidden + hidden]);
            gh_b[t * hidden..(t + 1) * hidden].copy_from_slice(&g_seq[t * 2 * hidden + hidden..(t + 1) * 2 * hidden]);
        }
        let input = &lc.inputs[layer];
        let mut g_in = vec![T::zero(); steps * dim];
        for (d, (name, gh, reverse)) in [("fwd", &gh_f, false), ("bwd", &gh_b, true)].into_iter().enumerate() {
            let (r_ih, r_hh, r_b) = (
                range(&format!("lstm{layer}.{name}.w_ih")),
                range(&format!("lstm{layer}.{name}.w_hh")),
                range(&format!("lstm{layer}.{name}.b")),
            );
            let mut gw_ih = vec![T::zero(); r_ih.len()];
            let mut gw_hh = vec![T::zero(); r_hh.len()];
            let mut gb = vec![T::zero(); r_b.len()];
            let gxin = cell_backward(
                &cell(p, layer, name),
                &lc.dirs[layer][d],
                input,
                gh,
                steps,
                dim,
                hidden,
                reverse,
                &mut CellGrads { w_ih: &mut gw_ih, w_hh: &mut gw_hh, b: &mut gb },
            );
            accumulate(&mut grads[r_ih], &gw_ih);
            accumulate(&mut grads[r_hh], &gw_hh);
            accumulate(&mut grads[r_b], &gb);
            accumulate(&mut g_in, &gxin);
        }
        g_seq = g_in;
    }
    let mut gx = to_channel_major(&g_seq, steps, hidden);

    for q in (1..=cfg.depth).rev() {
        let ec = &cache.enc[q - 1];
        let g_e = gx.add(skip_grads[q - 1].as_ref().expect("decoder visited every level"));
        let g_pre2 = glu_backward(&ec.pre2, &g_e);
        let (g_h, gb2) = pointwise_backward(&ec.h, p.get(&format!("enc{q}.glu.w")), &g_pre2, &mut grads[range(&format!("enc{q}.glu.w"))]);
        accumulate(&mut grads[range(&format!("enc{q}.glu.b"))], &gb2);
        if let Some(th) = cache.theta {
            cond_grad(&gb2, th, &mut grads[range(&format!("enc{q}.glu.v"))]);
        }
        let g_pre1 = relu_backward(&ec.pre1, &g_h);
        let (g_x, gb1) = conv_backward(&ec.x, p.get(&format!("enc{q}.conv.w")), &g_pre1, &mut grads[range(&format!("enc{q}.conv.w"))]);
        accumulate(&mut grads[range(&format!("enc{q}.conv.b"))], &gb1);
        if let Some(th) = cache.theta {
            cond_grad(&gb1, th, &mut grads[range(&format!("enc{q}.conv.v"))]);
        }
        gx = g_x;
    }
    grads
}

fn accumulate<T: Real>(dst: &mut [T], src: &[T]) {
    dst.iter_mut().zip(src).for_each(|(d, &s)| *d += s);
}

/// Signs of every ReLU pre-activation; a change between two parameter
/// settings means a finite difference straddles a kink.
pub(crate) fn relu_signature<T: Real>(cache: &Cache<T>) -> Vec<bool> {
    let mut out = Vec::new();
    for e in &cache.enc {
        out.extend(e.pre1.data.iter().map(|&v| v > T::zero()));
    }
    for d in &cache.dec[..cache.dec.len() - 1] {
        out.extend(d.pre4.data.iter().map(|&v| v > T::zero()));
    }
    out
}
