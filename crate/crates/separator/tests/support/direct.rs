//! Direct-summation re-implementation of the network equations, written
//! with nested per-element loops and no shared code, used as an oracle for
//! the optimized forward pass.

use ambisep_separator::{forward, Mode, ModelConfig, ModelParams, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Mat = Vec<Vec<f64>>;

struct Ref<'a> {
    p: &'a ModelParams<f64>,
    theta: Option<[f64; 2]>,
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Ref<'_> {
    fn w(&self, name: &str) -> (&[f64], &[usize]) {
        let s = self.p.layout.get(name).unwrap();
        (&self.p.values[s.offset..s.offset + s.shape.iter().product::<usize>()], &s.shape)
    }

    fn cond(&self, name: &str, o: usize) -> f64 {
        match (self.p.layout.get(name), self.theta) {
            (Some(_), Some(th)) => {
                let (v, _) = self.w(name);
                v[o * 2] * th[0] + v[o * 2 + 1] * th[1]
            }
            _ => 0.0,
        }
    }

    fn conv(&self, x: &Mat, level: &str) -> Mat {
        let (w, sh) = self.w(&format!("{level}.w"));
        let (b, _) = self.w(&format!("{level}.b"));
        let (co, ci, k) = (sh[0], sh[1], sh[2]);
        let lo = (x[0].len() - k) / 4 + 1;
        let mut y = vec![vec![0.0; lo]; co];
        for o in 0..co {
            for t in 0..lo {
                let mut s = b[o] + self.cond(&format!("{level}.v"), o);
                for i in 0..ci {
                    for kk in 0..k {
                        s += w[o * ci * k + i * k + kk] * x[i][4 * t + kk];
                    }
                }
                y[o][t] = s;
            }
        }
        y
    }

    fn convt(&self, x: &Mat, level: &str) -> Mat {
        let (w, sh) = self.w(&format!("{level}.w"));
        let (b, _) = self.w(&format!("{level}.b"));
        let (ci, co, k) = (sh[0], sh[1], sh[2]);
        let lo = (x[0].len() - 1) * 4 + k;
        let mut y = vec![vec![0.0; lo]; co];
        for o in 0..co {
            for u in 0..lo {
                let mut s = b[o] + self.cond(&format!("{level}.v"), o);
                for i in 0..ci {
                    for (t, xv) in x[i].iter().enumerate() {
                        if u >= 4 * t && u - 4 * t < k {
                            s += w[i * co * k + o * k + (u - 4 * t)] * xv;
                        }
                    }
                }
                y[o][u] = s;
            }
        }
        y
    }

    fn glu_block(&self, x: &Mat, level: &str) -> Mat {
        let (w, sh) = self.w(&format!("{level}.w"));
        let (b, _) = self.w(&format!("{level}.b"));
        let (c2, ci) = (sh[0], sh[1]);
        let c = c2 / 2;
        let len = x[0].len();
        let lin = |o: usize, t: usize| -> f64 {
            let mut s = b[o] + self.cond(&format!("{level}.v"), o);
            for i in 0..ci {
                s += w[o * ci + i] * x[i][t];
            }
            s
        };
        (0..c).map(|o| (0..len).map(|t| lin(o, t) * sig(lin(o + c, t))).collect()).collect()
    }

    fn lstm_dir(&self, x: &Mat, name: &str, reverse: bool) -> Mat {
        let (wi, shi) = self.w(&format!("{name}.w_ih"));
        let (wh, _) = self.w(&format!("{name}.w_hh"));
        let (b, _) = self.w(&format!("{name}.b"));
        let h4 = shi[0];
        let hd = h4 / 4;
        let din = shi[1];
        let steps = x[0].len();
        let mut out = vec![vec![0.0; steps]; hd];
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let order: Vec<usize> = if reverse { (0..steps).rev().collect() } else { (0..steps).collect() };
        for t in order {
            let z: Vec<f64> = (0..h4)
                .map(|r| {
                    b[r] + (0..din).map(|j| wi[r * din + j] * x[j][t]).sum::<f64>() + (0..hd).map(|j| wh[r * hd + j] * h[j]).sum::<f64>()
                })
                .collect();
            for j in 0..hd {
                c[j] = sig(z[hd + j]) * c[j] + sig(z[j]) * z[2 * hd + j].tanh();
                h[j] = sig(z[3 * hd + j]) * c[j].tanh();
                out[j][t] = h[j];
            }
        }
        out
    }

    fn run(&self, tracks: &Mat) -> Vec<f64> {
        let cfg = self.p.config;
        let len = tracks[0].len();
        let valid = |l: usize| {
            let mut l = l;
            for _ in 0..cfg.depth {
                if l < 8 || !(l - 8).is_multiple_of(4) {
                    return false;
                }
                l = (l - 8) / 4 + 1;
            }
            true
        };
        let total = (len..).find(|&l| valid(l)).unwrap();
        let pad = total - len;
        let mut x: Mat = tracks.iter().map(|r| std::iter::repeat_n(0.0, pad).chain(r.iter().copied()).collect()).collect();
        let mut skips = Vec::new();
        for q in 1..=cfg.depth {
            let h: Mat = self.conv(&x, &format!("enc{q}.conv")).into_iter().map(|r| r.into_iter().map(|v| v.max(0.0)).collect()).collect();
            x = self.glu_block(&h, &format!("enc{q}.glu"));
            skips.push(x.clone());
        }
        for l in 0..cfg.lstm_layers {
            let f = self.lstm_dir(&x, &format!("lstm{l}.fwd"), false);
            let b = self.lstm_dir(&x, &format!("lstm{l}.bwd"), true);
            x = f.into_iter().chain(b).collect();
        }
        let (w, sh) = self.w("lstm.linear.w");
        let (b, _) = self.w("lstm.linear.b");
        x = (0..sh[0])
            .map(|o| (0..x[0].len()).map(|t| b[o] + (0..sh[1]).map(|i| w[o * sh[1] + i] * x[i][t]).sum::<f64>()).collect())
            .collect();
        for q in (1..=cfg.depth).rev() {
            let s = &skips[q - 1];
            let z: Mat = x.iter().zip(s).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v).collect()).collect();
            let g = self.glu_block(&z, &format!("dec{q}.glu"));
            x = self.convt(&g, &format!("dec{q}.convt"));
            if q > 1 {
                x = x.into_iter().map(|r| r.into_iter().map(|v| v.max(0.0)).collect()).collect();
            }
        }
        assert_eq!(x.len(), 1);
        x[0][pad..].to_vec()
    }
}

/// Largest deviation of the optimized forward pass from the reference,
/// relative to the peak reference output.
pub fn check(mode: Mode, depth: usize, channels: usize, len: usize, seed: u64) -> f64 {
    let cfg = ModelConfig { depth, channels, ..ModelConfig::toy(mode, 2, 8000) };
    let p = ModelParams::<f64>::init(cfg, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let c = cfg.input_channels();
    let rows: Mat = (0..c).map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let theta = mode.conditioned().then(|| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
    let expected = Ref { p: &p, theta }.run(&rows);
    let got = forward(&p, &Tensor::from_data(c, len, rows.concat()), theta).unwrap();
    assert_eq!(got.len(), len);
    let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(scale > 1e-3, "degenerate reference output");
    got.iter().zip(&expected).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
}
