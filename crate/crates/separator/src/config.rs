//! Network configuration and parameter layout.

use ambisep_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const KERNEL: usize = 8;
pub const STRIDE: usize = 4;
pub const COND_DIM: usize = 2;

/// Which signals enter the network and whether it is direction-conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Max-rE beam output only, no conditioning.
    Refinement,
    /// All `(N+1)²` channels, conditioned on the target direction.
    Implicit,
    /// First-order channels plus the order-N max-rE beam, conditioned.
    Mixed,
}

impl Mode {
    pub fn conditioned(self) -> bool {
        self != Mode::Refinement
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Refinement => "refinement",
            Mode::Implicit => "implicit",
            Mode::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refinement" => Ok(Mode::Refinement),
            "implicit" => Ok(Mode::Implicit),
            "mixed" => Ok(Mode::Mixed),
            _ => Err(Error::Domain(format!("unknown mode '{s}' (refinement, implicit, mixed)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub mode: Mode,
    pub order: usize,
    /// Number of encoder/decoder levels `L`.
    pub depth: usize,
    /// Channels of the first level `C0`; level `q` has `C0·2^(q-1)`.
    pub channels: usize,
    pub lstm_layers: usize,
    pub sample_rate: u32,
}

impl ModelConfig {
    /// Full-size defaults: six levels, 64 initial channels, two recurrent layers.
    pub fn new(mode: Mode, order: usize, sample_rate: u32) -> Self {
        Self { mode, order, depth: 6, channels: 64, lstm_layers: 2, sample_rate }
    }

    /// Desk-scale preset: three levels, 8 initial channels.
    pub fn toy(mode: Mode, order: usize, sample_rate: u32) -> Self {
        Self { depth: 3, channels: 8, ..Self::new(mode, order, sample_rate) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.channels == 0 || self.lstm_layers == 0 {
            return Err(Error::Domain("depth, channels and recurrent layers must be positive".into()));
        }
        if self.mode == Mode::Mixed && self.order < 1 {
            return Err(Error::Domain("mixed mode needs order >= 1".into()));
        }
        if self.order > ambisep_core::MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: self.order, max: ambisep_core::MAX_ORDER });
        }
        Ok(())
    }

    pub fn input_channels(&self) -> usize {
        match self.mode {
            Mode::Refinement => 1,
            Mode::Implicit => (self.order + 1) * (self.order + 1),
            Mode::Mixed => 5,
        }
    }

    /// Channels at level `q` (1-based); level 0 is the input.
    pub fn level_channels(&self, q: usize) -> usize {
        if q == 0 {
            self.input_channels()
        } else {
            self.channels << (q - 1)
        }
    }

    /// Smallest valid input length `≥ len`: lengths satisfying
    /// `l_{q-1} = STRIDE·l_q + (KERNEL − STRIDE)` down from a bottleneck of `b ≥ 1`.
    pub fn valid_length(&self, len: usize) -> usize {
        let from_bottleneck = |b: usize| (0..self.depth).fold(b, |l, _| STRIDE * l + (KERNEL - STRIDE));
        let mut b = 1;
        while from_bottleneck(b) < len {
            b += 1;
        }
        from_bottleneck(b)
    }

    /// Closed-form parameter count.
    pub fn param_count(&self) -> usize {
        let c = if self.mode.conditioned() { COND_DIM } else { 0 };
        let mut n = 0;
        for q in 1..=self.depth {
            let (ci, co) = (self.level_channels(q - 1), self.level_channels(q));
            // encoder: strided conv, 1×1 conv to 2·co
            n += co * ci * KERNEL + co + co * c;
            n += 2 * co * co + 2 * co + 2 * co * c;
            // decoder: 1×1 conv to 2·co, transposed conv to the level below
            let out = if q == 1 { 1 } else { ci };
            n += 2 * co * co + 2 * co + 2 * co * c;
            n += co * out * KERNEL + out + out * c;
        }
        let h = self.level_channels(self.depth);
        for layer in 0..self.lstm_layers {
            let input = if layer == 0 { h } else { 2 * h };
            n += 2 * (4 * h * input + 4 * h * h + 4 * h);
        }
        n + h * 2 * h + h
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Named tensors laid out in one flat vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub entries: Vec<ParamSpec>,
    pub total: usize,
}

impl ParamLayout {
    pub fn for_config(cfg: &ModelConfig) -> Self {
        let mut entries = Vec::new();
        let mut total = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let len: usize = shape.iter().product();
            entries.push(ParamSpec { name, shape, offset: total });
            total += len;
        };
        let cond = cfg.mode.conditioned();
        for q in 1..=cfg.depth {
            let (ci, co) = (cfg.level_channels(q - 1), cfg.level_channels(q));
            push(format!("enc{q}.conv.w"), vec![co, ci, KERNEL]);
            push(format!("enc{q}.conv.b"), vec![co]);
            if cond {
                push(format!("enc{q}.conv.v"), vec![co, COND_DIM]);
            }
            push(format!("enc{q}.glu.w"), vec![2 * co, co]);
            push(format!("enc{q}.glu.b"), vec![2 * co]);
            if cond {
                push(format!("enc{q}.glu.v"), vec![2 * co, COND_DIM]);
            }
        }
        let h = cfg.level_channels(cfg.depth);
        for layer in 0..cfg.lstm_layers {
            let input = if layer == 0 { h } else { 2 * h };
            for dir in ["fwd", "bwd"] {
                push(format!("lstm{layer}.{dir}.w_ih"), vec![4 * h, input]);
                push(format!("lstm{layer}.{dir}.w_hh"), vec![4 * h, h]);
                push(format!("lstm{layer}.{dir}.b"), vec![4 * h]);
            }
        }
        push("lstm.linear.w".into(), vec![h, 2 * h]);
        push("lstm.linear.b".into(), vec![h]);
        for q in (1..=cfg.depth).rev() {
            let (ci, co) = (cfg.level_channels(q - 1), cfg.level_channels(q));
            let out = if q == 1 { 1 } else { ci };
            push(format!("dec{q}.glu.w"), vec![2 * co, co]);
            push(format!("dec{q}.glu.b"), vec![2 * co]);
            if cond {
                push(format!("dec{q}.glu.v"), vec![2 * co, COND_DIM]);
            }
            push(format!("dec{q}.convt.w"), vec![co, out, KERNEL]);
            push(format!("dec{q}.convt.b"), vec![out]);
            if cond {
                push(format!("dec{q}.convt.v"), vec![out, COND_DIM]);
            }
        }
        Self { entries, total }
    }

    pub fn get(&self, name: &str) -> Option<&ParamSpec> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Offset of a tensor that must exist.
    pub fn offset(&self, name: &str) -> std::ops::Range<usize> {
        self.get(name).unwrap_or_else(|| panic!("no parameter '{name}'")).range()
    }

    /// Fan-in used for initialization.
    pub fn fan_in(spec: &ParamSpec, hidden: usize) -> usize {
        if spec.name.starts_with("lstm") && !spec.name.starts_with("lstm.linear") {
            return hidden;
        }
        if spec.name.ends_with(".b") {
            return 0;
        }
        match spec.shape.as_slice() {
            [ci, _, k] if spec.name.ends_with("convt.w") => ci * k / STRIDE,
            [_, ci, k] => ci * k,
            [_, i] => *i,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_channels_per_mode() {
        assert_eq!(ModelConfig::new(Mode::Refinement, 4, 16000).input_channels(), 1);
        assert_eq!(ModelConfig::new(Mode::Implicit, 4, 16000).input_channels(), 25);
        assert_eq!(ModelConfig::new(Mode::Mixed, 4, 16000).input_channels(), 5);
    }

    #[test]
    fn layout_matches_closed_form_count() {
        for mode in [Mode::Refinement, Mode::Implicit, Mode::Mixed] {
            for depth in 1..=6 {
                let cfg = ModelConfig { depth, channels: 4, ..ModelConfig::new(mode, 2, 8000) };
                let layout = ParamLayout::for_config(&cfg);
                assert_eq!(layout.total, cfg.param_count());
                assert_eq!(layout.entries.iter().map(|e| e.len()).sum::<usize>(), layout.total);
            }
        }
        let r = ParamLayout::for_config(&ModelConfig::toy(Mode::Refinement, 1, 8000));
        assert!(r.entries.iter().all(|e| !e.name.ends_with(".v")));
    }

    #[test]
    fn valid_lengths() {
        let cfg = ModelConfig { depth: 2, ..ModelConfig::toy(Mode::Implicit, 1, 8000) };
        assert_eq!(cfg.valid_length(1), 36);
        assert_eq!(cfg.valid_length(256), 260);
        assert_eq!(cfg.valid_length(260), 260);
        let deep = ModelConfig::new(Mode::Implicit, 1, 16000);
        for len in [16000, 96000] {
            let v = deep.valid_length(len);
            assert!(v >= len);
            let mut l = v;
            for _ in 0..deep.depth {
                assert_eq!((l - KERNEL) % STRIDE, 0);
                l = (l - KERNEL) / STRIDE + 1;
            }
            assert!(l >= 1);
        }
    }
}
