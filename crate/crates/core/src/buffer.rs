//! Mono and Ambisonics sample buffers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sh::{channel_count, order_from_channels};

/// Single-channel signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoBuffer<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> MonoBuffer<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self { samples: vec![T::zero(); len], sample_rate }
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn energy(&self) -> f64 {
        crate::scalar::energy(&self.samples)
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            (self.energy() / self.samples.len() as f64).sqrt()
        }
    }

    pub fn scaled(&self, gain: T) -> Self {
        Self { samples: self.samples.iter().map(|&x| x * gain).collect(), sample_rate: self.sample_rate }
    }

    pub fn cast<U: Real>(&self) -> MonoBuffer<U> {
        MonoBuffer { samples: self.samples.iter().map(|&x| U::lit(x.to_f64_lossy())).collect(), sample_rate: self.sample_rate }
    }
}

/// Channel normalization of an Ambisonics stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Orthonormal real SH (N3D scaled by 1/√(4π)); all processing happens here.
    #[default]
    Orthonormal,
    /// AmbiX: ACN ordering with SN3D normalization.
    AmbixSn3d,
}

impl Convention {
    /// Factor that converts an orthonormal-convention channel of degree `n` to this convention.
    pub fn gain_from_orthonormal(self, n: usize) -> f64 {
        match self {
            Convention::Orthonormal => 1.0,
            // Y_sn3d = Y_orth · √(4π) / √(2n+1)
            Convention::AmbixSn3d => (4.0 * std::f64::consts::PI / (2 * n + 1) as f64).sqrt(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Orthonormal => "orthonormal",
            Convention::AmbixSn3d => "ambix_sn3d",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "orthonormal" | "n3d_orthonormal" => Ok(Convention::Orthonormal),
            "ambix_sn3d" | "ambix" | "sn3d" => Ok(Convention::AmbixSn3d),
            _ => Err(Error::UnknownConvention(s.to_string())),
        }
    }
}

/// Multichannel SH-domain audio: `(N+1)²` equally long ACN channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicsBuffer<T> {
    order: usize,
    sample_rate: u32,
    convention: Convention,
    channels: Vec<Vec<T>>,
}

impl<T: Real> AmbisonicsBuffer<T> {
    pub fn new(order: usize, sample_rate: u32, convention: Convention, channels: Vec<Vec<T>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample rate must be positive".into()));
        }
        if channels.len() != channel_count(order) {
            return Err(Error::Shape(format!("order {order} needs {} channels, got {}", channel_count(order), channels.len())));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Shape("channels differ in length".into()));
        }
        Ok(Self { order, sample_rate, convention, channels })
    }

    pub fn zeros(order: usize, len: usize, sample_rate: u32) -> Self {
        Self { order, sample_rate, convention: Convention::Orthonormal, channels: vec![vec![T::zero(); len]; channel_count(order)] }
    }

    /// Builds from channel-count and infers the order.
    pub fn from_channels(sample_rate: u32, convention: Convention, channels: Vec<Vec<T>>) -> Result<Self> {
        let order =
            order_from_channels(channels.len()).ok_or_else(|| Error::Shape(format!("{} is not a square channel count", channels.len())))?;
        Self::new(order, sample_rate, convention, channels)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, acn: usize) -> &[T] {
        &self.channels[acn]
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<T>> {
        self.channels
    }

    /// Lower-order view: keeps the first `(order+1)²` channels.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::Shape(format!("cannot truncate order {} to {order}", self.order)));
        }
        Ok(Self {
            order,
            sample_rate: self.sample_rate,
            convention: self.convention,
            channels: self.channels[..channel_count(order)].to_vec(),
        })
    }

    /// Frame `t` across all channels.
    pub fn frame(&self, t: usize) -> Vec<T> {
        self.channels.iter().map(|c| c[t]).collect()
    }

    pub fn peak(&self) -> f64 {
        self.channels.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, x| m.max(x.abs().to_f64_lossy()))
    }

    pub fn scale_in_place(&mut self, gain: T) {
        for c in &mut self.channels {
            for x in c.iter_mut() {
                *x *= gain;
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if other.order != self.order || other.len() != self.len() || other.convention != self.convention {
            return Err(Error::Shape("cannot add Ambisonics buffers of different shape".into()));
        }
        for (a, b) in self.channels.iter_mut().zip(&other.channels) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> AmbisonicsBuffer<U> {
        AmbisonicsBuffer {
            order: self.order,
            sample_rate: self.sample_rate,
            convention: self.convention,
            channels: self.channels.iter().map(|c| c.iter().map(|&x| U::lit(x.to_f64_lossy())).collect()).collect(),
        }
    }

    pub(crate) fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(AmbisonicsBuffer::<f64>::new(1, 16000, Convention::Orthonormal, vec![vec![0.0; 3]; 3]).is_err());
        assert!(AmbisonicsBuffer::<f64>::new(1, 16000, Convention::Orthonormal, vec![vec![0.0; 3], vec![0.0; 2], vec![], vec![]]).is_err());
        assert!(AmbisonicsBuffer::<f64>::new(0, 0, Convention::Orthonormal, vec![vec![0.0]]).is_err());
        assert!(MonoBuffer::new(vec![f64::NAN], 8000).is_err());
        assert!(MonoBuffer::new(vec![0.0f32], 0).is_err());
    }

    #[test]
    fn truncation_keeps_low_order_channels() {
        let chans: Vec<Vec<f64>> = (0..9).map(|c| vec![c as f64; 4]).collect();
        let b = AmbisonicsBuffer::new(2, 8000, Convention::Orthonormal, chans).unwrap();
        let t = b.truncated(1).unwrap();
        assert_eq!(t.channel_count(), 4);
        assert_eq!(t.channel(3), &[3.0; 4]);
        assert!(b.truncated(3).is_err());
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("ambix-sn3d".parse::<Convention>().unwrap(), Convention::AmbixSn3d);
        assert_eq!("orthonormal".parse::<Convention>().unwrap(), Convention::Orthonormal);
        assert!(matches!("fuma".parse::<Convention>(), Err(Error::UnknownConvention(_))));
    }
}
