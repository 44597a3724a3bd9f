//! Building Ambisonics mixtures from mono sources.

use rayon::prelude::*;

use crate::buffer::{AmbisonicsBuffer, Convention, MonoBuffer};
use crate::dsp::multi_convolve;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sh::{acn_to_nm, sh_eval, Direction};

/// Per-source SH-domain room impulse responses.
#[derive(Debug, Clone)]
pub struct ArirSet<T> {
    responses: Vec<AmbisonicsBuffer<T>>,
}

impl<T: Real> ArirSet<T> {
    pub fn new(responses: Vec<AmbisonicsBuffer<T>>) -> Result<Self> {
        let first = responses.first().ok_or_else(|| Error::Empty("ARIR set".into()))?;
        for r in &responses {
            if r.order() != first.order() || r.sample_rate() != first.sample_rate() {
                return Err(Error::Shape("ARIRs must share order and sample rate".into()));
            }
            if r.convention() != Convention::Orthonormal {
                return Err(Error::Shape("ARIRs must use the orthonormal convention".into()));
            }
        }
        Ok(Self { responses })
    }

    pub fn source_count(&self) -> usize {
        self.responses.len()
    }

    pub fn order(&self) -> usize {
        self.responses[0].order()
    }

    pub fn sample_rate(&self) -> u32 {
        self.responses[0].sample_rate()
    }

    pub fn responses(&self) -> &[AmbisonicsBuffer<T>] {
        &self.responses
    }
}

fn check_sources<'a, T: Real, I: Iterator<Item = &'a MonoBuffer<T>>>(mut it: I) -> Result<(usize, u32)> {
    let first = it.next().ok_or_else(|| Error::Empty("source list".into()))?;
    let (len, rate) = (first.len(), first.sample_rate());
    for s in it {
        if s.sample_rate() != rate {
            return Err(Error::SampleRate(rate, s.sample_rate()));
        }
        if s.len() != len {
            return Err(Error::Shape(format!("source lengths differ: {len} vs {}", s.len())));
        }
    }
    Ok((len, rate))
}

/// Instantaneous far-field encoding: `χ(t) = Σ_k s_k(t) y_N(θ_k)`.
pub fn encode_anechoic<T: Real>(sources: &[(MonoBuffer<T>, Direction)], order: usize) -> Result<AmbisonicsBuffer<T>> {
    let (len, rate) = check_sources(sources.iter().map(|(s, _)| s))?;
    let gains: Vec<Vec<T>> = sources.iter().map(|(_, d)| sh_eval::<T>(order, d).map(|y| y.into_coeffs())).collect::<Result<_>>()?;
    let mut out = AmbisonicsBuffer::zeros(order, len, rate);
    out.channels_mut().par_iter_mut().enumerate().for_each(|(c, chan)| {
        for ((src, _), g) in sources.iter().zip(&gains) {
            let g = g[c];
            for (o, &x) in chan.iter_mut().zip(src.samples()) {
                *o += g * x;
            }
        }
    });
    Ok(out)
}

/// Convolutive encoding `χ(t) = Σ_k s_k(t) * h_k(t)`, trimmed to the dry length.
pub fn encode_convolutive<T: Real>(sources: &[MonoBuffer<T>], arirs: &ArirSet<T>) -> Result<AmbisonicsBuffer<T>> {
    let (len, rate) = check_sources(sources.iter())?;
    if sources.len() != arirs.source_count() {
        return Err(Error::Shape(format!("{} sources but {} ARIRs", sources.len(), arirs.source_count())));
    }
    if rate != arirs.sample_rate() {
        return Err(Error::SampleRate(rate, arirs.sample_rate()));
    }
    let order = arirs.order();
    let per_source: Vec<Vec<Vec<T>>> = sources
        .par_iter()
        .zip(arirs.responses().par_iter())
        .map(|(s, h)| {
            let kernels: Vec<&[T]> = h.channels().iter().map(|c| c.as_slice()).collect();
            multi_convolve(s.samples(), &kernels, len)
        })
        .collect();
    let mut out = AmbisonicsBuffer::zeros(order, len, rate);
    for contrib in &per_source {
        for (chan, part) in out.channels_mut().iter_mut().zip(contrib) {
            for (o, &x) in chan.iter_mut().zip(part) {
                *o += x;
            }
        }
    }
    Ok(out)
}

/// Rescales channels between normalization conventions.
pub fn convert_convention<T: Real>(buf: &AmbisonicsBuffer<T>, target: Convention) -> AmbisonicsBuffer<T> {
    if buf.convention() == target {
        return buf.clone();
    }
    let from = buf.convention();
    let mut out = buf.clone().with_convention(target);
    for (c, chan) in out.channels_mut().iter_mut().enumerate() {
        let (n, _) = acn_to_nm(c);
        let g = T::lit(target.gain_from_orthonormal(n) / from.gain_from_orthonormal(n));
        for x in chan.iter_mut() {
            *x *= g;
        }
    }
    out
}
