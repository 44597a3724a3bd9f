//! 32-bit float WAV I/O. Ambisonics files carry a JSON sidecar recording
//! order, normalization and channel ordering.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::buffer::{AmbisonicsBuffer, Convention, MonoBuffer};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sh::order_from_channels;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiSidecar {
    pub order: usize,
    pub convention: String,
    pub channel_ordering: String,
    pub sample_rate: u32,
}

/// `foo.wav` → `foo.wav.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn spec(channels: usize, sample_rate: u32) -> hound::WavSpec {
    hound::WavSpec { channels: channels as u16, sample_rate, bits_per_sample: 32, sample_format: hound::SampleFormat::Float }
}

fn read_interleaved(path: &Path) -> Result<(Vec<Vec<f32>>, u32)> {
    let mut reader = hound::WavReader::open(path)?;
    let s = reader.spec();
    let nch = s.channels as usize;
    let raw: Vec<f32> = match s.sample_format {
        hound::SampleFormat::Float => reader.samples::<f32>().collect::<Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (s.bits_per_sample - 1)) as f32;
            reader.samples::<i32>().map(|x| x.map(|v| v as f32 * scale)).collect::<Result<_, _>>()?
        }
    };
    let mut chans = vec![Vec::with_capacity(raw.len() / nch.max(1)); nch];
    for (i, v) in raw.into_iter().enumerate() {
        chans[i % nch].push(v);
    }
    Ok((chans, s.sample_rate))
}

fn write_interleaved<T: Real>(path: &Path, channels: &[&[T]], sample_rate: u32) -> Result<()> {
    let mut w = hound::WavWriter::create(path, spec(channels.len(), sample_rate))?;
    let len = channels.first().map_or(0, |c| c.len());
    for t in 0..len {
        for c in channels {
            w.write_sample(c[t].to_f64_lossy() as f32)?;
        }
    }
    w.finalize()?;
    Ok(())
}

pub fn read_mono<T: Real>(path: &Path) -> Result<MonoBuffer<T>> {
    let (chans, sr) = read_interleaved(path)?;
    if chans.len() != 1 {
        return Err(Error::Shape(format!("{} has {} channels, expected mono", path.display(), chans.len())));
    }
    MonoBuffer::new(chans[0].iter().map(|&x| T::lit(x as f64)).collect(), sr)
}

pub fn write_mono<T: Real>(path: &Path, buf: &MonoBuffer<T>) -> Result<()> {
    write_interleaved(path, &[buf.samples()], buf.sample_rate())
}

/// Reads an Ambisonics WAV. Without a sidecar the order is inferred from the
/// channel count and `fallback` supplies the convention.
pub fn read_ambisonics<T: Real>(path: &Path, fallback: Convention) -> Result<AmbisonicsBuffer<T>> {
    let (chans, sr) = read_interleaved(path)?;
    let sc = sidecar_path(path);
    let convention = if sc.exists() {
        let meta: AmbiSidecar = serde_json::from_slice(&fs::read(&sc)?)?;
        if meta.channel_ordering != "acn" {
            return Err(Error::Domain(format!("unsupported channel ordering '{}'", meta.channel_ordering)));
        }
        if order_from_channels(chans.len()) != Some(meta.order) {
            return Err(Error::Shape(format!("sidecar says order {} but file has {} channels", meta.order, chans.len())));
        }
        meta.convention.parse()?
    } else {
        fallback
    };
    let channels = chans.into_iter().map(|c| c.into_iter().map(|x| T::lit(x as f64)).collect()).collect();
    AmbisonicsBuffer::from_channels(sr, convention, channels)
}

pub fn write_ambisonics<T: Real>(path: &Path, buf: &AmbisonicsBuffer<T>) -> Result<()> {
    let refs: Vec<&[T]> = buf.channels().iter().map(|c| c.as_slice()).collect();
    write_interleaved(path, &refs, buf.sample_rate())?;
    let meta = AmbiSidecar {
        order: buf.order(),
        convention: buf.convention().as_str().into(),
        channel_ordering: "acn".into(),
        sample_rate: buf.sample_rate(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mono_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let b = MonoBuffer::new(vec![0.0f64, 0.5, -0.25, 1e-3], 8000).unwrap();
        write_mono(&p, &b).unwrap();
        let r: MonoBuffer<f64> = read_mono(&p).unwrap();
        assert_eq!(r.sample_rate(), 8000);
        assert_eq!(r.samples(), b.samples().iter().map(|&x| x as f32 as f64).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn ambisonics_round_trip_keeps_convention() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.wav");
        let chans: Vec<Vec<f32>> = (0..9).map(|c| vec![c as f32 * 0.1; 5]).collect();
        let b = AmbisonicsBuffer::new(2, 16000, Convention::AmbixSn3d, chans).unwrap();
        write_ambisonics(&p, &b).unwrap();
        let r: AmbisonicsBuffer<f32> = read_ambisonics(&p, Convention::Orthonormal).unwrap();
        assert_eq!(r, b);
        fs::remove_file(sidecar_path(&p)).unwrap();
        let r: AmbisonicsBuffer<f32> = read_ambisonics(&p, Convention::Orthonormal).unwrap();
        assert_eq!(r.convention(), Convention::Orthonormal);
    }

    #[test]
    fn mono_reader_rejects_multichannel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        write_ambisonics(&p, &AmbisonicsBuffer::<f32>::zeros(1, 3, 8000)).unwrap();
        assert!(read_mono::<f32>(&p).is_err());
    }
}
