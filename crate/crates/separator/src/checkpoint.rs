//! Checkpoint container: an 8-byte magic, the header length as a
//! little-endian `u64`, a JSON header, then every parameter as a
//! little-endian `f32` in layout order.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use ambisep_core::{Error, Real, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ModelConfig, ParamSpec};
use crate::model::ModelParams;

pub const MAGIC: &[u8; 8] = b"AMBISEP\x01";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub version: u32,
    pub config: ModelConfig,
    pub seed: u64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Named shapes and offsets of the payload tensors.
    pub tensors: Vec<ParamSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: ModelParams<f32>,
}

impl Checkpoint {
    pub fn new<T: Real>(params: &ModelParams<T>, seed: u64, metrics: BTreeMap<String, f64>) -> Self {
        let params = params.cast::<f32>();
        let header =
            CheckpointHeader { version: FORMAT_VERSION, config: params.config, seed, metrics, tensors: params.layout.entries.clone() };
        Self { header, params }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        let mut payload = Vec::with_capacity(4 * self.params.values.len());
        for v in &self.params.values {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&payload)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Domain("not a separator checkpoint (bad magic)".into()));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len);
        if len > 1 << 30 {
            return Err(Error::Domain(format!("implausible checkpoint header length {len}")));
        }
        let mut header = vec![0u8; len as usize];
        r.read_exact(&mut header)?;
        let header: CheckpointHeader = serde_json::from_slice(&header)?;
        if header.version != FORMAT_VERSION {
            return Err(Error::Domain(format!("unsupported checkpoint version {}", header.version)));
        }
        let params = ModelParams::<f32>::zeros(header.config)?;
        if params.layout.entries != header.tensors {
            return Err(Error::Shape("checkpoint tensor manifest does not match its config".into()));
        }
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() != 4 * params.layout.total {
            return Err(Error::Shape(format!("payload has {} bytes, expected {}", payload.len(), 4 * params.layout.total)));
        }
        let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        let params = ModelParams::from_values(header.config, values)?;
        Ok(Self { header, params })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    #[test]
    fn round_trip_is_bit_exact() {
        let p = ModelParams::<f32>::init(ModelConfig::toy(Mode::Mixed, 2, 8000), 5).unwrap();
        let mut m = BTreeMap::new();
        m.insert("valid_loss".to_string(), 0.25);
        let ck = Checkpoint::new(&p, 5, m);
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ck);
        assert!(back.params.values.iter().zip(&p.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn rejects_corruption() {
        let p = ModelParams::<f32>::init(ModelConfig::toy(Mode::Refinement, 1, 8000), 1).unwrap();
        let mut buf = Vec::new();
        Checkpoint::new(&p, 1, BTreeMap::new()).write_to(&mut buf).unwrap();
        assert!(Checkpoint::read_from(&buf[..buf.len() - 4]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Checkpoint::read_from(bad.as_slice()).is_err());
    }
}
