//! Stem corpus: mono WAV files indexed by a JSON document.
//!
//! Layout convention for [`StemCorpus::scan`]: `<root>/<split>/<group>/<name>.wav`.
//! Stems sharing a group come from the same recording (same song).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use ambisep_core::wav::read_mono;
use ambisep_core::{Error, MonoBuffer, Result};
use serde::{Deserialize, Serialize};

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(Error::Domain(format!("unknown split '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StemEntry {
    pub id: String,
    /// Relative to the corpus root.
    pub path: PathBuf,
    /// Length in samples.
    pub samples: usize,
    pub sample_rate: u32,
    pub split: Split,
    pub group: String,
}

impl StemEntry {
    pub fn duration(&self) -> f64 {
        self.samples as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Index {
    sample_rate: u32,
    entries: Vec<StemEntry>,
}

#[derive(Debug)]
pub struct StemCorpus {
    root: PathBuf,
    sample_rate: u32,
    entries: Vec<StemEntry>,
    by_id: HashMap<String, usize>,
    cache: Mutex<HashMap<String, Arc<Vec<f32>>>>,
}

impl StemCorpus {
    pub fn new(root: impl Into<PathBuf>, entries: Vec<StemEntry>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::Empty("corpus has no stems".into()))?;
        let sample_rate = first.sample_rate;
        if let Some(e) = entries.iter().find(|e| e.sample_rate != sample_rate) {
            return Err(Error::SampleRate(sample_rate, e.sample_rate));
        }
        let mut by_id = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if by_id.insert(e.id.clone(), i).is_some() {
                return Err(Error::Domain(format!("duplicate stem id '{}'", e.id)));
            }
        }
        Ok(Self { root: root.into(), sample_rate, entries, by_id, cache: Mutex::new(HashMap::new()) })
    }

    /// Reads `<root>/index.json`.
    pub fn load(root: &Path) -> Result<Self> {
        let index: Index = serde_json::from_slice(&fs::read(root.join(INDEX_FILE))?)?;
        let corpus = Self::new(root, index.entries)?;
        if corpus.sample_rate != index.sample_rate {
            return Err(Error::SampleRate(index.sample_rate, corpus.sample_rate));
        }
        Ok(corpus)
    }

    /// Discovers `<root>/<split>/<group>/<name>.wav` files.
    pub fn scan(root: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for split in Split::ALL {
            let dir = root.join(split.as_str());
            if !dir.is_dir() {
                continue;
            }
            for group in sorted_dir(&dir)? {
                if !group.is_dir() {
                    continue;
                }
                let gname = file_name(&group);
                for file in sorted_dir(&group)? {
                    if file.extension().and_then(|e| e.to_str()) != Some("wav") {
                        continue;
                    }
                    let reader = ambisep_core::wav::read_mono::<f32>(&file)?;
                    let rel = file.strip_prefix(root).expect("inside root").to_path_buf();
                    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                    entries.push(StemEntry {
                        id: format!("{split}/{gname}/{stem}"),
                        path: rel,
                        samples: reader.len(),
                        sample_rate: reader.sample_rate(),
                        split,
                        group: gname.clone(),
                    });
                }
            }
        }
        Self::new(root, entries)
    }

    pub fn save_index(&self) -> Result<()> {
        let index = Index { sample_rate: self.sample_rate, entries: self.entries.clone() };
        fs::write(self.root.join(INDEX_FILE), serde_json::to_string_pretty(&index)? + "\n")?;
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn entries(&self) -> &[StemEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&StemEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i]).ok_or_else(|| Error::Domain(format!("unknown stem '{id}'")))
    }

    /// Entries of one split at least `min_samples` long.
    pub fn split_entries(&self, split: Split, min_samples: usize) -> Vec<&StemEntry> {
        self.entries.iter().filter(|e| e.split == split && e.samples >= min_samples).collect()
    }

    /// Groups of one split, each with its eligible entries (sorted by id).
    pub fn groups(&self, split: Split, min_samples: usize) -> BTreeMap<&str, Vec<&StemEntry>> {
        let mut out: BTreeMap<&str, Vec<&StemEntry>> = BTreeMap::new();
        for e in self.split_entries(split, min_samples) {
            out.entry(e.group.as_str()).or_default().push(e);
        }
        out
    }

    fn samples_of(&self, id: &str) -> Result<Arc<Vec<f32>>> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(id) {
            return Ok(s.clone());
        }
        let entry = self.get(id)?;
        let buf = read_mono::<f32>(&self.root.join(&entry.path))?;
        if buf.sample_rate() != self.sample_rate {
            return Err(Error::SampleRate(self.sample_rate, buf.sample_rate()));
        }
        let data = Arc::new(buf.into_samples());
        self.cache.lock().expect("cache lock").insert(id.to_string(), data.clone());
        Ok(data)
    }

    /// `len` samples of stem `id` starting at `start`.
    pub fn segment(&self, id: &str, start: usize, len: usize) -> Result<MonoBuffer<f32>> {
        let data = self.samples_of(id)?;
        let end = start
            .checked_add(len)
            .filter(|&e| e <= data.len())
            .ok_or_else(|| Error::Domain(format!("segment {start}+{len} exceeds stem '{id}' of {} samples", data.len())))?;
        MonoBuffer::new(data[start..end].to_vec(), self.sample_rate)
    }
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    v.sort();
    Ok(v)
}

fn file_name(p: &Path) -> String {
    p.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}
