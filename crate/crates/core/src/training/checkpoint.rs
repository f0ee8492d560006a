//! Binary checkpoints.
//!
//! ```text
//! "HCK1"  u32 version  u32 json_len  json
//! repeat: u16 name_len  name  u32 rank  u32 dims[rank]  f64 data[prod(dims)]
//! ```
//!
//! All integers and floats are little-endian. The JSON block holds the
//! training config, the label order and the architecture.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Architecture, ClassifierParams, LABEL_NAMES};

use super::TrainConfig;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HCK1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: ClassifierParams,
    pub config: TrainConfig,
    pub label_order: Vec<String>,
}

impl Checkpoint {
    pub fn new(params: ClassifierParams, config: TrainConfig) -> Self {
        Checkpoint {
            params,
            config,
            label_order: LABEL_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.config.clone(),
            label_order: self.label_order.clone(),
            architecture: self.params.architecture(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (name, shape, data) in self.params.tensors() {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
            for d in &shape {
                out.extend_from_slice(&(*d as u32).to_le_bytes());
            }
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != CHECKPOINT_MAGIC {
            return Err(Error::Load("not a checkpoint (bad magic)".into()));
        }
        let version = r.u32("version")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Load(format!(
                "checkpoint version {version}, expected {CHECKPOINT_VERSION}"
            )));
        }
        let json_len = r.u32("header length")? as usize;
        let header: Header = serde_json::from_slice(r.take(json_len, "header")?)
            .map_err(|e| Error::Load(format!("checkpoint header: {e}")))?;
        if header.label_order != LABEL_NAMES {
            return Err(Error::Load(format!(
                "label order {:?} differs from {:?}",
                header.label_order, LABEL_NAMES
            )));
        }
        let mut params = ClassifierParams::zeros(&header.architecture)
            .map_err(|e| Error::Load(format!("checkpoint architecture: {e}")))?;
        let expected: Vec<(String, Vec<usize>)> = params
            .tensors()
            .into_iter()
            .map(|(n, s, _)| (n, s))
            .collect();
        for ((want_name, want_shape), (_, dest)) in expected.iter().zip(params.tensors_mut()) {
            let name_len = r.u16(want_name)? as usize;
            let name = r.take(name_len, want_name)?;
            if name != want_name.as_bytes() {
                return Err(Error::Load(format!(
                    "expected tensor `{want_name}`, found `{}`",
                    String::from_utf8_lossy(name)
                )));
            }
            let rank = r.u32(want_name)? as usize;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                shape.push(r.u32(want_name)? as usize);
            }
            if &shape != want_shape {
                return Err(Error::Load(format!(
                    "tensor `{want_name}` has shape {shape:?}, architecture needs {want_shape:?}"
                )));
            }
            let raw = r.take(dest.len() * 8, want_name)?;
            for (d, c) in dest.iter_mut().zip(raw.chunks_exact(8)) {
                *d = f64::from_le_bytes(c.try_into().expect("8 bytes"));
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Load(format!(
                "{} trailing bytes after the last tensor",
                bytes.len() - r.pos
            )));
        }
        if params.tensors().iter().any(|(_, _, d)| d.iter().any(|v| !v.is_finite())) {
            return Err(Error::Load("checkpoint contains non-finite parameters".into()));
        }
        Ok(Checkpoint {
            params,
            config: header.config,
            label_order: header.label_order,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: TrainConfig,
    label_order: Vec<String>,
    architecture: Architecture,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Load(format!(
                "checkpoint truncated while reading {what} at byte {}",
                self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().expect("2 bytes")))
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    std::fs::write(path, ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}
