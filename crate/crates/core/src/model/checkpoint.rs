//! Binary checkpoint container.
//!
//! ```text
//! magic        8 bytes   "DBALCKPT"
//! version      u32 LE
//! header_len   u32 LE
//! header       JSON (CheckpointMeta)
//! per group, in ModelDims::shapes order:
//!   name_len u16 LE, name bytes, ndim u8, dims u64 LE × ndim, values f64 LE
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CellKind, Method, ModelDims, ModelParams};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"DBALCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub format_version: u32,
    pub cell: CellKind,
    pub dim: usize,
    pub corpus_dim: usize,
    pub vocab: usize,
    pub corpora: usize,
    pub method: String,
    pub seed: u64,
    pub vocab_hash: String,
    /// Free-form provenance (epochs, learning rate, DF table, ...).
    pub extra: BTreeMap<String, String>,
}

impl CheckpointMeta {
    pub fn new(dims: ModelDims, method: Method, seed: u64, vocab_hash: &str) -> Self {
        Self {
            format_version: CHECKPOINT_VERSION,
            cell: dims.cell,
            dim: dims.dim,
            corpus_dim: dims.corpus_dim,
            vocab: dims.vocab,
            corpora: dims.corpora,
            method: method.to_string(),
            seed,
            vocab_hash: vocab_hash.to_string(),
            extra: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            vocab: self.vocab,
            corpora: self.corpora,
            dim: self.dim,
            corpus_dim: self.corpus_dim,
            cell: self.cell,
        }
    }

    pub fn method(&self) -> Result<Method> {
        self.method.parse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub params: ModelParams,
}

pub fn write_checkpoint(meta: &CheckpointMeta, params: &ModelParams) -> Result<Vec<u8>> {
    params.validate()?;
    if meta.dims() != params.dims {
        return Err(Error::InvalidArgument("checkpoint header disagrees with parameters".into()));
    }
    let header = serde_json::to_vec(meta).expect("meta serializes");
    let mut out = Vec::with_capacity(header.len() + 8 * params.num_values() + 256);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for ((name, shape), values) in params.dims.shapes().into_iter().zip(params.groups()) {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(shape.len() as u8);
        for d in &shape {
            out.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> std::result::Result<u16, String> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_checkpoint(bytes: &[u8]) -> std::result::Result<Checkpoint, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a checkpoint file".into());
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let header_len = r.u32()? as usize;
    let meta: CheckpointMeta =
        serde_json::from_slice(r.take(header_len)?).map_err(|e| format!("bad header: {e}"))?;
    if meta.format_version != version {
        return Err("header version disagrees with container".into());
    }
    let dims = meta.dims();
    dims.validate().map_err(|e| e.to_string())?;
    let mut params = ModelParams::zeros(dims);
    for (g, (name, shape)) in dims.shapes().into_iter().enumerate() {
        let name_len = r.u16()? as usize;
        let got = r.take(name_len)?;
        if got != name.as_bytes() {
            return Err(format!("expected group {name}, found {:?}", String::from_utf8_lossy(got)));
        }
        let ndim = r.u8()? as usize;
        let stored: Vec<usize> = (0..ndim).map(|_| r.u64().map(|d| d as usize)).collect::<std::result::Result<_, _>>()?;
        if stored != shape {
            return Err(format!("{name} has shape {stored:?}, header implies {shape:?}"));
        }
        for v in params.groups_mut()[g].iter_mut() {
            *v = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
        }
    }
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    if !params.all_finite() {
        return Err("non-finite parameter values".into());
    }
    Ok(Checkpoint { meta, params })
}

pub fn save_checkpoint(path: &Path, meta: &CheckpointMeta, params: &ModelParams) -> Result<()> {
    let bytes = write_checkpoint(meta, params)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes).map_err(|msg| Error::format(path, 0, msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (CheckpointMeta, ModelParams) {
        let dims = ModelDims::new(12, 3, 4);
        let params = ModelParams::random(dims, 4, 0.5);
        let mut meta = CheckpointMeta::new(dims, Method::Weighted, 4, "abcd");
        meta.extra.insert("epochs".into(), "3".into());
        (meta, params)
    }

    #[test]
    fn roundtrip_is_exact() {
        let (meta, params) = sample();
        let bytes = write_checkpoint(&meta, &params).unwrap();
        let back = read_checkpoint(&bytes).unwrap();
        assert_eq!(back.meta, meta);
        assert_eq!(back.params, params);
        assert_eq!(write_checkpoint(&back.meta, &back.params).unwrap(), bytes);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let (meta, params) = sample();
        let bytes = write_checkpoint(&meta, &params).unwrap();
        assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(read_checkpoint(&extra).is_err());
        assert!(read_checkpoint(b"nonsense").is_err());

        // Header claiming a different vocabulary size no longer matches the arrays.
        let mut wrong = meta.clone();
        wrong.vocab = 13;
        let mut forged = Vec::new();
        let header = serde_json::to_vec(&wrong).unwrap();
        forged.extend_from_slice(MAGIC);
        forged.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        forged.extend_from_slice(&(header.len() as u32).to_le_bytes());
        forged.extend_from_slice(&header);
        let orig_header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        forged.extend_from_slice(&bytes[16 + orig_header_len..]);
        let err = read_checkpoint(&forged).unwrap_err();
        assert!(err.contains("shape"), "{err}");
    }

    #[test]
    fn mismatched_meta_rejected() {
        let (mut meta, params) = sample();
        meta.dim = 5;
        assert!(write_checkpoint(&meta, &params).is_err());
    }
}
