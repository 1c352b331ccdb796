//! Single-file index persistence.
//!
//! ```text
//! "VIDX" | backend: u8 (0 exact, 1 hnsw) | dim: u32 | count: u64
//!        | m: u32 | ef_construction: u32 | ef_search: u32 | seed: u64
//! id table:     count x (len: u32 | UTF-8 bytes)
//! vector block: count x dim f32, unit-norm
//! hnsw block:   entry: u32, then per node: level: u8,
//!               per layer 0..=level: n: u32 | n x u32
//! ```
//!
//! All integers and floats are little-endian. Vectors are re-normalized in
//! double precision on load.

use std::fs;
use std::path::Path;

use super::hnsw::HnswGraph;
use super::{Backend, HnswParams, VectorIndex};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VIDX";

impl VectorIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.push(match self.backend {
            Backend::Exact => 0,
            Backend::Hnsw => 1,
        });
        b.extend_from_slice(&(self.dim as u32).to_le_bytes());
        b.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        b.extend_from_slice(&(self.params.m as u32).to_le_bytes());
        b.extend_from_slice(&(self.params.ef_construction as u32).to_le_bytes());
        b.extend_from_slice(&(self.params.ef_search as u32).to_le_bytes());
        b.extend_from_slice(&self.params.seed.to_le_bytes());
        for id in &self.ids {
            b.extend_from_slice(&(id.len() as u32).to_le_bytes());
            b.extend_from_slice(id.as_bytes());
        }
        for &v in &self.vectors {
            b.extend_from_slice(&(v as f32).to_le_bytes());
        }
        if let Some(graph) = &self.graph {
            b.extend_from_slice(&graph.entry.to_le_bytes());
            for layers in &graph.links {
                b.push((layers.len() - 1) as u8);
                for links in layers {
                    b.extend_from_slice(&(links.len() as u32).to_le_bytes());
                    for &l in links {
                        b.extend_from_slice(&l.to_le_bytes());
                    }
                }
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<VectorIndex> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::format(0, "bad magic, expected \"VIDX\""));
        }
        let backend = match r.u8()? {
            0 => Backend::Exact,
            1 => Backend::Hnsw,
            t => return Err(Error::format(4, format!("unknown backend tag {t}"))),
        };
        let dim = r.u32()? as usize;
        let count = r.u64()? as usize;
        let params = HnswParams {
            m: r.u32()? as usize,
            ef_construction: r.u32()? as usize,
            ef_search: r.u32()? as usize,
            seed: r.u64()?,
        };
        let mut ids = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let at = r.pos;
            let len = r.u32()? as usize;
            let id = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::format(at as u64, "id is not UTF-8"))?;
            ids.push(id.to_string());
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format(0, "id table is not strictly ascending"));
        }
        let mut vectors = Vec::with_capacity(count * dim);
        for _ in 0..count {
            let at = r.pos;
            let raw: Vec<f64> = (0..dim).map(|_| r.f32().map(f64::from)).collect::<Result<_>>()?;
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::format(at as u64, "stored vector is zero or non-finite"));
            }
            vectors.extend(raw.iter().map(|v| v / norm));
        }
        let graph = if backend == Backend::Hnsw && count > 0 {
            let entry = r.u32()?;
            let mut links = Vec::with_capacity(count);
            for _ in 0..count {
                let level = r.u8()? as usize;
                let mut layers = Vec::with_capacity(level + 1);
                for _ in 0..=level {
                    let at = r.pos;
                    let n = r.u32()? as usize;
                    let mut l = Vec::with_capacity(n.min(1024));
                    for _ in 0..n {
                        let nb = r.u32()?;
                        if nb as usize >= count {
                            return Err(Error::format(at as u64, "link points past the node table"));
                        }
                        l.push(nb);
                    }
                    layers.push(l);
                }
                links.push(layers);
            }
            if entry as usize >= count {
                return Err(Error::format(0, "entry point out of range"));
            }
            Some(HnswGraph { links, entry })
        } else {
            None
        };
        if r.pos != bytes.len() {
            return Err(Error::format(r.pos as u64, "trailing bytes after index"));
        }
        Ok(VectorIndex {
            backend,
            params,
            dim,
            ids,
            vectors,
            graph,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<VectorIndex> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(self.pos as u64, "truncated index file"));
        }
        self.pos += n;
        Ok(&self.bytes[self.pos - n..self.pos])
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
