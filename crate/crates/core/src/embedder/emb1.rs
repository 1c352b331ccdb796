//! The EMB1 binary vector file.
//!
//! Little-endian layout:
//!
//! ```text
//! "EMB1" | dim: u32 | record*
//! record = id_len: u32 | id: [u8; id_len] (UTF-8) | role: u8 | sentence_index: u16 | [f32; dim]
//! ```
//!
//! Role 0 is a title (or, in single-vector tables, the whole item); role 1 an
//! abstract sentence ordered by `sentence_index`. Records of one paper need
//! not be contiguous.
//!
//! Paper-level vector tables (pooled paper embeddings, query sidecars) reuse
//! the layout with one role-0 record per id.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{Embedding, SentenceEmbeddingSet};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Title = 0,
    AbstractSentence = 1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub role: Role,
    pub sentence_index: u16,
    pub values: Vec<f32>,
    /// Byte offset of the record start.
    pub offset: u64,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, record_start: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                record_start as u64,
                format!("truncated record: expected {n} bytes of {what} at byte {}", self.pos),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

/// Parses an EMB1 buffer into its dimension and raw records.
pub fn parse(bytes: &[u8]) -> Result<(usize, Vec<Record>)> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"EMB1\" header"));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if dim == 0 {
        return Err(Error::format(4, "dim must be positive"));
    }
    let mut cur = Cursor { bytes, pos: 8 };
    let mut records = Vec::new();
    while cur.pos < bytes.len() {
        let start = cur.pos;
        let id_len = u32::from_le_bytes(cur.take(4, start, "id length")?.try_into().unwrap());
        let id_bytes = cur.take(id_len as usize, start, "id")?;
        let id = std::str::from_utf8(id_bytes)
            .map_err(|_| Error::format(start as u64, "record id is not UTF-8"))?
            .to_string();
        let role = match cur.take(1, start, "role")?[0] {
            0 => Role::Title,
            1 => Role::AbstractSentence,
            r => return Err(Error::format(start as u64, format!("unknown role {r}"))),
        };
        let sentence_index = u16::from_le_bytes(cur.take(2, start, "sentence index")?.try_into().unwrap());
        let raw = cur.take(dim * 4, start, "vector")?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(start as u64, format!("non-finite component in record {id:?}")));
        }
        records.push(Record {
            id,
            role,
            sentence_index,
            values,
            offset: start as u64,
        });
    }
    Ok((dim, records))
}

fn read(path: &Path) -> Result<(usize, Vec<Record>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse(&bytes)
}

fn to_embedding(r: &Record) -> Embedding {
    Embedding(r.values.iter().map(|&v| v as f64).collect())
}

/// Groups sentence records by paper id.
///
/// Each paper needs exactly one title record; abstract sentences are ordered
/// by `sentence_index`, which must be unique within a paper.
pub fn group_sentences(records: &[Record]) -> Result<BTreeMap<String, SentenceEmbeddingSet>> {
    struct Partial<'a> {
        first_offset: u64,
        title: Option<&'a Record>,
        sentences: BTreeMap<u16, &'a Record>,
    }
    let mut partial: BTreeMap<&str, Partial> = BTreeMap::new();
    for r in records {
        let p = partial.entry(&r.id).or_insert(Partial {
            first_offset: r.offset,
            title: None,
            sentences: BTreeMap::new(),
        });
        match r.role {
            Role::Title => {
                if p.title.replace(r).is_some() {
                    return Err(Error::format(
                        r.offset,
                        format!("paper {:?} has more than one title record", r.id),
                    ));
                }
            }
            Role::AbstractSentence => {
                if p.sentences.insert(r.sentence_index, r).is_some() {
                    return Err(Error::format(
                        r.offset,
                        format!("paper {:?} repeats sentence index {}", r.id, r.sentence_index),
                    ));
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (id, p) in partial {
        let title = p.title.ok_or_else(|| {
            Error::format(p.first_offset, format!("paper {id:?} has no title record"))
        })?;
        out.insert(
            id.to_string(),
            SentenceEmbeddingSet {
                paper_id: id.to_string(),
                title_embedding: to_embedding(title),
                abstract_embeddings: p.sentences.values().map(|r| to_embedding(r)).collect(),
            },
        );
    }
    Ok(out)
}

/// Reads a sentence-embedding file into per-paper sets.
pub fn load_sentence_embeddings(path: &Path) -> Result<BTreeMap<String, SentenceEmbeddingSet>> {
    let (_, records) = read(path)?;
    group_sentences(&records)
}

/// Reads a single-vector-per-id table (role 0 records only).
pub fn load_vector_table(path: &Path) -> Result<(usize, BTreeMap<String, Embedding>)> {
    let (dim, records) = read(path)?;
    let mut out = BTreeMap::new();
    for r in &records {
        if r.role != Role::Title {
            return Err(Error::format(
                r.offset,
                format!("vector table record {:?} must have role 0", r.id),
            ));
        }
        match out.entry(r.id.clone()) {
            Entry::Occupied(_) => {
                return Err(Error::format(r.offset, format!("duplicate id {:?}", r.id)))
            }
            Entry::Vacant(v) => {
                v.insert(to_embedding(r));
            }
        }
    }
    Ok((dim, out))
}

/// Writes a vector table in id order.
pub fn write_vector_table(path: &Path, vectors: &BTreeMap<String, Embedding>) -> Result<()> {
    let dim = vectors.values().next().map_or(1, Embedding::dim);
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Emb1Writer::new(BufWriter::new(file), dim).map_err(|e| Error::io(path, e))?;
    for (id, v) in vectors {
        if v.dim() != dim {
            return Err(Error::Validation(format!(
                "vector {id:?} has dim {} but the table has dim {dim}",
                v.dim()
            )));
        }
        w.write(id, Role::Title, 0, v.as_slice())
            .map_err(|e| Error::io(path, e))?;
    }
    w.finish().map(|_| ()).map_err(|e| Error::io(path, e))
}

/// Streaming EMB1 writer. Components are stored as 32-bit floats.
pub struct Emb1Writer<W: Write> {
    inner: W,
    dim: usize,
}

impl<W: Write> Emb1Writer<W> {
    pub fn new(mut inner: W, dim: usize) -> io::Result<Self> {
        inner.write_all(MAGIC)?;
        inner.write_all(&(dim as u32).to_le_bytes())?;
        Ok(Emb1Writer { inner, dim })
    }

    pub fn write(&mut self, id: &str, role: Role, sentence_index: u16, values: &[f64]) -> io::Result<()> {
        if values.len() != self.dim {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("record {id:?} has dim {} but the file has dim {}", values.len(), self.dim),
            ));
        }
        self.inner.write_all(&(id.len() as u32).to_le_bytes())?;
        self.inner.write_all(id.as_bytes())?;
        self.inner.write_all(&[role as u8])?;
        self.inner.write_all(&sentence_index.to_le_bytes())?;
        for &v in values {
            self.inner.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}
