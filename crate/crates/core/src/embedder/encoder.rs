use std::collections::BTreeMap;

use super::{pooled_text_embedding, Embedding, LsiModel, WordVectors};
use crate::corpus::{clean_text, normalize_tag, Stopwords};

/// Maps short texts (queries, tags) into the paper embedding space.
pub trait TextEncoder {
    /// `None` when the text cannot be embedded.
    fn encode(&self, text: &str) -> Option<Embedding>;

    /// Name recorded in evaluation reports.
    fn describe(&self) -> String;
}

/// Encoder matching the configured paper embedder.
#[derive(Debug, Clone)]
pub enum QueryEncoder {
    /// Projects cleaned text with a fitted model.
    Lsi { model: LsiModel, stopwords: Stopwords },
    /// Pools static word vectors over the text as one sentence.
    Words { vectors: WordVectors, stopwords: Stopwords },
    /// Looks up vectors precomputed by an external encoder, keyed by
    /// normalized text.
    Lookup(LookupEncoder),
}

impl TextEncoder for QueryEncoder {
    fn encode(&self, text: &str) -> Option<Embedding> {
        match self {
            QueryEncoder::Lsi { model, stopwords } => {
                let e = model.embed(&clean_text(text, stopwords));
                (!e.is_zero()).then_some(e)
            }
            QueryEncoder::Words { vectors, stopwords } => pooled_text_embedding(text, vectors, stopwords),
            QueryEncoder::Lookup(l) => l.encode(text),
        }
    }

    fn describe(&self) -> String {
        match self {
            QueryEncoder::Lsi { model, .. } => format!("lsi(k={})", model.dim()),
            QueryEncoder::Words { vectors, .. } => format!("pooled(d={})", vectors.dim()),
            QueryEncoder::Lookup(l) => l.describe(),
        }
    }
}

/// Precomputed vectors keyed by normalized text.
#[derive(Debug, Clone, Default)]
pub struct LookupEncoder {
    table: BTreeMap<String, Embedding>,
    name: String,
}

impl LookupEncoder {
    pub fn new(table: BTreeMap<String, Embedding>, name: impl Into<String>) -> Self {
        LookupEncoder {
            table: table.into_iter().map(|(k, v)| (normalize_tag(&k), v)).collect(),
            name: name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl TextEncoder for LookupEncoder {
    fn encode(&self, text: &str) -> Option<Embedding> {
        self.table.get(&normalize_tag(text)).filter(|e| !e.is_zero()).cloned()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}
