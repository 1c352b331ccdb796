use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{normalize_tag, AuthorRecord, Corpus};
use crate::embedder::{Embedding, TextEncoder};
use crate::error::{Error, Result};

/// Tolerance applied to the similarity threshold so an embedding compared
/// with itself always clears a threshold of 1.
const COSINE_SLACK: f64 = 1e-9;

/// True iff the normalized query is one of the author's tags.
pub fn is_relevant_exact(author: &AuthorRecord, query: &str) -> bool {
    let q = normalize_tag(query);
    author.tags.iter().any(|t| normalize_tag(t) == q)
}

/// True iff some tag embedding has cosine similarity at least `threshold`
/// with the query embedding. No tags means not relevant.
pub fn is_relevant_approx(
    query_embedding: &Embedding,
    tag_embeddings: &[Embedding],
    threshold: f64,
) -> Result<bool> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Argument(format!(
            "similarity threshold must be in (0, 1], got {threshold}"
        )));
    }
    for tag in tag_embeddings {
        if tag.dim() != query_embedding.dim() {
            return Err(Error::Validation(format!(
                "tag dim {} differs from query dim {}",
                tag.dim(),
                query_embedding.dim()
            )));
        }
        if query_embedding.cosine(tag) >= threshold - COSINE_SLACK {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Authors relevant to `query` under exact tag matching.
pub fn exact_relevant_authors(corpus: &Corpus, query: &str) -> BTreeSet<String> {
    corpus
        .authors()
        .values()
        .filter(|a| is_relevant_exact(a, query))
        .map(|a| a.author_id.clone())
        .collect()
}

/// Caches tag embeddings across queries.
pub struct ApproxJudge<'a> {
    encoder: &'a dyn TextEncoder,
    threshold: f64,
    tags: BTreeMap<String, Option<Embedding>>,
}

impl<'a> ApproxJudge<'a> {
    pub fn new(encoder: &'a dyn TextEncoder, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::Argument(format!(
                "similarity threshold must be in (0, 1], got {threshold}"
            )));
        }
        Ok(ApproxJudge {
            encoder,
            threshold,
            tags: BTreeMap::new(),
        })
    }

    pub fn encoder(&self) -> &dyn TextEncoder {
        self.encoder
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Authors relevant to `query` under embedding similarity. A query the
    /// encoder cannot embed has no approximately relevant authors.
    pub fn relevant_authors(&mut self, corpus: &Corpus, query: &str) -> Result<BTreeSet<String>> {
        let Some(q) = self.encoder.encode(query) else {
            return Ok(BTreeSet::new());
        };
        let mut out = BTreeSet::new();
        for author in corpus.authors().values() {
            let mut embedded = Vec::with_capacity(author.tags.len());
            for tag in &author.tags {
                let e = self
                    .tags
                    .entry(tag.clone())
                    .or_insert_with(|| self.encoder.encode(tag));
                if let Some(e) = e {
                    embedded.push(e.clone());
                }
            }
            if is_relevant_approx(&q, &embedded, self.threshold)? {
                out.insert(author.author_id.clone());
            }
        }
        Ok(out)
    }
}
