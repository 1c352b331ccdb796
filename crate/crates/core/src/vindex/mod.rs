//! Cosine-similarity retrieval over paper vectors.
//!
//! Vectors are L2-normalized on insertion, so cosine similarity is the inner
//! product. Two backends share one contract: `Exact` scans every vector;
//! `Hnsw` walks a navigable small-world graph. Results are sorted by score
//! descending with ties broken by ascending paper id.

mod hnsw;
mod persist;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedder::{dot, Embedding};
use crate::error::{Error, Result};
use hnsw::{HnswGraph, Vectors};

/// A retrieved paper and its cosine similarity to the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub paper_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Hnsw,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "hnsw" => Ok(Backend::Hnsw),
            other => Err(Error::Argument(format!("unknown index backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HnswParams {
    /// Links per node on upper layers; twice this on the base layer.
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    /// Seed for level assignment.
    pub seed: u64,
}

impl Default for HnswParams {
    fn default() -> Self {
        HnswParams {
            m: 32,
            ef_construction: 200,
            ef_search: 128,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    backend: Backend,
    params: HnswParams,
    dim: usize,
    ids: Vec<String>,
    /// `ids.len() * dim` unit-norm components, in id order.
    vectors: Vec<f64>,
    graph: Option<HnswGraph>,
}

fn normalize_into(id: &str, e: &Embedding, out: &mut Vec<f64>) -> Result<()> {
    let norm = e.norm();
    if norm == 0.0 {
        return Err(Error::Validation(format!(
            "paper {id:?} has a zero vector and cannot be normalized"
        )));
    }
    out.extend(e.as_slice().iter().map(|v| v / norm));
    Ok(())
}

fn by_score_then_id(a: &ScoredDocument, b: &ScoredDocument) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.paper_id.cmp(&b.paper_id))
}

impl VectorIndex {
    /// Normalizes and inserts every vector, in ascending id order.
    pub fn build(
        embeddings: &BTreeMap<String, Embedding>,
        backend: Backend,
        params: HnswParams,
    ) -> Result<VectorIndex> {
        if backend == Backend::Hnsw && (params.m < 2 || params.ef_construction == 0 || params.ef_search == 0) {
            return Err(Error::Argument(
                "HNSW needs m >= 2 and positive ef_construction / ef_search".into(),
            ));
        }
        let dim = embeddings.values().next().map_or(0, Embedding::dim);
        let mut vectors = Vec::with_capacity(embeddings.len() * dim);
        let mut ids = Vec::with_capacity(embeddings.len());
        for (id, e) in embeddings {
            if e.dim() != dim {
                return Err(Error::Validation(format!(
                    "paper {id:?} has dim {} but the index has dim {dim}",
                    e.dim()
                )));
            }
            normalize_into(id, e, &mut vectors)?;
            ids.push(id.clone());
        }
        Ok(Self::from_normalized(backend, params, dim, ids, vectors))
    }

    fn from_normalized(
        backend: Backend,
        params: HnswParams,
        dim: usize,
        ids: Vec<String>,
        vectors: Vec<f64>,
    ) -> VectorIndex {
        let graph = (backend == Backend::Hnsw && !ids.is_empty())
            .then(|| HnswGraph::build(&Vectors { data: &vectors, dim }, &params));
        VectorIndex {
            backend,
            params,
            dim,
            ids,
            vectors,
            graph,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn params(&self) -> &HnswParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Stored unit vector of slot `i`.
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Top-`n` papers by cosine similarity to `query`.
    pub fn search(&self, query: &Embedding, n: usize) -> Result<Vec<ScoredDocument>> {
        if self.is_empty() || n == 0 {
            return Ok(Vec::new());
        }
        if query.dim() != self.dim {
            return Err(Error::Validation(format!(
                "query dim {} does not match index dim {}",
                query.dim(),
                self.dim
            )));
        }
        let mut q = Vec::with_capacity(self.dim);
        normalize_into("<query>", query, &mut q)?;

        let slots: Vec<usize> = match &self.graph {
            Some(graph) => {
                let vectors = Vectors {
                    data: &self.vectors,
                    dim: self.dim,
                };
                let ef = self.params.ef_search.max(n);
                graph
                    .search(&vectors, &q, ef)
                    .into_iter()
                    .map(|s| s as usize)
                    .collect()
            }
            None => (0..self.len()).collect(),
        };
        let mut scored: Vec<ScoredDocument> = slots
            .into_iter()
            .map(|i| ScoredDocument {
                paper_id: self.ids[i].clone(),
                score: dot(&q, self.vector(i)),
            })
            .collect();
        let n = n.min(scored.len());
        if n < scored.len() {
            scored.select_nth_unstable_by(n, by_score_then_id);
            scored.truncate(n);
        }
        scored.sort_by(by_score_then_id);
        Ok(scored)
    }
}

/// Full-scan ground truth: cosine computed from the raw vectors.
pub fn exact_oracle(
    embeddings: &BTreeMap<String, Embedding>,
    query: &Embedding,
    n: usize,
) -> Result<Vec<ScoredDocument>> {
    let q_norm = query.norm();
    if q_norm == 0.0 && !embeddings.is_empty() && n > 0 {
        return Err(Error::Validation("query is a zero vector".into()));
    }
    let mut all = Vec::with_capacity(embeddings.len());
    for (id, e) in embeddings {
        if e.dim() != query.dim() {
            return Err(Error::Validation(format!(
                "paper {id:?} has dim {} but the query has dim {}",
                e.dim(),
                query.dim()
            )));
        }
        let norm = e.norm();
        if norm == 0.0 {
            return Err(Error::Validation(format!("paper {id:?} has a zero vector")));
        }
        all.push(ScoredDocument {
            paper_id: id.clone(),
            score: e.dot(query) / (norm * q_norm),
        });
    }
    all.sort_by(by_score_then_id);
    all.truncate(n);
    Ok(all)
}
