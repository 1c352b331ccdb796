//! Citation-graph retrofitting of paper embeddings.
//!
//! Each pass visits the papers that have a lexicon entry and replaces the
//! working vector with
//!
//! ```text
//! (n * original[p] + sum_{q in N(p)} working[q]) / (2n)
//! ```
//!
//! where `N(p)` are the paper's lexicon neighbours that have an embedding and
//! `n = |N(p)|`. Updates are applied in place, so later papers in a pass see
//! the vectors already updated earlier in the same pass. Papers without
//! neighbours, or without a lexicon entry, keep their original vector.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::Corpus;
use crate::embedder::Embedding;
use crate::error::{Error, Result};

/// Paper id to cited/neighbouring paper ids. Self-loops are removed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CitationLexicon {
    neighbors: BTreeMap<String, BTreeSet<String>>,
}

impl CitationLexicon {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<String>)>) -> Self {
        let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, ns) in entries {
            let set = neighbors.entry(id.clone()).or_default();
            set.extend(ns.into_iter().filter(|n| *n != id));
        }
        CitationLexicon { neighbors }
    }

    /// Reference lists of the corpus; optionally adds the reverse of each edge.
    pub fn from_corpus(corpus: &Corpus, symmetrize: bool) -> Self {
        let mut lexicon = Self::new(
            corpus
                .papers()
                .values()
                .map(|p| (p.paper_id.clone(), p.references.clone())),
        );
        if symmetrize {
            let reversed: Vec<(String, String)> = lexicon
                .neighbors
                .iter()
                .flat_map(|(src, ns)| ns.iter().map(move |dst| (dst.clone(), src.clone())))
                .collect();
            for (dst, src) in reversed {
                lexicon.neighbors.entry(dst).or_default().insert(src);
            }
        }
        lexicon
    }

    /// Reads `{"id": str, "neighbors": [str]}` lines.
    pub fn load_jsonl(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Line {
            id: String,
            neighbors: Vec<String>,
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let l: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
                file: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            entries.push((l.id, l.neighbors));
        }
        Ok(Self::new(entries))
    }

    pub fn neighbors(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.neighbors.get(id)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum IterationOrder {
    /// Ascending paper id.
    #[default]
    Lexicographic,
    /// Visit exactly these ids, in this order; ids without both an embedding
    /// and a lexicon entry are skipped.
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrofitConfig {
    pub num_iter: usize,
    pub iteration_order: IterationOrder,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            num_iter: 10,
            iteration_order: IterationOrder::Lexicographic,
        }
    }
}

pub fn retrofit(
    original: &BTreeMap<String, Embedding>,
    lexicon: &CitationLexicon,
    config: &RetrofitConfig,
) -> Result<BTreeMap<String, Embedding>> {
    if config.num_iter == 0 {
        return Err(Error::Argument("num_iter must be at least 1".into()));
    }
    let dim = original.values().next().map_or(0, Embedding::dim);
    if let Some((id, e)) = original.iter().find(|(_, e)| e.dim() != dim) {
        return Err(Error::Validation(format!(
            "paper {id:?} has dim {} but expected {dim}",
            e.dim()
        )));
    }

    let ids: Vec<&String> = original.keys().collect();
    let slot = |id: &str| ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok();
    let anchors: Vec<&[f64]> = original.values().map(Embedding::as_slice).collect();
    let mut working: Vec<Vec<f64>> = anchors.iter().map(|v| v.to_vec()).collect();

    let visit_ids: Vec<&str> = match &config.iteration_order {
        IterationOrder::Lexicographic => ids.iter().map(|s| s.as_str()).collect(),
        IterationOrder::Explicit(order) => order.iter().map(String::as_str).collect(),
    };
    // (paper slot, neighbour slots) for papers with at least one neighbour
    let schedule: Vec<(usize, Vec<usize>)> = visit_ids
        .into_iter()
        .filter_map(|id| {
            let p = slot(id)?;
            let ns: Vec<usize> = lexicon.neighbors(id)?.iter().filter_map(|n| slot(n)).collect();
            (!ns.is_empty()).then_some((p, ns))
        })
        .collect();

    let mut acc = vec![0.0; dim];
    for _ in 0..config.num_iter {
        for (p, ns) in &schedule {
            let n = ns.len() as f64;
            for (a, o) in acc.iter_mut().zip(anchors[*p]) {
                *a = n * o;
            }
            for &q in ns {
                for (a, w) in acc.iter_mut().zip(&working[q]) {
                    *a += w;
                }
            }
            for (w, a) in working[*p].iter_mut().zip(&acc) {
                *w = a / (2.0 * n);
            }
        }
    }

    Ok(ids
        .into_iter()
        .zip(working)
        .map(|(id, v)| (id.clone(), Embedding(v)))
        .collect())
}

/// Per-paper Euclidean distance between original and retrofitted vectors.
pub fn retrofit_residual(
    original: &BTreeMap<String, Embedding>,
    retrofitted: &BTreeMap<String, Embedding>,
) -> Result<BTreeMap<String, f64>> {
    if original.len() != retrofitted.len() || original.keys().ne(retrofitted.keys()) {
        return Err(Error::Validation(
            "original and retrofitted maps have different paper ids".into(),
        ));
    }
    original
        .iter()
        .zip(retrofitted.values())
        .map(|((id, a), b)| {
            if a.dim() != b.dim() {
                return Err(Error::Validation(format!("paper {id:?}: dimension mismatch")));
            }
            let d = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            Ok((id.clone(), d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(pairs: &[(&str, &[f64])]) -> BTreeMap<String, Embedding> {
        pairs
            .iter()
            .map(|(id, v)| (id.to_string(), Embedding::new(v.to_vec()).unwrap()))
            .collect()
    }

    fn lex(pairs: &[(&str, &[&str])]) -> CitationLexicon {
        CitationLexicon::new(
            pairs
                .iter()
                .map(|(id, ns)| (id.to_string(), ns.iter().map(|s| s.to_string()).collect())),
        )
    }

    #[test]
    fn single_neighbor_fixed_point() {
        let original = emb(&[("o", &[1., 0.]), ("n", &[0., 1.])]);
        let lexicon = lex(&[("o", &["n"])]);
        for num_iter in [1, 2, 10] {
            let cfg = RetrofitConfig { num_iter, ..Default::default() };
            let out = retrofit(&original, &lexicon, &cfg).unwrap();
            assert_eq!(out["o"].as_slice(), &[0.5, 0.5]);
            assert_eq!(out["n"], original["n"]);
        }
        let res = retrofit_residual(&original, &retrofit(&original, &lexicon, &Default::default()).unwrap()).unwrap();
        assert!((res["o"] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(res["n"], 0.0);
    }

    #[test]
    fn no_in_corpus_neighbors_is_identity() {
        let original = emb(&[("a", &[0.1, 0.7]), ("b", &[3.0, -1.0])]);
        let lexicon = lex(&[("a", &["missing", "a"])]);
        let out = retrofit(&original, &lexicon, &Default::default()).unwrap();
        assert_eq!(out, original);
    }

    #[test]
    fn symmetric_cycle_of_equal_vectors_is_fixed() {
        let e: &[f64] = &[0.3, -0.2, 0.9];
        let original = emb(&[("a", e), ("b", e), ("c", e)]);
        let lexicon = lex(&[("a", &["b", "c"]), ("b", &["a", "c"]), ("c", &["a", "b"])]);
        let out = retrofit(&original, &lexicon, &Default::default()).unwrap();
        for v in out.values() {
            for (x, y) in v.as_slice().iter().zip(e) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_iterations_rejected() {
        let original = emb(&[("a", &[1.0])]);
        let cfg = RetrofitConfig { num_iter: 0, ..Default::default() };
        assert!(matches!(retrofit(&original, &lex(&[]), &cfg), Err(Error::Argument(_))));
    }

    #[test]
    fn dim_mismatch_rejected() {
        let original = emb(&[("a", &[1.0]), ("b", &[1.0, 2.0])]);
        assert!(matches!(
            retrofit(&original, &lex(&[]), &Default::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn residual_key_mismatch() {
        let a = emb(&[("a", &[1.0])]);
        let b = emb(&[("b", &[1.0])]);
        assert!(retrofit_residual(&a, &b).is_err());
    }
}
