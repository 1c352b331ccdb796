//! Paper embeddings.
//!
//! A paper is represented by one vector built from its title and abstract.
//! Contextual encoders run outside the engine and hand over one vector per
//! sentence (see [`emb1`]); the strategies here pool those sentence vectors
//! into a paper vector. Two self-contained baselines need no external
//! encoder: double pooling over static word vectors ([`WordVectors`]) and
//! latent semantic indexing ([`LsiModel`]).

pub mod emb1;
mod encoder;
mod lsi;
mod words;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use emb1::{load_sentence_embeddings, load_vector_table, write_vector_table, Emb1Writer, Role};
pub use encoder::{LookupEncoder, QueryEncoder, TextEncoder};
pub use lsi::LsiModel;
pub use words::{pooled_paper_embedding, pooled_text_embedding, WordVectors};

/// A dense real vector with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub(crate) Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("embedding must have dim > 0".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "embedding component {i} is not finite"
            )));
        }
        Ok(Embedding(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Embedding(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Unit-length copy; fails on the zero vector.
    pub fn normalized(&self) -> Result<Embedding> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Ok(Embedding(self.0.iter().map(|v| v / norm).collect()))
    }

    /// Cosine similarity; 0 when either side is the zero vector.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Element-wise mean of a non-empty set of equally sized vectors.
pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Embedding>) -> Result<Embedding> {
    let mut iter = vectors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Validation("mean of an empty set of vectors".into()))?;
    let mut acc = first.0.clone();
    let mut count = 1usize;
    for v in iter {
        if v.dim() != acc.len() {
            return Err(Error::Validation(format!(
                "dimension mismatch: {} vs {}",
                acc.len(),
                v.dim()
            )));
        }
        for (a, x) in acc.iter_mut().zip(&v.0) {
            *a += x;
        }
        count += 1;
    }
    let n = count as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(Embedding(acc))
}

/// Sentence vectors for one paper, as produced by an external encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddingSet {
    pub paper_id: String,
    pub title_embedding: Embedding,
    /// Abstract sentence vectors in sentence order.
    pub abstract_embeddings: Vec<Embedding>,
}

impl SentenceEmbeddingSet {
    fn check_dims(&self) -> Result<()> {
        let dim = self.title_embedding.dim();
        match self.abstract_embeddings.iter().find(|e| e.dim() != dim) {
            Some(e) => Err(Error::Validation(format!(
                "paper {:?}: sentence dim {} differs from title dim {dim}",
                self.paper_id,
                e.dim()
            ))),
            None => Ok(()),
        }
    }
}

/// Merge strategy: the title is one more sentence in a flat mean.
pub fn embed_merge(set: &SentenceEmbeddingSet) -> Result<Embedding> {
    set.check_dims()?;
    mean(std::iter::once(&set.title_embedding).chain(&set.abstract_embeddings))
}

/// Separate strategy: mean of the title vector and the mean abstract vector.
///
/// The title carries half the weight whatever the abstract length; an empty
/// abstract yields the title vector.
pub fn embed_separate(set: &SentenceEmbeddingSet) -> Result<Embedding> {
    set.check_dims()?;
    if set.abstract_embeddings.is_empty() {
        return Ok(set.title_embedding.clone());
    }
    let abstract_avg = mean(&set.abstract_embeddings)?;
    mean([&set.title_embedding, &abstract_avg])
}

/// Double pooling: token mean per sentence, then mean over sentences.
///
/// Sentences without tokens are skipped.
pub fn pool_double(sentences: &[Vec<Embedding>]) -> Result<Embedding> {
    let sentence_means = sentences
        .iter()
        .filter(|tokens| !tokens.is_empty())
        .map(mean)
        .collect::<Result<Vec<_>>>()?;
    if sentence_means.is_empty() {
        return Err(Error::Validation(
            "double pooling needs at least one token vector".into(),
        ));
    }
    mean(&sentence_means)
}

/// How paper vectors are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Merge,
    Separate,
    Pooled,
    Lsi,
}

impl std::str::FromStr for EmbedderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "merge" => Ok(EmbedderKind::Merge),
            "separate" => Ok(EmbedderKind::Separate),
            "pooled" => Ok(EmbedderKind::Pooled),
            "lsi" => Ok(EmbedderKind::Lsi),
            other => Err(Error::Argument(format!("unknown embedder {other:?}"))),
        }
    }
}

impl std::fmt::Display for EmbedderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EmbedderKind::Merge => "merge",
            EmbedderKind::Separate => "separate",
            EmbedderKind::Pooled => "pooled",
            EmbedderKind::Lsi => "lsi",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn set(title: &[f64], abs: &[&[f64]]) -> SentenceEmbeddingSet {
        SentenceEmbeddingSet {
            paper_id: "p".into(),
            title_embedding: e(title),
            abstract_embeddings: abs.iter().map(|v| e(v)).collect(),
        }
    }

    #[test]
    fn merge_examples() {
        assert_eq!(embed_merge(&set(&[2., 0.], &[&[0., 2.], &[1., 1.]])).unwrap(), e(&[1., 1.]));
        assert_eq!(embed_merge(&set(&[1., 1.], &[])).unwrap(), e(&[1., 1.]));
        let t = [0.3, -0.7, 2.0];
        let merged = embed_merge(&set(&t, &[&t, &t])).unwrap();
        for (a, b) in merged.as_slice().iter().zip(t) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn separate_examples() {
        assert_eq!(
            embed_separate(&set(&[1., 0.], &[&[0., 1.], &[0., 3.]])).unwrap(),
            e(&[0.5, 1.0])
        );
        let t = [0.25, 4.0];
        assert_eq!(embed_separate(&set(&t, &[&t])).unwrap(), e(&t));
    }

    #[test]
    fn separate_keeps_title_weight_fixed() {
        let s = set(&[1., 0.], &[&[0., 1.], &[0., 1.], &[0., 1.], &[0., 1.]]);
        assert_eq!(embed_separate(&s).unwrap(), e(&[0.5, 0.5]));
        let merged = embed_merge(&s).unwrap();
        assert!((merged.as_slice()[0] - 0.2).abs() < 1e-15);
        assert!((merged.as_slice()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dim_mismatch_rejected() {
        let s = set(&[1., 0.], &[&[0., 1., 2.]]);
        assert!(matches!(embed_merge(&s), Err(Error::Validation(_))));
        assert!(matches!(embed_separate(&s), Err(Error::Validation(_))));
    }

    #[test]
    fn double_pooling_examples() {
        assert_eq!(pool_double(&[vec![e(&[2., 0.]), e(&[0., 2.])]]).unwrap(), e(&[1., 1.]));
        assert_eq!(
            pool_double(&[vec![e(&[1., 0.])], vec![e(&[0., 1.])]]).unwrap(),
            e(&[0.5, 0.5])
        );
        // sentence means [4, 0] and [0, 2]; the flat token mean would be [4/3, 4/3]
        assert_eq!(
            pool_double(&[vec![e(&[4., 0.])], vec![e(&[0., 1.]), e(&[0., 3.])]]).unwrap(),
            e(&[2.0, 1.0])
        );
        assert!(pool_double(&[]).is_err());
        assert!(pool_double(&[vec![]]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Embedding::new(vec![f64::NAN]).is_err());
        assert!(Embedding::new(vec![]).is_err());
        assert!(Embedding::zeros(3).normalized().is_err());
    }

    fn vectors(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), 1..8)
    }

    proptest! {
        #[test]
        fn strategies_agree_on_single_sentence(t in prop::collection::vec(-5.0f64..5.0, 4), a in prop::collection::vec(-5.0f64..5.0, 4)) {
            let s = SentenceEmbeddingSet { paper_id: "p".into(), title_embedding: e(&t), abstract_embeddings: vec![e(&a)] };
            prop_assert_eq!(embed_merge(&s).unwrap(), embed_separate(&s).unwrap());
        }

        #[test]
        fn permutation_invariant_and_contained(title in prop::collection::vec(-10.0f64..10.0, 3), abs in vectors(3), shift in 0usize..8) {
            let mut rotated = abs.clone();
            let len = rotated.len();
            rotated.rotate_left(shift % len);
            let mk = |a: &Vec<Vec<f64>>| SentenceEmbeddingSet {
                paper_id: "p".into(),
                title_embedding: e(&title),
                abstract_embeddings: a.iter().map(|v| e(v)).collect(),
            };
            for f in [embed_merge, embed_separate] {
                let x = f(&mk(&abs)).unwrap();
                let y = f(&mk(&rotated)).unwrap();
                for d in 0..3 {
                    prop_assert!((x.as_slice()[d] - y.as_slice()[d]).abs() < 1e-12);
                    let column = abs.iter().map(|v| v[d]).chain([title[d]]);
                    let (lo, hi) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                    prop_assert!(x.as_slice()[d] >= lo - 1e-12 && x.as_slice()[d] <= hi + 1e-12);
                }
            }
        }
    }
}
