//! Latent semantic indexing: TF-IDF rows projected onto the leading right
//! singular vectors of the training TF-IDF matrix.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::Embedding;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LSI1";

#[derive(Debug, Clone, PartialEq)]
pub struct LsiModel {
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    /// vocab_size x k, orthonormal columns.
    projection: DMatrix<f64>,
}

impl LsiModel {
    /// Fits on cleaned documents (whitespace-tokenized).
    pub fn fit(documents: &[String], k: usize) -> Result<LsiModel> {
        Self::fit_transform(documents, k).map(|(m, _)| m)
    }

    /// Fits and returns the latent coordinates of the training documents,
    /// taken from the decomposition itself (`U_k * S_k`).
    pub fn fit_transform(documents: &[String], k: usize) -> Result<(LsiModel, Vec<Embedding>)> {
        if documents.is_empty() {
            return Err(Error::Fit("no documents to fit".into()));
        }
        if k == 0 {
            return Err(Error::Argument("LSI dimension must be at least 1".into()));
        }
        let mut vocabulary = BTreeMap::new();
        for doc in documents {
            for tok in doc.split_whitespace() {
                vocabulary.entry(tok.to_string()).or_insert(0);
            }
        }
        if vocabulary.is_empty() {
            return Err(Error::Fit("empty vocabulary".into()));
        }
        for (i, slot) in vocabulary.values_mut().enumerate() {
            *slot = i;
        }

        let n_docs = documents.len();
        let mut df = vec![0usize; vocabulary.len()];
        let counts: Vec<BTreeMap<usize, f64>> = documents
            .iter()
            .map(|doc| term_counts(&vocabulary, doc))
            .collect();
        for row in &counts {
            for &col in row.keys() {
                df[col] += 1;
            }
        }
        let idf: Vec<f64> = df
            .iter()
            .map(|&d| (n_docs as f64 / d as f64).ln())
            .collect();

        let mut tfidf = DMatrix::<f64>::zeros(n_docs, vocabulary.len());
        for (r, row) in counts.iter().enumerate() {
            for (&c, &tf) in row {
                tfidf[(r, c)] = tf * idf[c];
            }
        }

        let svd = tfidf.clone().svd(true, true);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let sigma = &svd.singular_values;

        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
        let sigma_max = order.first().map_or(0.0, |&i| sigma[i]);
        let tol = sigma_max * n_docs.max(vocabulary.len()) as f64 * f64::EPSILON;
        let rank = order.iter().filter(|&&i| sigma[i] > tol).count();
        if rank == 0 {
            return Err(Error::Fit(
                "TF-IDF matrix is zero (every term occurs in every document)".into(),
            ));
        }
        let dim = k.min(rank);

        let mut projection = DMatrix::<f64>::zeros(vocabulary.len(), dim);
        let mut doc_coords = DMatrix::<f64>::zeros(n_docs, dim);
        for (j, &src) in order.iter().take(dim).enumerate() {
            let mut col: Vec<f64> = v_t.row(src).iter().copied().collect();
            let mut left: Vec<f64> = u.column(src).iter().copied().collect();
            // fix the sign so the largest-magnitude entry is positive
            let pivot = col
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if v.abs() > col[best].abs() { i } else { best });
            if col[pivot] < 0.0 {
                col.iter_mut().for_each(|v| *v = -*v);
                left.iter_mut().for_each(|v| *v = -*v);
            }
            for (i, v) in col.into_iter().enumerate() {
                projection[(i, j)] = v;
            }
            for (i, v) in left.into_iter().enumerate() {
                doc_coords[(i, j)] = v * sigma[src];
            }
        }

        let model = LsiModel {
            vocabulary,
            idf,
            projection,
        };
        let rows = (0..n_docs)
            .map(|r| Embedding(doc_coords.row(r).iter().copied().collect()))
            .collect();
        Ok((model, rows))
    }

    /// Effective dimension `k' = min(k, rank)`.
    pub fn dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    /// Projects a cleaned document. Unseen tokens are ignored, so a document
    /// made only of unseen tokens maps to the zero vector.
    pub fn embed(&self, document: &str) -> Embedding {
        let mut out = vec![0.0; self.dim()];
        for (c, tf) in term_counts(&self.vocabulary, document) {
            let weight = tf * self.idf[c];
            if weight == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += weight * self.projection[(c, j)];
            }
        }
        Embedding(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.vocabulary.len() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for (token, &col) in &self.vocabulary {
            buf.extend_from_slice(&(token.len() as u32).to_le_bytes());
            buf.extend_from_slice(token.as_bytes());
            buf.extend_from_slice(&self.idf[col].to_le_bytes());
            for j in 0..self.dim() {
                buf.extend_from_slice(&self.projection[(col, j)].to_le_bytes());
            }
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<LsiModel> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            if bytes.len() - pos < n {
                return Err(Error::format(pos as u64, "truncated LSI model"));
            }
            pos += n;
            Ok(&bytes[pos - n..pos])
        };
        if take(4)? != MAGIC {
            return Err(Error::format(0, "bad magic, expected \"LSI1\""));
        }
        let vocab = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(vocab);
        let mut projection = DMatrix::<f64>::zeros(vocab, dim);
        for col in 0..vocab {
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let token = String::from_utf8(take(len)?.to_vec())
                .map_err(|_| Error::format(0, "token is not UTF-8"))?;
            vocabulary.insert(token, col);
            idf.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
            for j in 0..dim {
                projection[(col, j)] = f64::from_le_bytes(take(8)?.try_into().unwrap());
            }
        }
        Ok(LsiModel {
            vocabulary,
            idf,
            projection,
        })
    }
}

fn term_counts(vocabulary: &BTreeMap<String, usize>, doc: &str) -> BTreeMap<usize, f64> {
    let mut counts = BTreeMap::new();
    for tok in doc.split_whitespace() {
        if let Some(&c) = vocabulary.get(tok) {
            *counts.entry(c).or_insert(0.0) += 1.0;
        }
    }
    counts
}
