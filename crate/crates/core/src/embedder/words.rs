use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{pool_double, Embedding};
use crate::corpus::{clean_text, split_sentences, PaperRecord, Stopwords};
use crate::error::{Error, Result};

/// Static word vectors in the GloVe text layout (`word v1 v2 ... vd` per line).
#[derive(Debug, Clone)]
pub struct WordVectors {
    dim: usize,
    vectors: HashMap<String, Embedding>,
}

impl WordVectors {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Embedding)>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (word, v) in pairs {
            match dim {
                None => dim = Some(v.dim()),
                Some(d) if d != v.dim() => {
                    return Err(Error::Validation(format!(
                        "word {word:?} has dim {} but expected {d}",
                        v.dim()
                    )))
                }
                _ => {}
            }
            vectors.insert(word, v);
        }
        let dim = dim.ok_or_else(|| Error::Validation("no word vectors".into()))?;
        Ok(WordVectors { dim, vectors })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values = parts
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    file: path.display().to_string(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            let v = Embedding::new(values).map_err(|e| Error::Parse {
                file: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            pairs.push((word.to_string(), v));
        }
        Self::from_pairs(pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&Embedding> {
        self.vectors.get(word)
    }
}

fn sentence_tokens(sentence: &str, words: &WordVectors, stopwords: &Stopwords) -> Vec<Embedding> {
    clean_text(sentence, stopwords)
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter_map(|t| words.get(t).cloned())
        .collect()
}

/// Double-pooled paper vector: the title is one more sentence next to the
/// abstract sentences. Tokens are looked up with surrounding punctuation
/// trimmed, and tokens without a vector are skipped; `None` when no
/// token of the paper has a vector.
pub fn pooled_paper_embedding(
    paper: &PaperRecord,
    words: &WordVectors,
    stopwords: &Stopwords,
) -> Option<Embedding> {
    let sentences: Vec<Vec<Embedding>> = std::iter::once(paper.title.clone())
        .chain(split_sentences(&paper.abstract_text))
        .map(|s| sentence_tokens(&s, words, stopwords))
        .collect();
    pool_double(&sentences).ok()
}

/// A short text (query or tag) pooled as a single sentence.
pub fn pooled_text_embedding(text: &str, words: &WordVectors, stopwords: &Stopwords) -> Option<Embedding> {
    pool_double(&[sentence_tokens(text, words, stopwords)]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_title_as_a_sentence() {
        let words = WordVectors::from_pairs([
            ("graph".to_string(), Embedding::new(vec![4.0, 0.0]).unwrap()),
            ("neural".to_string(), Embedding::new(vec![0.0, 1.0]).unwrap()),
            ("nets".to_string(), Embedding::new(vec![0.0, 3.0]).unwrap()),
        ])
        .unwrap();
        let paper = PaperRecord {
            paper_id: "p".into(),
            title: "Graph".into(),
            abstract_text: "Neural unknown nets.".into(),
            authors: vec![],
            references: vec![],
            n_citations: 0,
        };
        let v = pooled_paper_embedding(&paper, &words, &Stopwords::new()).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 1.0]);
    }

    #[test]
    fn no_known_tokens_gives_none() {
        let words =
            WordVectors::from_pairs([("x".to_string(), Embedding::new(vec![1.0]).unwrap())]).unwrap();
        let paper = PaperRecord {
            paper_id: "p".into(),
            title: "nothing".into(),
            abstract_text: String::new(),
            authors: vec![],
            references: vec![],
            n_citations: 0,
        };
        assert!(pooled_paper_embedding(&paper, &words, &Stopwords::new()).is_none());
    }
}
