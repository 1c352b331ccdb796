//! Expert ranking by document voting.
//!
//! Every retrieved paper votes for each of its authors. A vote is worth
//! `w * exp(s)`, where `s` is the paper's cosine similarity to the query and
//! `w` an authorship weight that depends on the author's position in the
//! byline. An author's score is the sum of the votes received (ExpCombSUM).
//! Optionally the sum is rescaled by a candidate-length factor
//! `log2(1 + alpha * aL / (lP + beta))`, where `lP` is the author's
//! publication count and `aL` the corpus average.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::embedder::Embedding;
use crate::error::{Error, Result};
use crate::vindex::{ScoredDocument, VectorIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingKind {
    /// Every author gets the full vote.
    Binary,
    /// The vote is split evenly between authors.
    Uniform,
    /// First author full vote, then a decaying share.
    Descending,
    /// First and last author full vote, the rest as in `Descending`.
    Parabolic,
}

impl std::str::FromStr for WeightingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(WeightingKind::Binary),
            "uniform" => Ok(WeightingKind::Uniform),
            "descending" => Ok(WeightingKind::Descending),
            "parabolic" => Ok(WeightingKind::Parabolic),
            other => Err(Error::Argument(format!("unknown weighting {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightingStrategy {
    pub kind: WeightingKind,
    /// Weight of the second author.
    pub descending_start: f64,
    /// Decrement per further position.
    pub descending_step: f64,
    /// Lower bound for decayed weights.
    pub floor: f64,
}

impl Default for WeightingStrategy {
    fn default() -> Self {
        WeightingStrategy::new(WeightingKind::Binary)
    }
}

impl WeightingStrategy {
    pub fn new(kind: WeightingKind) -> Self {
        WeightingStrategy {
            kind,
            descending_start: 0.8,
            descending_step: 0.2,
            floor: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.floor > 0.0
            && self.floor <= self.descending_start
            && self.descending_start <= 1.0
            && self.descending_step >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "weighting needs 0 < floor <= descending_start <= 1 and step >= 0, got {self:?}"
            )))
        }
    }

    fn decayed(&self, position: usize) -> f64 {
        if position == 1 {
            1.0
        } else {
            (self.descending_start - self.descending_step * (position - 2) as f64).max(self.floor)
        }
    }
}

/// Share of a document's vote given to the author at `position` (1-based).
pub fn author_weight(position: usize, n_authors: usize, strategy: &WeightingStrategy) -> Result<f64> {
    if position == 0 || position > n_authors {
        return Err(Error::Argument(format!(
            "author position {position} outside 1..={n_authors}"
        )));
    }
    Ok(match strategy.kind {
        WeightingKind::Binary => 1.0,
        WeightingKind::Uniform => 1.0 / n_authors as f64,
        WeightingKind::Descending => strategy.decayed(position),
        WeightingKind::Parabolic if position == n_authors => 1.0,
        WeightingKind::Parabolic => strategy.decayed(position),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub enabled: bool,
    pub alpha: f64,
    pub beta: f64,
    /// Average profile length of the corpus.
    pub avg_publications: f64,
}

impl NormalizationParams {
    pub fn disabled() -> Self {
        NormalizationParams {
            enabled: false,
            alpha: 1.0,
            beta: 0.0,
            avg_publications: 1.0,
        }
    }
}

/// Applies the candidate-length factor to an aggregated score.
pub fn normalize_score(score: f64, profile_len: usize, params: &NormalizationParams) -> Result<f64> {
    if !params.enabled {
        return Ok(score);
    }
    if params.alpha <= 0.0 || params.beta < 0.0 {
        return Err(Error::Argument(format!(
            "normalization needs alpha > 0 and beta >= 0, got alpha={} beta={}",
            params.alpha, params.beta
        )));
    }
    let length = profile_len as f64 + params.beta;
    if length == 0.0 {
        return Err(Error::Domain(
            "profile length plus beta is zero".into(),
        ));
    }
    Ok(score * (1.0 + params.alpha * params.avg_publications / length).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(rename = "paper")]
    pub paper_id: String,
    pub doc_score: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertEntry {
    #[serde(rename = "id")]
    pub author_id: String,
    pub score: f64,
    pub evidence: Vec<Evidence>,
}

/// Experts sorted by score descending, ties by author id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpertRanking {
    pub entries: Vec<ExpertEntry>,
}

impl ExpertRanking {
    fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.author_id.cmp(&b.author_id))
        });
    }

    pub fn truncate(&mut self, n: usize) {
        self.entries.truncate(n);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.author_id.as_str())
    }
}

/// Weighted ExpCombSUM over a retrieved set.
///
/// Documents are folded in (score desc, id asc) order, so the result does
/// not depend on the order of `retrieved`.
pub fn exp_comb_sum(
    retrieved: &[ScoredDocument],
    corpus: &Corpus,
    strategy: &WeightingStrategy,
) -> Result<ExpertRanking> {
    strategy.validate()?;
    let mut docs: Vec<&ScoredDocument> = retrieved.iter().collect();
    docs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.paper_id.cmp(&b.paper_id))
    });
    let mut by_author: BTreeMap<&str, ExpertEntry> = BTreeMap::new();
    for doc in docs {
        let paper = corpus.paper(&doc.paper_id).ok_or_else(|| {
            Error::Validation(format!("retrieved paper {:?} is not in the corpus", doc.paper_id))
        })?;
        let vote = doc.score.exp();
        let n = paper.authors.len();
        for slot in &paper.authors {
            let weight = author_weight(slot.position, n, strategy)?;
            let entry = by_author.entry(&slot.author_id).or_insert_with(|| ExpertEntry {
                author_id: slot.author_id.clone(),
                score: 0.0,
                evidence: Vec::new(),
            });
            entry.score += weight * vote;
            entry.evidence.push(Evidence {
                paper_id: doc.paper_id.clone(),
                doc_score: doc.score,
                weight,
            });
        }
    }
    let mut ranking = ExpertRanking {
        entries: by_author.into_values().collect(),
    };
    ranking.sort();
    Ok(ranking)
}

/// Rescales every entry by its candidate-length factor and re-sorts.
pub fn normalize_ranking(
    ranking: &mut ExpertRanking,
    corpus: &Corpus,
    params: &NormalizationParams,
) -> Result<()> {
    if !params.enabled {
        return Ok(());
    }
    for entry in &mut ranking.entries {
        let profile = corpus.author(&entry.author_id).map_or(0, |a| a.n_pubs);
        entry.score = normalize_score(entry.score, profile, params)?;
    }
    ranking.sort();
    Ok(())
}

/// Retrieval, voting and optional normalization for one query vector.
pub fn rank_experts(
    query: &Embedding,
    index: &VectorIndex,
    corpus: &Corpus,
    strategy: &WeightingStrategy,
    norm: &NormalizationParams,
    n_docs: usize,
    n_experts: usize,
) -> Result<ExpertRanking> {
    let retrieved = index.search(query, n_docs)?;
    let mut ranking = exp_comb_sum(&retrieved, corpus, strategy)?;
    normalize_ranking(&mut ranking, corpus, norm)?;
    ranking.truncate(n_experts);
    Ok(ranking)
}

/// One line of a run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLine {
    pub query: String,
    pub experts: Vec<ExpertEntry>,
}

pub fn write_run(path: &Path, lines: &[RunLine]) -> Result<()> {
    let mut out = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut out, line).expect("run lines serialize");
        out.push(b'\n');
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn read_run(path: &Path) -> Result<Vec<RunLine>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (idx, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(lines)
}
