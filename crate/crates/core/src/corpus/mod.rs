//! The paper/author corpus: data model, JSONL ingestion and serialization.
//!
//! Papers and authors are read from two JSONL files. Linking happens once at
//! load time: every author listed on a paper gets the paper appended to their
//! profile, and the profile length (`n_pubs`) is recomputed from those links.
//! The resulting [`Corpus`] is immutable.

mod sampling;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sampling::{
    proportional_allocation, publication_bin, sampling_eligible, stratified_author_sample,
    PublicationBin,
};
pub use text::{
    clean_text, corpus_stopwords, load_stopwords, normalize_tag, split_sentences,
    write_stopwords, Stopwords,
};

/// One author slot on a paper. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Authorship {
    pub author_id: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    pub abstract_text: String,
    /// Ordered by position; positions are exactly `1..=authors.len()`.
    pub authors: Vec<Authorship>,
    pub references: Vec<String>,
    pub n_citations: u64,
}

impl PaperRecord {
    /// Position of `author_id` on this paper, if listed.
    pub fn position_of(&self, author_id: &str) -> Option<usize> {
        self.authors
            .iter()
            .find(|a| a.author_id == author_id)
            .map(|a| a.position)
    }

    /// Title and abstract joined as one text.
    pub fn full_text(&self) -> String {
        if self.abstract_text.is_empty() {
            self.title.clone()
        } else {
            format!("{} {}", self.title, self.abstract_text)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorRecord {
    pub author_id: String,
    pub name: String,
    /// Normalized field-of-work tags.
    pub tags: Vec<String>,
    pub paper_ids: Vec<String>,
    /// Profile length; equal to `paper_ids.len()` once linked.
    pub n_pubs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    papers: BTreeMap<String, PaperRecord>,
    authors: BTreeMap<String, AuthorRecord>,
    avg_publications: f64,
}

/// Non-fatal anomalies found while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    /// Author references on papers that name no known author.
    pub dropped_author_refs: usize,
    /// References pointing at the citing paper itself.
    pub dropped_self_references: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct PaperLine {
    id: String,
    title: String,
    #[serde(rename = "abstract", default)]
    abstract_text: String,
    authors: Vec<AuthorRefLine>,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default)]
    n_citations: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AuthorRefLine {
    id: String,
    #[serde(default)]
    name: String,
    position: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct AuthorLine {
    id: String,
    name: String,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    n_pubs: usize,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((idx + 1, value));
    }
    Ok(out)
}

impl Corpus {
    /// Loads and links `papers.jsonl` and `authors.jsonl`.
    pub fn load(papers_path: &Path, authors_path: &Path) -> Result<(Corpus, LoadWarnings)> {
        let author_lines: Vec<(usize, AuthorLine)> = read_jsonl(authors_path)?;
        let paper_lines: Vec<(usize, PaperLine)> = read_jsonl(papers_path)?;

        let mut authors = BTreeMap::new();
        for (line, a) in author_lines {
            if a.id.is_empty() {
                return Err(Error::Validation(format!(
                    "{}:{line}: empty author id",
                    authors_path.display()
                )));
            }
            let record = AuthorRecord {
                author_id: a.id.clone(),
                name: a.name,
                tags: dedup_tags(a.tags.iter().map(|t| normalize_tag(t))),
                paper_ids: Vec::new(),
                n_pubs: 0,
            };
            if authors.insert(a.id.clone(), record).is_some() {
                return Err(Error::Validation(format!(
                    "{}:{line}: duplicate author id {:?}",
                    authors_path.display(),
                    a.id
                )));
            }
        }

        let mut warnings = LoadWarnings::default();
        let mut papers = BTreeMap::new();
        for (line, p) in paper_lines {
            let where_ = || format!("{}:{line}", papers_path.display());
            if p.id.is_empty() {
                return Err(Error::Validation(format!("{}: empty paper id", where_())));
            }
            if papers.contains_key(&p.id) {
                return Err(Error::Validation(format!(
                    "{}: duplicate paper id {:?}",
                    where_(),
                    p.id
                )));
            }
            let mut slots = p.authors;
            slots.sort_by_key(|a| a.position);
            for (i, slot) in slots.iter().enumerate() {
                if slot.position != i + 1 {
                    return Err(Error::Validation(format!(
                        "{}: paper {:?} author positions must be exactly 1..={}",
                        where_(),
                        p.id,
                        slots.len()
                    )));
                }
            }
            let mut seen_authors = BTreeSet::new();
            let mut kept = Vec::with_capacity(slots.len());
            for slot in slots {
                if !authors.contains_key(&slot.id) {
                    warnings.dropped_author_refs += 1;
                    continue;
                }
                if !seen_authors.insert(slot.id.clone()) {
                    return Err(Error::Validation(format!(
                        "{}: paper {:?} lists author {:?} twice",
                        where_(),
                        p.id,
                        slot.id
                    )));
                }
                kept.push(Authorship {
                    author_id: slot.id,
                    position: kept.len() + 1,
                });
            }
            let mut seen_refs = BTreeSet::new();
            let mut references = Vec::with_capacity(p.references.len());
            for r in p.references {
                if r == p.id {
                    warnings.dropped_self_references += 1;
                } else if seen_refs.insert(r.clone()) {
                    references.push(r);
                }
            }
            papers.insert(
                p.id.clone(),
                PaperRecord {
                    paper_id: p.id,
                    title: p.title,
                    abstract_text: p.abstract_text,
                    authors: kept,
                    references,
                    n_citations: p.n_citations,
                },
            );
        }

        Ok((Corpus::from_parts(papers, authors), warnings))
    }

    /// Links papers to authors and computes the average profile length.
    ///
    /// Every author on every paper must be present in `authors`.
    pub fn from_parts(
        papers: BTreeMap<String, PaperRecord>,
        mut authors: BTreeMap<String, AuthorRecord>,
    ) -> Corpus {
        for a in authors.values_mut() {
            a.paper_ids.clear();
        }
        for paper in papers.values() {
            for slot in &paper.authors {
                let author = authors
                    .get_mut(&slot.author_id)
                    .expect("paper author missing from author table");
                author.paper_ids.push(paper.paper_id.clone());
            }
        }
        for a in authors.values_mut() {
            a.n_pubs = a.paper_ids.len();
        }
        let avg_publications = if authors.is_empty() {
            0.0
        } else {
            authors.values().map(|a| a.n_pubs as f64).sum::<f64>() / authors.len() as f64
        };
        Corpus {
            papers,
            authors,
            avg_publications,
        }
    }

    pub fn papers(&self) -> &BTreeMap<String, PaperRecord> {
        &self.papers
    }

    pub fn authors(&self) -> &BTreeMap<String, AuthorRecord> {
        &self.authors
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn author(&self, id: &str) -> Option<&AuthorRecord> {
        self.authors.get(id)
    }

    /// Mean profile length over all authors (`aL`); 0 for an empty corpus.
    pub fn avg_publications(&self) -> f64 {
        self.avg_publications
    }

    /// Writes the corpus back out in the ingestion format.
    pub fn write_jsonl(&self, papers_path: &Path, authors_path: &Path) -> Result<()> {
        let mut out = create(papers_path)?;
        for p in self.papers.values() {
            let line = PaperLine {
                id: p.paper_id.clone(),
                title: p.title.clone(),
                abstract_text: p.abstract_text.clone(),
                authors: p
                    .authors
                    .iter()
                    .map(|a| AuthorRefLine {
                        id: a.author_id.clone(),
                        name: self.authors[&a.author_id].name.clone(),
                        position: a.position,
                    })
                    .collect(),
                references: p.references.clone(),
                n_citations: p.n_citations,
            };
            write_line(&mut out, papers_path, &line)?;
        }
        out.flush().map_err(|e| Error::io(papers_path, e))?;

        let mut out = create(authors_path)?;
        for a in self.authors.values() {
            let line = AuthorLine {
                id: a.author_id.clone(),
                name: a.name.clone(),
                tags: a.tags.clone(),
                n_pubs: a.n_pubs,
            };
            write_line(&mut out, authors_path, &line)?;
        }
        out.flush().map_err(|e| Error::io(authors_path, e))
    }
}

fn dedup_tags(tags: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    tags.filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_line<T: Serialize>(out: &mut impl Write, path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string(value).expect("corpus records serialize");
    writeln!(out, "{json}").map_err(|e| Error::io(path, e))
}
