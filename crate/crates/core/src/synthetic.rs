//! Deterministic synthetic corpora with disjoint topic vocabularies.
//!
//! Each topic owns its own pseudo-words; every paper of a topic draws its
//! title and abstract from that vocabulary plus a small set of shared filler
//! words. Topic `t` is described by the tag made of its first two words, and
//! every title starts with those two words. Authors are tied to one topic.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AuthorRecord, Authorship, Corpus, PaperRecord};

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "be", "du", "fa", "go", "hi", "ju", "pe", "zo",
];

/// Shared words that occur in every abstract, frequent enough to become
/// corpus stopwords.
pub const FILLER: [&str; 6] = ["we", "study", "the", "of", "and", "results"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub papers_per_topic: usize,
    pub authors_per_topic: usize,
    pub words_per_topic: usize,
    /// Authors with an odd index get the variant tag `"<tag> methods"`
    /// instead of the topic tag.
    pub variant_tags: bool,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 5,
            papers_per_topic: 20,
            authors_per_topic: 6,
            words_per_topic: 12,
            variant_tags: false,
            seed: 7,
        }
    }
}

/// Pseudo-word `j` of topic `t`; distinct for distinct `(t, j)`.
pub fn topic_word(t: usize, j: usize) -> String {
    let mut n = t * 1000 + j;
    let mut w = String::new();
    for _ in 0..3 {
        w.push_str(SYLLABLES[n % 16]);
        n /= 16;
    }
    w.push_str(SYLLABLES[n % 16]);
    w
}

pub fn topic_tag(t: usize) -> String {
    format!("{} {}", topic_word(t, 0), topic_word(t, 1))
}

pub fn variant_tag(t: usize) -> String {
    format!("{} methods", topic_tag(t))
}

pub fn author_id(t: usize, k: usize) -> String {
    format!("a{t:03}-{k:02}")
}

pub fn paper_id(t: usize, i: usize) -> String {
    format!("p{t:03}-{i:03}")
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub spec: SyntheticSpec,
    pub papers: Vec<PaperRecord>,
    pub authors: Vec<AuthorRecord>,
}

impl SyntheticCorpus {
    pub fn generate(spec: SyntheticSpec) -> Self {
        assert!(spec.words_per_topic >= 4 && spec.authors_per_topic >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut papers = Vec::new();
        let mut authors = Vec::new();
        for t in 0..spec.topics {
            let vocab: Vec<String> = (0..spec.words_per_topic).map(|j| topic_word(t, j)).collect();
            for k in 0..spec.authors_per_topic {
                let tag = if spec.variant_tags && k % 2 == 1 { variant_tag(t) } else { topic_tag(t) };
                authors.push(AuthorRecord {
                    author_id: author_id(t, k),
                    name: format!("Author {t}-{k}"),
                    tags: vec![tag],
                    paper_ids: vec![],
                    n_pubs: 0,
                });
            }
            for i in 0..spec.papers_per_topic {
                let title = format!(
                    "{} {} {} {}",
                    vocab[0],
                    vocab[1],
                    vocab.choose(&mut rng).unwrap(),
                    vocab.choose(&mut rng).unwrap()
                );
                let n_sentences = rng.random_range(2..=3);
                let abstract_text = (0..n_sentences)
                    .map(|_| {
                        let mut words: Vec<&str> = FILLER.to_vec();
                        for _ in 0..rng.random_range(4..=7) {
                            words.push(vocab.choose(&mut rng).unwrap());
                        }
                        let mut s = words.join(" ");
                        s.push('.');
                        s
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                // the first author cycles so every author gets papers
                let n_authors = rng.random_range(1..=3.min(spec.authors_per_topic));
                let mut ks = vec![i % spec.authors_per_topic];
                while ks.len() < n_authors {
                    let k = rng.random_range(0..spec.authors_per_topic);
                    if !ks.contains(&k) {
                        ks.push(k);
                    }
                }
                let references = (0..i.min(3))
                    .map(|_| paper_id(t, rng.random_range(0..i)))
                    .collect();
                papers.push(PaperRecord {
                    paper_id: paper_id(t, i),
                    title,
                    abstract_text,
                    authors: ks
                        .iter()
                        .enumerate()
                        .map(|(pos, &k)| Authorship {
                            author_id: author_id(t, k),
                            position: pos + 1,
                        })
                        .collect(),
                    references,
                    n_citations: rng.random_range(0..200),
                });
            }
        }
        SyntheticCorpus { spec, papers, authors }
    }

    pub fn corpus(&self) -> Corpus {
        Corpus::from_parts(
            self.papers.iter().map(|p| (p.paper_id.clone(), p.clone())).collect::<BTreeMap<_, _>>(),
            self.authors.iter().map(|a| (a.author_id.clone(), a.clone())).collect(),
        )
    }

    /// Topic tags, which double as test queries.
    pub fn queries(&self) -> Vec<String> {
        (0..self.spec.topics).map(topic_tag).collect()
    }
}
