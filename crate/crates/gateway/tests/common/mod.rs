//! A synthetic corpus on disk plus one extra single-author paper whose title
//! shares no words with anything else.

#![allow(dead_code)]

use std::path::PathBuf;

use expertvote::corpus::{AuthorRecord, Authorship, PaperRecord};
use expertvote::synthetic::{self, SyntheticCorpus, SyntheticSpec};

pub const SOLO_AUTHOR: &str = "solo";
pub const SOLO_TITLE: &str = "Quasicrystal Tiling Enumeration";

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub config: PathBuf,
    pub queries: PathBuf,
}

pub fn write_fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut synth = SyntheticCorpus::generate(SyntheticSpec::default());
    synth.papers.push(PaperRecord {
        paper_id: "solo-paper".into(),
        title: SOLO_TITLE.into(),
        abstract_text: String::new(),
        authors: vec![Authorship {
            author_id: SOLO_AUTHOR.into(),
            position: 1,
        }],
        references: vec![],
        n_citations: 3,
    });
    synth.authors.push(AuthorRecord {
        author_id: SOLO_AUTHOR.into(),
        name: "Solo Author".into(),
        tags: vec!["tilings".into()],
        paper_ids: vec![],
        n_pubs: 0,
    });
    let raw = dir.path().join("raw");
    std::fs::create_dir_all(&raw).unwrap();
    synth
        .corpus()
        .write_jsonl(&raw.join("papers.jsonl"), &raw.join("authors.jsonl"))
        .unwrap();
    let queries = dir.path().join("queries.txt");
    std::fs::write(&queries, synth.queries().join("\n") + "\n").unwrap();
    let config = dir.path().join("engine.toml");
    std::fs::write(
        &config,
        format!(
            "papers = \"raw/papers.jsonl\"\n\
             authors = \"raw/authors.jsonl\"\n\
             stopwords_top_k = {}\n\
             docs = 3\n\
             experts = 5\n\
             max_experts = 20\n\
             artifacts = \"artifacts\"\n",
            synthetic::FILLER.len()
        ),
    )
    .unwrap();
    Fixture { dir, config, queries }
}

pub fn path(f: &Fixture, rel: &str) -> PathBuf {
    f.dir.path().join(rel)
}
