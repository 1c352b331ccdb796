//! Command-line pipeline and JSON/HTTP query service over an
//! [`expertvote::engine::Engine`].
//!
//! Both front ends answer queries through [`Engine::search`] and render
//! results with [`ExpertsResponse::from_ranking`], so the HTTP body is the
//! CLI `--json` output for the same config.
//!
//! [`Engine::search`]: expertvote::engine::Engine::search

pub mod cli;
pub mod http;

use expertvote::engine::Engine;
use expertvote::voting::ExpertRanking;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperVote {
    pub id: String,
    pub title: String,
    pub doc_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertView {
    pub id: String,
    pub name: String,
    pub score: f64,
    /// Papers that voted for the author, with their document scores.
    pub papers: Vec<PaperVote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertsResponse {
    pub query: String,
    pub experts: Vec<ExpertView>,
}

impl ExpertsResponse {
    pub fn from_ranking(engine: &Engine, query: &str, ranking: &ExpertRanking) -> Self {
        let corpus = engine.corpus();
        ExpertsResponse {
            query: query.to_string(),
            experts: ranking
                .entries
                .iter()
                .map(|e| ExpertView {
                    id: e.author_id.clone(),
                    name: corpus.author(&e.author_id).map(|a| a.name.clone()).unwrap_or_default(),
                    score: e.score,
                    papers: e
                        .evidence
                        .iter()
                        .map(|v| PaperVote {
                            id: v.paper_id.clone(),
                            title: corpus.paper(&v.paper_id).map(|p| p.title.clone()).unwrap_or_default(),
                            doc_score: v.doc_score,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
