//! End-to-end pipeline and the query engine shared by the CLI and the HTTP
//! service.
//!
//! Stages run in order and hand over through files in the artifact
//! directory:
//!
//! | stage    | reads                         | writes                                        |
//! |----------|-------------------------------|-----------------------------------------------|
//! | ingest   | raw papers, authors           | `papers.jsonl`, `authors.jsonl`, `stopwords.txt` |
//! | embed    | corpus, sentence/word vectors | `embeddings.emb1`, `lsi.bin` (LSI only)       |
//! | retrofit | embeddings, citation lexicon  | `retrofitted.emb1`                            |
//! | index    | (retrofitted) embeddings      | `index.vidx`                                  |
//!
//! [`Engine::open`] loads those artifacts; [`Engine::build`] runs the same
//! stages in memory without touching the artifact directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{corpus_stopwords, load_stopwords, write_stopwords, Corpus, LoadWarnings, Stopwords};
use crate::embedder::{
    embed_merge, embed_separate, load_sentence_embeddings, load_vector_table, pooled_paper_embedding,
    write_vector_table, EmbedderKind, Embedding, LookupEncoder, LsiModel, QueryEncoder, TextEncoder,
    WordVectors,
};
use crate::error::{Error, Result};
use crate::evaluation::{build_judgments, ApproxJudge, QueryJudgment};
use crate::retrofit::{retrofit, CitationLexicon, RetrofitConfig};
use crate::vindex::{Backend, HnswParams, VectorIndex};
use crate::voting::{rank_experts, ExpertRanking, NormalizationParams, RunLine, WeightingKind, WeightingStrategy};

pub const ENV_PREFIX: &str = "EXPERTVOTE_";

/// Declarative experiment configuration, one TOML file per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub papers: PathBuf,
    pub authors: PathBuf,
    /// Explicit stopword list; when absent the `stopwords_top_k` most
    /// frequent corpus tokens are used.
    pub stopwords: Option<PathBuf>,
    pub stopwords_top_k: usize,
    pub embedder: EmbedderKind,
    pub lsi_dim: usize,
    /// EMB1 sentence vectors, for `merge` and `separate`.
    pub sentences: Option<PathBuf>,
    /// GloVe-style word vectors, for `pooled`.
    pub word_vectors: Option<PathBuf>,
    /// EMB1 title-role vectors keyed by query or tag text, for `merge` and
    /// `separate`.
    pub query_embeddings: Option<PathBuf>,
    pub retrofit: bool,
    pub retrofit_iterations: usize,
    /// `{"id", "neighbors"}` lines; when absent the corpus references are used.
    pub lexicon: Option<PathBuf>,
    pub symmetrize: bool,
    pub backend: Backend,
    pub hnsw: HnswParams,
    pub weighting: WeightingKind,
    pub normalization: bool,
    pub alpha: f64,
    pub beta: f64,
    /// Papers retrieved per query.
    pub docs: usize,
    /// Experts returned per query by default.
    pub experts: usize,
    /// Upper bound on experts a single request may ask for.
    pub max_experts: usize,
    /// Cosine threshold for approximate relevance.
    pub threshold: f64,
    pub artifacts: PathBuf,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            papers: "papers.jsonl".into(),
            authors: "authors.jsonl".into(),
            stopwords: None,
            stopwords_top_k: 100,
            embedder: EmbedderKind::Lsi,
            lsi_dim: 768,
            sentences: None,
            word_vectors: None,
            query_embeddings: None,
            retrofit: false,
            retrofit_iterations: 10,
            lexicon: None,
            symmetrize: false,
            backend: Backend::Exact,
            hnsw: HnswParams::default(),
            weighting: WeightingKind::Binary,
            normalization: false,
            alpha: 1.0,
            beta: 0.0,
            docs: 100,
            experts: 10,
            max_experts: 100,
            threshold: 0.7,
            artifacts: "artifacts".into(),
        }
    }
}

fn env_value(raw: &str) -> toml::Value {
    // bare words such as `hnsw` or `true` parse as TOML where possible,
    // otherwise they are taken as strings
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl EngineConfig {
    /// Parses TOML text, applies `EXPERTVOTE_*` overrides from `env`, and
    /// resolves relative paths against `base`.
    pub fn from_toml(
        text: &str,
        base: &Path,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<EngineConfig> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (key, raw) in env {
            let Some(name) = key.strip_prefix(ENV_PREFIX) else { continue };
            let name = name.to_ascii_lowercase();
            let value = env_value(&raw);
            if let Some(field) = name.strip_prefix("hnsw_") {
                let nested = table
                    .entry("hnsw")
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()));
                let toml::Value::Table(nested) = nested else {
                    return Err(Error::Config("`hnsw` must be a table".into()));
                };
                nested.insert(field.to_string(), value);
            } else {
                table.insert(name, value);
            }
        }
        let mut config: EngineConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file, with overrides from the process environment.
    pub fn load(path: &Path) -> Result<EngineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, std::env::vars())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.papers);
        fix(&mut self.authors);
        fix(&mut self.artifacts);
        for p in [
            &mut self.stopwords,
            &mut self.sentences,
            &mut self.word_vectors,
            &mut self.query_embeddings,
            &mut self.lexicon,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Range checks; file existence is checked by the stage that reads a file.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.docs == 0 {
            return fail("docs must be at least 1".into());
        }
        if self.max_experts == 0 || self.experts > self.max_experts {
            return fail(format!(
                "need 1 <= max_experts and experts <= max_experts, got {} / {}",
                self.experts, self.max_experts
            ));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return fail(format!("threshold must be in (0, 1], got {}", self.threshold));
        }
        if self.lsi_dim == 0 || self.retrofit_iterations == 0 {
            return fail("lsi_dim and retrofit_iterations must be at least 1".into());
        }
        if self.normalization && !(self.alpha > 0.0 && self.beta >= 0.0) {
            return fail(format!("normalization needs alpha > 0 and beta >= 0, got {} / {}", self.alpha, self.beta));
        }
        if self.backend == Backend::Hnsw && (self.hnsw.m < 2 || self.hnsw.ef_construction == 0 || self.hnsw.ef_search == 0) {
            return fail("hnsw needs m >= 2 and positive ef values".into());
        }
        match self.embedder {
            EmbedderKind::Merge | EmbedderKind::Separate if self.sentences.is_none() => {
                fail(format!("embedder {} needs `sentences`", self.embedder))
            }
            EmbedderKind::Pooled if self.word_vectors.is_none() => fail("embedder pooled needs `word_vectors`".into()),
            _ => Ok(()),
        }
    }

    pub fn strategy(&self) -> WeightingStrategy {
        WeightingStrategy::new(self.weighting)
    }

    pub fn normalization_params(&self, corpus: &Corpus) -> NormalizationParams {
        NormalizationParams {
            enabled: self.normalization,
            alpha: self.alpha,
            beta: self.beta,
            avg_publications: corpus.avg_publications(),
        }
    }

    pub fn artifact_paths(&self) -> Artifacts {
        Artifacts::new(&self.artifacts)
    }
}

/// File names inside the artifact directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }
    pub fn papers(&self) -> PathBuf {
        self.dir.join("papers.jsonl")
    }
    pub fn authors(&self) -> PathBuf {
        self.dir.join("authors.jsonl")
    }
    pub fn stopwords(&self) -> PathBuf {
        self.dir.join("stopwords.txt")
    }
    pub fn embeddings(&self) -> PathBuf {
        self.dir.join("embeddings.emb1")
    }
    pub fn lsi_model(&self) -> PathBuf {
        self.dir.join("lsi.bin")
    }
    pub fn retrofitted(&self) -> PathBuf {
        self.dir.join("retrofitted.emb1")
    }
    pub fn index(&self) -> PathBuf {
        self.dir.join("index.vidx")
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ))
    }
}

pub struct Ingested {
    pub corpus: Corpus,
    pub warnings: LoadWarnings,
    pub stopwords: Stopwords,
}

pub fn ingest(config: &EngineConfig) -> Result<Ingested> {
    let (corpus, warnings) = Corpus::load(&config.papers, &config.authors)?;
    let stopwords = match &config.stopwords {
        Some(path) => load_stopwords(path)?,
        None => corpus_stopwords(&corpus, config.stopwords_top_k),
    };
    Ok(Ingested {
        corpus,
        warnings,
        stopwords,
    })
}

pub struct Embedded {
    pub vectors: BTreeMap<String, Embedding>,
    pub lsi: Option<LsiModel>,
    /// Corpus papers left without a vector.
    pub skipped: usize,
}

pub fn embed_papers(config: &EngineConfig, corpus: &Corpus, stopwords: &Stopwords) -> Result<Embedded> {
    let mut vectors = BTreeMap::new();
    let mut lsi = None;
    match config.embedder {
        EmbedderKind::Merge | EmbedderKind::Separate => {
            let path = config.sentences.as_deref().expect("validated");
            let sets = load_sentence_embeddings(path)?;
            for id in corpus.papers().keys() {
                let Some(set) = sets.get(id) else { continue };
                let v = match config.embedder {
                    EmbedderKind::Merge => embed_merge(set)?,
                    _ => embed_separate(set)?,
                };
                vectors.insert(id.clone(), v);
            }
        }
        EmbedderKind::Pooled => {
            let words = WordVectors::load(config.word_vectors.as_deref().expect("validated"))?;
            for (id, paper) in corpus.papers() {
                if let Some(v) = pooled_paper_embedding(paper, &words, stopwords) {
                    vectors.insert(id.clone(), v);
                }
            }
        }
        EmbedderKind::Lsi => {
            let ids: Vec<&String> = corpus.papers().keys().collect();
            let docs: Vec<String> = corpus
                .papers()
                .values()
                .map(|p| crate::corpus::clean_text(&p.full_text(), stopwords))
                .collect();
            let (model, rows) = LsiModel::fit_transform(&docs, config.lsi_dim)?;
            for (id, v) in ids.into_iter().zip(rows) {
                if !v.is_zero() {
                    vectors.insert(id.clone(), v);
                }
            }
            lsi = Some(model);
        }
    }
    // zero vectors cannot be indexed under cosine similarity
    vectors.retain(|_, v: &mut Embedding| !v.is_zero());
    Ok(Embedded {
        skipped: corpus.papers().len() - vectors.len(),
        vectors,
        lsi,
    })
}

pub fn citation_lexicon(config: &EngineConfig, corpus: &Corpus) -> Result<CitationLexicon> {
    match &config.lexicon {
        Some(path) => CitationLexicon::load_jsonl(path),
        None => Ok(CitationLexicon::from_corpus(corpus, config.symmetrize)),
    }
}

pub fn retrofit_vectors(
    config: &EngineConfig,
    corpus: &Corpus,
    vectors: &BTreeMap<String, Embedding>,
) -> Result<BTreeMap<String, Embedding>> {
    let lexicon = citation_lexicon(config, corpus)?;
    retrofit(
        vectors,
        &lexicon,
        &RetrofitConfig {
            num_iter: config.retrofit_iterations,
            ..Default::default()
        },
    )
}

pub fn query_encoder(config: &EngineConfig, stopwords: &Stopwords, lsi: Option<LsiModel>) -> Result<QueryEncoder> {
    Ok(match config.embedder {
        EmbedderKind::Lsi => QueryEncoder::Lsi {
            model: lsi.ok_or_else(|| Error::Validation("LSI embedder without a fitted model".into()))?,
            stopwords: stopwords.clone(),
        },
        EmbedderKind::Pooled => QueryEncoder::Words {
            vectors: WordVectors::load(config.word_vectors.as_deref().expect("validated"))?,
            stopwords: stopwords.clone(),
        },
        EmbedderKind::Merge | EmbedderKind::Separate => {
            let path = config.query_embeddings.as_deref().ok_or_else(|| {
                Error::Config(format!("embedder {} needs `query_embeddings` to answer queries", config.embedder))
            })?;
            let (_, table) = load_vector_table(path)?;
            QueryEncoder::Lookup(LookupEncoder::new(table, format!("{}+sidecar", config.embedder)))
        }
    })
}

/// Machine-parseable one-line stage summary: `stage key=value ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub stage: &'static str,
    pub fields: Vec<(&'static str, String)>,
}

impl fmt::Display for StageSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.stage)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_artifact_corpus(art: &Artifacts) -> Result<(Corpus, Stopwords)> {
    let (corpus, _) = Corpus::load(&art.papers(), &art.authors())?;
    let stopwords = load_stopwords(&art.stopwords())?;
    Ok((corpus, stopwords))
}

/// Cleans the corpus and writes it, with its stopword list, to the artifacts.
pub fn run_ingest(config: &EngineConfig) -> Result<StageSummary> {
    require_file(&config.papers)?;
    require_file(&config.authors)?;
    let art = config.artifact_paths();
    ensure_dir(&art.dir)?;
    let ing = ingest(config)?;
    ing.corpus.write_jsonl(&art.papers(), &art.authors())?;
    write_stopwords(&art.stopwords(), &ing.stopwords)?;
    Ok(StageSummary {
        stage: "ingest",
        fields: vec![
            ("papers", ing.corpus.papers().len().to_string()),
            ("authors", ing.corpus.authors().len().to_string()),
            ("dropped_author_refs", ing.warnings.dropped_author_refs.to_string()),
            ("dropped_self_references", ing.warnings.dropped_self_references.to_string()),
            ("stopwords", ing.stopwords.len().to_string()),
            ("avg_publications", format!("{:.4}", ing.corpus.avg_publications())),
        ],
    })
}

pub fn run_embed(config: &EngineConfig) -> Result<StageSummary> {
    let art = config.artifact_paths();
    let (corpus, stopwords) = load_artifact_corpus(&art)?;
    let emb = embed_papers(config, &corpus, &stopwords)?;
    write_vector_table(&art.embeddings(), &emb.vectors)?;
    if let Some(model) = &emb.lsi {
        model.save(&art.lsi_model())?;
    }
    Ok(StageSummary {
        stage: "embed",
        fields: vec![
            ("embedder", config.embedder.to_string()),
            ("papers", emb.vectors.len().to_string()),
            ("skipped", emb.skipped.to_string()),
            ("dim", emb.vectors.values().next().map_or(0, Embedding::dim).to_string()),
        ],
    })
}

pub fn run_retrofit(config: &EngineConfig) -> Result<StageSummary> {
    let art = config.artifact_paths();
    require_file(&art.embeddings())?;
    let (corpus, _) = load_artifact_corpus(&art)?;
    let (_, vectors) = load_vector_table(&art.embeddings())?;
    let out = retrofit_vectors(config, &corpus, &vectors)?;
    write_vector_table(&art.retrofitted(), &out)?;
    let moved = out
        .iter()
        .filter(|(id, v)| vectors.get(*id).is_some_and(|o| o != *v))
        .count();
    Ok(StageSummary {
        stage: "retrofit",
        fields: vec![
            ("papers", out.len().to_string()),
            ("updated", moved.to_string()),
            ("iterations", config.retrofit_iterations.to_string()),
        ],
    })
}

/// Indexes the retrofitted vectors when retrofitting is on, else the raw ones.
pub fn run_index(config: &EngineConfig) -> Result<StageSummary> {
    let art = config.artifact_paths();
    let source = if config.retrofit { art.retrofitted() } else { art.embeddings() };
    require_file(&source)?;
    let (_, vectors) = load_vector_table(&source)?;
    let index = VectorIndex::build(&vectors, config.backend, config.hnsw)?;
    index.save(&art.index())?;
    Ok(StageSummary {
        stage: "index",
        fields: vec![
            ("backend", format!("{:?}", config.backend).to_lowercase()),
            ("papers", index.len().to_string()),
            ("dim", index.dim().to_string()),
        ],
    })
}

/// Immutable snapshot answering expert queries.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    corpus: Corpus,
    stopwords: Stopwords,
    index: VectorIndex,
    encoder: QueryEncoder,
}

impl Engine {
    /// Runs every stage in memory.
    pub fn build(config: EngineConfig) -> Result<Engine> {
        let ing = ingest(&config)?;
        Self::from_corpus(config, ing.corpus, ing.stopwords)
    }

    /// Runs the embed, retrofit and index stages in memory over a loaded
    /// corpus; the corpus paths in `config` are not read.
    pub fn from_corpus(config: EngineConfig, corpus: Corpus, stopwords: Stopwords) -> Result<Engine> {
        let emb = embed_papers(&config, &corpus, &stopwords)?;
        let vectors = if config.retrofit {
            retrofit_vectors(&config, &corpus, &emb.vectors)?
        } else {
            emb.vectors
        };
        let index = VectorIndex::build(&vectors, config.backend, config.hnsw)?;
        let encoder = query_encoder(&config, &stopwords, emb.lsi)?;
        Ok(Engine {
            config,
            corpus,
            stopwords,
            index,
            encoder,
        })
    }

    /// Loads the artifacts written by the pipeline stages.
    pub fn open(config: EngineConfig) -> Result<Engine> {
        let art = config.artifact_paths();
        require_file(&art.index())?;
        let (corpus, stopwords) = load_artifact_corpus(&art)?;
        let index = VectorIndex::load(&art.index())?;
        let lsi = if config.embedder == EmbedderKind::Lsi {
            Some(LsiModel::load(&art.lsi_model())?)
        } else {
            None
        };
        let encoder = query_encoder(&config, &stopwords, lsi)?;
        Ok(Engine {
            config,
            corpus,
            stopwords,
            index,
            encoder,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn encoder(&self) -> &QueryEncoder {
        &self.encoder
    }

    /// Top-`n` experts for a free-text query. A query the encoder cannot
    /// embed yields an empty ranking.
    pub fn search(&self, query: &str, n: usize) -> Result<ExpertRanking> {
        if n > self.config.max_experts {
            return Err(Error::Argument(format!(
                "requested {n} experts, the maximum is {}",
                self.config.max_experts
            )));
        }
        let Some(q) = self.encoder.encode(query) else {
            return Ok(ExpertRanking::default());
        };
        if n == 0 {
            return Ok(ExpertRanking::default());
        }
        rank_experts(
            &q,
            &self.index,
            &self.corpus,
            &self.config.strategy(),
            &self.config.normalization_params(&self.corpus),
            self.config.docs,
            n,
        )
    }

    /// One run line per query at the configured expert count.
    pub fn run(&self, queries: &[String]) -> Result<Vec<RunLine>> {
        queries
            .iter()
            .map(|q| {
                Ok(RunLine {
                    query: q.clone(),
                    experts: self.search(q, self.config.experts)?.entries,
                })
            })
            .collect()
    }

    /// Judgments for `queries`, with approximate sets from this engine's
    /// encoder at the configured threshold.
    pub fn judgments(&self, queries: &[String]) -> Result<Vec<QueryJudgment>> {
        let mut judge = ApproxJudge::new(&self.encoder, self.config.threshold)?;
        build_judgments(queries, &self.corpus, &self.stopwords, Some(&mut judge))
    }
}
