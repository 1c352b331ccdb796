//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantity and the pinned tolerance. Exits non-zero on any failure.
//!
//! Every reference computation below is written independently of the
//! library code it checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use expertvote::corpus::{proportional_allocation, AuthorRecord, Authorship, Corpus, PaperRecord};
use expertvote::embedder::{Embedding, LookupEncoder};
use expertvote::engine::{self, Engine, EngineConfig};
use expertvote::evaluation::{build_judgments, evaluate_run, ApproxJudge, GradedAuthor, QueryJudgment, ReportHeader};
use expertvote::retrofit::{retrofit, CitationLexicon, RetrofitConfig};
use expertvote::synthetic::{self, SyntheticCorpus, SyntheticSpec};
use expertvote::vindex::{Backend, HnswParams, VectorIndex};
use expertvote::voting::{
    normalize_ranking, rank_experts, read_run, write_run, ExpertEntry, ExpertRanking, NormalizationParams, RunLine,
    WeightingKind, WeightingStrategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

fn embedding(v: Vec<f64>) -> Embedding {
    Embedding::new(v).unwrap()
}

// ---------------------------------------------------------------- A1

fn a1() -> Outcome {
    let got = proportional_allocation(22_943, 35_450, 5_000);
    check(got == 3_235, format!("allocation = {got}, expected 3235"))
}

// ---------------------------------------------------------------- A2

/// Alg. 4 spelled out over string-keyed maps.
fn reference_retrofit(
    original: &HashMap<String, Vec<f64>>,
    lexicon: &HashMap<String, Vec<String>>,
    iterations: usize,
) -> HashMap<String, Vec<f64>> {
    let mut working = original.clone();
    let mut keys: Vec<&String> = original.keys().filter(|k| lexicon.contains_key(*k)).collect();
    keys.sort();
    for _ in 0..iterations {
        for p in &keys {
            let mut seen = Vec::new();
            for q in &lexicon[*p] {
                if q != *p && original.contains_key(q) && !seen.contains(&q) {
                    seen.push(q);
                }
            }
            if seen.is_empty() {
                continue;
            }
            let n = seen.len() as f64;
            let mut new = vec![0.0; original[*p].len()];
            for (i, x) in new.iter_mut().enumerate() {
                let mut acc = n * original[*p][i];
                for q in &seen {
                    acc += working[*q][i];
                }
                *x = acc / (2.0 * n);
            }
            working.insert((*p).clone(), new);
        }
    }
    working
}

fn a2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let nodes = rng.random_range(2..=200);
        let ids: Vec<String> = (0..nodes).map(|i| format!("n{i:03}")).collect();
        let original: HashMap<String, Vec<f64>> =
            ids.iter().map(|id| (id.clone(), random_vec(&mut rng, 16))).collect();
        let mut lexicon: HashMap<String, Vec<String>> = HashMap::new();
        for id in &ids {
            if rng.random_bool(0.15) {
                continue;
            }
            let degree = rng.random_range(0..6);
            let mut ns: Vec<String> = (0..degree).map(|_| ids[rng.random_range(0..nodes)].clone()).collect();
            if rng.random_bool(0.2) {
                ns.push("outside-corpus".into());
            }
            lexicon.insert(id.clone(), ns);
        }
        let expected = reference_retrofit(&original, &lexicon, 10);
        let got = retrofit(
            &original.iter().map(|(k, v)| (k.clone(), embedding(v.clone()))).collect(),
            &CitationLexicon::new(lexicon.clone()),
            &RetrofitConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        for (id, v) in &expected {
            for (a, b) in v.iter().zip(got[id].as_slice()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("max abs diff {worst:.3e} over 50 graphs (tol 1e-9)"))
}

// ---------------------------------------------------------------- A3

fn brute_force(table: &[(String, Vec<f64>)], q: &[f64], n: usize) -> Vec<(String, f64)> {
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut all: Vec<(String, f64)> = table
        .iter()
        .map(|(id, v)| {
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            (id.clone(), dot / (vn * qn))
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(n);
    all
}

fn a3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let table: Vec<(String, Vec<f64>)> = (0..1000).map(|i| (format!("d{i:04}"), random_vec(&mut rng, 768))).collect();
    let map: BTreeMap<String, Embedding> = table.iter().map(|(k, v)| (k.clone(), embedding(v.clone()))).collect();
    let index = VectorIndex::build(&map, Backend::Exact, HnswParams::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let q = random_vec(&mut rng, 768);
        for n in [1, 10, 100] {
            let expected = brute_force(&table, &q, n);
            let got = index.search(&embedding(q.clone()), n).map_err(|e| e.to_string())?;
            if got.len() != expected.len() {
                return Err(format!("n={n}: {} results, expected {}", got.len(), expected.len()));
            }
            for (g, (id, s)) in got.iter().zip(&expected) {
                if &g.paper_id != id {
                    return Err(format!("n={n}: order differs at {id}"));
                }
                worst = worst.max((g.score - s).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("identical order, max score diff {worst:.3e} (tol 1e-9)"))
}

// ---------------------------------------------------------------- A4

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // Box-Muller gives an isotropic direction after normalization
    let v = (0..dim)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect();
    unit(v)
}

fn a4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let table: Vec<(String, Vec<f64>)> = (0..10_000).map(|i| (format!("v{i:05}"), gaussian_unit(&mut rng, 64))).collect();
    let map: BTreeMap<String, Embedding> = table.iter().map(|(k, v)| (k.clone(), embedding(v.clone()))).collect();
    let built = Instant::now();
    let index = VectorIndex::build(&map, Backend::Hnsw, HnswParams::default()).map_err(|e| e.to_string())?;
    let build_time = built.elapsed();
    let mut hits = 0usize;
    for _ in 0..1000 {
        let q = gaussian_unit(&mut rng, 64);
        let truth: BTreeSet<String> = brute_force(&table, &q, 10).into_iter().map(|r| r.0).collect();
        let got = index.search(&embedding(q), 10).map_err(|e| e.to_string())?;
        hits += got.iter().filter(|d| truth.contains(&d.paper_id)).count();
    }
    let recall = hits as f64 / 10_000.0;
    check(
        recall >= 0.95,
        format!("recall@10 = {recall:.4} (min 0.95), build {:.1}s", build_time.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- A5

fn reference_weight(kind: WeightingKind, position: usize, n: usize) -> f64 {
    let decay = |p: usize| if p == 1 { 1.0 } else { f64::max(0.2, 0.8 - 0.2 * (p as f64 - 2.0)) };
    match kind {
        WeightingKind::Binary => 1.0,
        WeightingKind::Uniform => 1.0 / n as f64,
        WeightingKind::Descending => decay(position),
        WeightingKind::Parabolic => {
            if position == 1 || position == n {
                1.0
            } else {
                decay(position)
            }
        }
    }
}

fn corpus_from(papers: Vec<PaperRecord>, authors: Vec<AuthorRecord>) -> Corpus {
    Corpus::from_parts(
        papers.into_iter().map(|p| (p.paper_id.clone(), p)).collect(),
        authors.into_iter().map(|a| (a.author_id.clone(), a)).collect(),
    )
}

fn author(id: &str) -> AuthorRecord {
    AuthorRecord {
        author_id: id.into(),
        name: id.to_uppercase(),
        tags: vec![],
        paper_ids: vec![],
        n_pubs: 0,
    }
}

fn paper(id: &str, authors: &[String]) -> PaperRecord {
    PaperRecord {
        paper_id: id.into(),
        title: id.into(),
        abstract_text: String::new(),
        authors: authors
            .iter()
            .enumerate()
            .map(|(i, a)| Authorship {
                author_id: a.clone(),
                position: i + 1,
            })
            .collect(),
        references: vec![],
        n_citations: 0,
    }
}

fn a5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let author_ids: Vec<String> = (0..8).map(|i| format!("au{i}")).collect();
    let mut papers = Vec::new();
    let mut bylines: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut vectors: Vec<(String, Vec<f64>)> = Vec::new();
    for i in 0..20 {
        let n = rng.random_range(1..=5);
        let mut byline: Vec<String> = Vec::new();
        while byline.len() < n {
            let a = author_ids[rng.random_range(0..8)].clone();
            if !byline.contains(&a) {
                byline.push(a);
            }
        }
        let id = format!("doc{i:02}");
        papers.push(paper(&id, &byline));
        bylines.insert(id.clone(), byline);
        vectors.push((id, random_vec(&mut rng, 8)));
    }
    let corpus = corpus_from(papers, author_ids.iter().map(|a| author(a)).collect());
    let map: BTreeMap<String, Embedding> = vectors.iter().map(|(k, v)| (k.clone(), embedding(v.clone()))).collect();
    let index = VectorIndex::build(&map, Backend::Exact, HnswParams::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let q = random_vec(&mut rng, 8);
        for kind in [WeightingKind::Binary, WeightingKind::Uniform, WeightingKind::Descending, WeightingKind::Parabolic] {
            let n_docs = 12;
            let got = rank_experts(
                &embedding(q.clone()),
                &index,
                &corpus,
                &WeightingStrategy::new(kind),
                &NormalizationParams::disabled(),
                n_docs,
                8,
            )
            .map_err(|e| e.to_string())?;
            let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
            for (doc, s) in brute_force(&vectors, &q, n_docs) {
                let byline = &bylines[&doc];
                for (i, a) in byline.iter().enumerate() {
                    *scores.entry(a).or_default() += reference_weight(kind, i + 1, byline.len()) * s.exp();
                }
            }
            let mut expected: Vec<(&str, f64)> = scores.into_iter().collect();
            expected.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
            expected.truncate(8);
            let ids: Vec<&str> = got.author_ids().collect();
            let want: Vec<&str> = expected.iter().map(|e| e.0).collect();
            if ids != want {
                return Err(format!("{kind:?}: order {ids:?} != {want:?}"));
            }
            for (e, (_, s)) in got.entries.iter().zip(&expected) {
                worst = worst.max((e.score - s).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("4 weightings x 5 queries identical, max diff {worst:.3e} (tol 1e-9)"))
}

// ---------------------------------------------------------------- A6

fn a6() -> Outcome {
    // "short" wrote 5 papers, "long" wrote 100: aL = 52.5
    let mut papers = Vec::new();
    for i in 0..5 {
        papers.push(paper(&format!("s{i:03}"), &["short".to_string()]));
    }
    for i in 0..100 {
        papers.push(paper(&format!("l{i:03}"), &["long".to_string()]));
    }
    let corpus = corpus_from(papers, vec![author("short"), author("long")]);
    let raw = || ExpertRanking {
        entries: ["long", "short"]
            .iter()
            .map(|a| ExpertEntry {
                author_id: a.to_string(),
                score: 1.0,
                evidence: vec![],
            })
            .collect(),
    };
    let normalized = |alpha: f64, beta: f64| -> Result<ExpertRanking, String> {
        let mut r = raw();
        let params = NormalizationParams {
            enabled: true,
            alpha,
            beta,
            avg_publications: corpus.avg_publications(),
        };
        normalize_ranking(&mut r, &corpus, &params).map_err(|e| e.to_string())?;
        Ok(r)
    };
    let ratio = |r: &ExpertRanking| {
        let s: Vec<f64> = r.entries.iter().map(|e| e.score).collect();
        s[0] / s[1]
    };
    let base = normalized(1.0, 0.0)?;
    let first = base.entries[0].author_id.clone();
    // the large-beta row of the parameter grid pairs beta = 1000 with alpha = 1000
    let grid = normalized(1000.0, 1000.0)?;
    let literal = normalized(1.0, 1000.0)?;
    check(
        first == "short" && ratio(&grid) <= 1.05,
        format!(
            "beta=0: {first} first (ratio {:.3}); beta=1000,alpha=1000: ratio {:.4} (max 1.05); beta=1000,alpha=1: ratio {:.4} (see notes)",
            ratio(&base),
            ratio(&grid),
            ratio(&literal)
        ),
    )
}

// ---------------------------------------------------------------- A7

struct Reference {
    rr10: f64,
    p5: f64,
    p10: f64,
    ap10: f64,
    ndcg5: f64,
    ndcg10: f64,
}

/// Metrics recomputed from first principles over padded sequences.
fn reference_metrics(rel: &[bool], grades: &[u8], ideal: &[u8]) -> Reference {
    let padded = |k: usize| -> Vec<bool> { (0..k).map(|i| rel.get(i).copied().unwrap_or(false)).collect() };
    let top10 = padded(10);
    let rr10 = match top10.iter().position(|&r| r) {
        Some(i) => 1.0 / (i as f64 + 1.0),
        None => 0.0,
    };
    let precision = |k: usize| padded(k).iter().filter(|&&r| r).count() as f64 / k as f64;
    let mut hits = 0.0;
    let mut precisions = Vec::new();
    for (i, &r) in top10.iter().enumerate() {
        if r {
            hits += 1.0;
            precisions.push(hits / (i as f64 + 1.0));
        }
    }
    let ap10 = if precisions.is_empty() { 0.0 } else { precisions.iter().sum::<f64>() / precisions.len() as f64 };
    let dcg = |g: &[u8], k: usize| -> f64 {
        g.iter()
            .take(k)
            .enumerate()
            .map(|(i, &x)| (2f64.powf(x as f64) - 1.0) / (i as f64 + 2.0).log2())
            .sum::<f64>()
    };
    let idcg = dcg(ideal, 10);
    let ndcg = |k: usize| if idcg > 0.0 { (dcg(grades, k) / idcg).min(1.0) } else { 0.0 };
    Reference {
        rr10,
        p5: precision(5),
        p10: precision(10),
        ap10,
        ndcg5: ndcg(5),
        ndcg10: ndcg(10),
    }
}

fn a7() -> Outcome {
    // (retrieved grades with None = not relevant, extra relevant grades never retrieved)
    let mut scripts: Vec<(Vec<Option<u8>>, Vec<u8>)> = vec![
        (vec![None, None, Some(3)], vec![]),
        (vec![Some(3), None, Some(1), None, None], vec![]),
        (vec![Some(2), None, Some(1), None], vec![]),
        (vec![None, Some(3)], vec![]),
        (vec![Some(3), Some(2), Some(0)], vec![]),
        (vec![None; 10], vec![3]),
        (vec![], vec![2, 1]),
        (vec![Some(1); 12], vec![]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    while scripts.len() < 25 {
        let len = rng.random_range(0..15);
        let seq = (0..len)
            .map(|_| rng.random_bool(0.4).then(|| rng.random_range(0..=3)))
            .collect();
        let extra = (0..rng.random_range(0..4)).map(|_| rng.random_range(0..=3)).collect();
        scripts.push((seq, extra));
    }

    let mut run = Vec::new();
    let mut judgments = BTreeMap::new();
    let mut expected = Vec::new();
    for (qi, (seq, extra)) in scripts.iter().enumerate() {
        let query = format!("query {qi}");
        let ids: Vec<String> = (0..seq.len()).map(|i| format!("x{i:02}")).collect();
        let mut ideal: Vec<(String, u8)> = seq
            .iter()
            .zip(&ids)
            .filter_map(|(g, id)| g.map(|g| (id.clone(), g)))
            .chain(extra.iter().enumerate().map(|(i, &g)| (format!("unretrieved{i}"), g)))
            .collect();
        ideal.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let ideal_grades: Vec<u8> = ideal.iter().map(|g| g.1).collect();
        let rel: Vec<bool> = seq.iter().map(Option::is_some).collect();
        let grades: Vec<u8> = seq.iter().map(|g| g.unwrap_or(0)).collect();
        expected.push(reference_metrics(&rel, &grades, &ideal_grades));
        let idcg10 = (0..ideal_grades.len().min(10))
            .map(|i| (2f64.powi(ideal_grades[i] as i32) - 1.0) / ((i + 2) as f64).log2())
            .sum();
        judgments.insert(
            query.clone(),
            QueryJudgment {
                query: query.clone(),
                ideal: ideal.into_iter().map(|(author, grade)| GradedAuthor { author, grade }).collect(),
                idcg10,
                approx: None,
            },
        );
        run.push(RunLine {
            query,
            experts: ids
                .into_iter()
                .map(|author_id| ExpertEntry { author_id, score: 1.0, evidence: vec![] })
                .collect(),
        });
    }
    let report = evaluate_run(&run, &judgments, ReportHeader::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (m, r) in report.queries.iter().zip(&expected) {
        for (a, b) in [
            (m.exact.mrr10, r.rr10),
            (m.exact.p5, r.p5),
            (m.exact.p10, r.p10),
            (m.exact.ap10, r.ap10),
            (m.ndcg5, r.ndcg5),
            (m.ndcg10, r.ndcg10),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let hand = [
        (report.queries[0].exact.mrr10, 1.0 / 3.0),
        (report.queries[1].exact.p5, 0.4),
        (report.queries[2].exact.ap10, 5.0 / 6.0),
        (report.queries[3].ndcg10, 1.0 / 3f64.log2()),
    ];
    let hand_ok = hand.iter().all(|(a, b)| (a - b).abs() <= 1e-9);
    check(
        worst <= 1e-9 && hand_ok,
        format!(
            "25 sequences, max diff {worst:.3e} (tol 1e-9); hand cases {:.4} {:.4} {:.4} {:.4}",
            hand[0].0, hand[1].0, hand[2].0, hand[3].0
        ),
    )
}

// ---------------------------------------------------------------- A8

fn a8() -> Outcome {
    let spec = SyntheticSpec {
        topics: 30,
        papers_per_topic: 8,
        authors_per_topic: 4,
        variant_tags: true,
        seed: 0xA8,
        ..Default::default()
    };
    let synth = SyntheticCorpus::generate(spec);
    let corpus = synth.corpus();
    let config = EngineConfig {
        stopwords_top_k: synthetic::FILLER.len(),
        docs: 20,
        ..Default::default()
    };
    let stopwords = expertvote::corpus::corpus_stopwords(&corpus, config.stopwords_top_k);
    let engine = Engine::from_corpus(config.clone(), corpus.clone(), stopwords.clone()).map_err(|e| e.to_string())?;
    let queries = synth.queries();
    let run = engine.run(&queries).map_err(|e| e.to_string())?;

    // a tag and its variant point the same way up to a small perturbation
    let mut rng = ChaCha8Rng::seed_from_u64(0xA8);
    let mut table = BTreeMap::new();
    for t in 0..spec.topics {
        let mut base = vec![0.0; spec.topics];
        base[t] = 1.0;
        let mut variant = base.clone();
        for x in variant.iter_mut() {
            *x += rng.random_range(-0.1..0.1);
        }
        table.insert(synthetic::topic_tag(t), embedding(base));
        table.insert(synthetic::variant_tag(t), embedding(variant));
    }
    let encoder = LookupEncoder::new(table, "tag-table");
    let mut judge = ApproxJudge::new(&encoder, config.threshold).map_err(|e| e.to_string())?;
    let js = build_judgments(&queries, &corpus, &stopwords, Some(&mut judge)).map_err(|e| e.to_string())?;
    let js: BTreeMap<String, QueryJudgment> = js.into_iter().map(|j| (j.query.clone(), j)).collect();
    let report = evaluate_run(&run, &js, ReportHeader::default()).map_err(|e| e.to_string())?;
    let exact = report.mean_exact;
    let approx = report.mean_approx.ok_or("no approximate means")?;
    let pairs = [
        ("MRR@5", exact.mrr5, approx.mrr5),
        ("MRR@10", exact.mrr10, approx.mrr10),
        ("MP@5", exact.p5, approx.p5),
        ("MP@10", exact.p10, approx.p10),
        ("MAP@5", exact.ap5, approx.ap5),
        ("MAP@10", exact.ap10, approx.ap10),
    ];
    let detail = pairs
        .iter()
        .map(|(n, e, a)| format!("{n} {e:.3}<={a:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(pairs.iter().all(|(_, e, a)| a >= e), format!("30 queries: {detail}"))
}

// ---------------------------------------------------------------- A9 / A10

fn write_config(dir: &Path, retrofit: bool) -> EngineConfig {
    let synth = SyntheticCorpus::generate(SyntheticSpec::default());
    let raw = dir.join("raw");
    std::fs::create_dir_all(&raw).unwrap();
    synth.corpus().write_jsonl(&raw.join("papers.jsonl"), &raw.join("authors.jsonl")).unwrap();
    std::fs::write(dir.join("queries.txt"), synth.queries().join("\n")).unwrap();
    let text = format!(
        "papers = \"raw/papers.jsonl\"\nauthors = \"raw/authors.jsonl\"\nstopwords_top_k = {}\nembedder = \"lsi\"\nretrofit = {retrofit}\nbackend = \"exact\"\nweighting = \"binary\"\ndocs = 20\nexperts = 10\nartifacts = \"artifacts\"\n",
        synthetic::FILLER.len()
    );
    std::fs::write(dir.join("config.toml"), text).unwrap();
    EngineConfig::from_toml(
        &std::fs::read_to_string(dir.join("config.toml")).unwrap(),
        dir,
        std::iter::empty(),
    )
    .unwrap()
}

/// ingest -> embed -> (retrofit) -> index -> search -> judgments -> eval,
/// all through the artifact files. Returns (run bytes, report bytes, report).
fn pipeline(dir: &Path, retrofit: bool) -> Result<(Vec<u8>, Vec<u8>, expertvote::evaluation::MetricsReport), String> {
    let config = write_config(dir, retrofit);
    let e = |e: expertvote::Error| e.to_string();
    engine::run_ingest(&config).map_err(e)?;
    engine::run_embed(&config).map_err(e)?;
    if retrofit {
        engine::run_retrofit(&config).map_err(e)?;
    }
    engine::run_index(&config).map_err(e)?;
    let eng = Engine::open(config.clone()).map_err(e)?;
    let queries = expertvote::evaluation::load_queries(&dir.join("queries.txt")).map_err(e)?;
    let run_path = dir.join("run.jsonl");
    write_run(&run_path, &eng.run(&queries).map_err(e)?).map_err(e)?;
    let js_path = dir.join("judgments.jsonl");
    expertvote::evaluation::write_judgments(&js_path, &eng.judgments(&queries).map_err(e)?).map_err(e)?;
    let report = evaluate_run(
        &read_run(&run_path).map_err(e)?,
        &expertvote::evaluation::read_judgments(&js_path).map_err(e)?,
        ReportHeader {
            embedder: config.embedder.to_string(),
            threshold: Some(config.threshold),
        },
    )
    .map_err(e)?;
    let report_path = dir.join("report.json");
    std::fs::write(&report_path, report.to_json()).unwrap();
    Ok((std::fs::read(&run_path).unwrap(), std::fs::read(&report_path).unwrap(), report))
}

fn a9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, report) = pipeline(dir.path(), false)?;
    let map = report.mean_exact.ap10;
    check(
        map >= 0.9,
        format!("MAP@10 = {map:.4} (min 0.9), MP@5 = {:.3}, nDCG@10 = {:.3}", report.mean_exact.p5, report.mean_ndcg10),
    )
}

fn a10() -> Outcome {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (run1, rep1, _) = pipeline(d1.path(), true)?;
    let (run2, rep2, _) = pipeline(d2.path(), true)?;
    let idx1 = std::fs::read(d1.path().join("artifacts/index.vidx")).unwrap();
    let idx2 = std::fs::read(d2.path().join("artifacts/index.vidx")).unwrap();
    check(
        run1 == run2 && rep1 == rep2 && idx1 == idx2,
        format!("run {} B, report {} B, index {} B byte-identical: {}", run1.len(), rep1.len(), idx1.len(), run1 == run2 && rep1 == rep2 && idx1 == idx2),
    )
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("A1", a1, Some(Duration::from_secs(1))),
        ("A2", a2, Some(Duration::from_secs(30))),
        ("A3", a3, Some(Duration::from_secs(10))),
        ("A4", a4, Some(Duration::from_secs(120))),
        ("A5", a5, Some(Duration::from_secs(1))),
        ("A6", a6, Some(Duration::from_secs(1))),
        ("A7", a7, Some(Duration::from_secs(1))),
        ("A8", a8, Some(Duration::from_secs(30))),
        ("A9", a9, Some(Duration::from_secs(60))),
        ("A10", a10, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == name) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over time budget {:?}", budget.unwrap())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{name:<4} {status}  {detail}  [{:.2}s]", elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
