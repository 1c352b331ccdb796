use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::dcg_at_n;
use super::relevance::{exact_relevant_authors, ApproxJudge};
use crate::corpus::{clean_text, normalize_tag, Corpus, PaperRecord, Stopwords};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedAuthor {
    pub author: String,
    pub grade: u8,
}

/// Ideal ranking for one test query.
///
/// `idcg10 == 0` marks a query with no relevant authors; it still counts in
/// the means, contributing 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryJudgment {
    pub query: String,
    /// Sorted by grade descending.
    pub ideal: Vec<GradedAuthor>,
    pub idcg10: f64,
    /// Authors relevant under embedding similarity, when computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<Vec<String>>,
}

impl QueryJudgment {
    pub fn is_usable(&self) -> bool {
        self.idcg10 > 0.0
    }

    pub fn grade_of(&self, author_id: &str) -> u8 {
        self.ideal
            .iter()
            .find(|g| g.author == author_id)
            .map_or(0, |g| g.grade)
    }
}

pub enum RelevanceMode<'a, 'e> {
    Exact,
    Approximate(&'a mut ApproxJudge<'e>),
}

/// A paper is relevant to a query when it contains every cleaned query token.
pub fn is_query_relevant_paper(paper: &PaperRecord, query_tokens: &BTreeSet<String>, stopwords: &Stopwords) -> bool {
    if query_tokens.is_empty() {
        return false;
    }
    let text = clean_text(&paper.full_text(), stopwords);
    let tokens: BTreeSet<&str> = text.split(' ').collect();
    query_tokens.iter().all(|t| tokens.contains(t.as_str()))
}

/// Quartile grades over proxies already sorted descending.
///
/// Ties share the grade of their first occurrence; zero proxies grade 0.
pub fn quartile_grades(sorted_proxies: &[u64]) -> Vec<u8> {
    let m = sorted_proxies.len();
    let mut grades = Vec::with_capacity(m);
    let mut first = 0;
    for (i, &p) in sorted_proxies.iter().enumerate() {
        if i > 0 && p != sorted_proxies[i - 1] {
            first = i;
        }
        let g = if p == 0 {
            0
        } else {
            // floor(first / m * 4) without rounding through floats
            3 - ((4 * first) / m).min(3) as u8
        };
        grades.push(g);
    }
    grades
}

/// Grades the relevant authors of `query` by the citations of their
/// query-relevant papers.
pub fn build_ideal_ranking(
    query: &str,
    corpus: &Corpus,
    stopwords: &Stopwords,
    mode: RelevanceMode<'_, '_>,
) -> Result<QueryJudgment> {
    let query = normalize_tag(query);
    let relevant = match mode {
        RelevanceMode::Exact => exact_relevant_authors(corpus, &query),
        RelevanceMode::Approximate(judge) => judge.relevant_authors(corpus, &query)?,
    };
    let tokens: BTreeSet<String> = clean_text(&query, stopwords)
        .split_whitespace()
        .map(str::to_string)
        .collect();

    let mut proxied: Vec<(u64, &str)> = relevant
        .iter()
        .map(|id| {
            let author = corpus.author(id).expect("relevant authors come from the corpus");
            let proxy = author
                .paper_ids
                .iter()
                .filter_map(|p| corpus.paper(p))
                .filter(|p| is_query_relevant_paper(p, &tokens, stopwords))
                .map(|p| p.n_citations)
                .sum();
            (proxy, id.as_str())
        })
        .collect();
    proxied.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let proxies: Vec<u64> = proxied.iter().map(|p| p.0).collect();
    let ideal: Vec<GradedAuthor> = proxied
        .iter()
        .zip(quartile_grades(&proxies))
        .map(|(&(_, id), grade)| GradedAuthor {
            author: id.to_string(),
            grade,
        })
        .collect();
    let grades: Vec<u8> = ideal.iter().map(|g| g.grade).collect();
    Ok(QueryJudgment {
        query,
        idcg10: dcg_at_n(&grades, 10),
        ideal,
        approx: None,
    })
}

/// Exact-mode judgments for every query, with approximate relevance sets
/// attached when a judge is supplied.
pub fn build_judgments(
    queries: &[String],
    corpus: &Corpus,
    stopwords: &Stopwords,
    mut approx: Option<&mut ApproxJudge<'_>>,
) -> Result<Vec<QueryJudgment>> {
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let mut j = build_ideal_ranking(q, corpus, stopwords, RelevanceMode::Exact)?;
        if let Some(judge) = approx.as_deref_mut() {
            j.approx = Some(judge.relevant_authors(corpus, &j.query)?.into_iter().collect());
        }
        out.push(j);
    }
    Ok(out)
}

/// One query per non-blank line, normalized.
pub fn parse_queries(text: &str) -> Vec<String> {
    text.lines().map(normalize_tag).filter(|q| !q.is_empty()).collect()
}

pub fn load_queries(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_queries(&text))
}

pub fn write_judgments(path: &Path, judgments: &[QueryJudgment]) -> Result<()> {
    let mut out = Vec::new();
    for j in judgments {
        serde_json::to_writer(&mut out, j).expect("judgments serialize");
        out.push(b'\n');
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Reads judgments keyed by normalized query; duplicates are rejected.
pub fn read_judgments(path: &Path) -> Result<BTreeMap<String, QueryJudgment>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (idx, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            file: path.display().to_string(),
            line: idx + 1,
            message,
        };
        let mut j: QueryJudgment = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if j.ideal.iter().any(|g| g.grade > 3) {
            return Err(parse_err("grades must be in 0..=3".into()));
        }
        if j.ideal.windows(2).any(|w| w[0].grade < w[1].grade) {
            return Err(parse_err("ideal list is not sorted by grade".into()));
        }
        if !(j.idcg10 >= 0.0) {
            return Err(parse_err("idcg10 must be non-negative".into()));
        }
        j.query = normalize_tag(&j.query);
        if out.contains_key(&j.query) {
            return Err(parse_err(format!("duplicate judgment for {:?}", j.query)));
        }
        out.insert(j.query.clone(), j);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorRecord, Authorship};

    #[test]
    fn bundled_queries_are_distinct() {
        let qs = parse_queries(crate::evaluation::TEST_QUERIES);
        assert_eq!(qs.len(), 100);
        assert_eq!(qs.iter().collect::<BTreeSet<_>>().len(), 100);
        assert!(qs.contains(&"newton's method".to_string()));
    }

    #[test]
    fn quartile_examples() {
        assert_eq!(quartile_grades(&[5]), [3]);
        assert_eq!(quartile_grades(&[100, 0]), [3, 0]);
        assert_eq!(quartile_grades(&[40, 30, 20, 10]), [3, 2, 1, 0]);
        assert_eq!(quartile_grades(&[9, 9, 9, 1]), [3, 3, 3, 0]);
        assert_eq!(quartile_grades(&[]), [] as [u8; 0]);
    }

    fn corpus() -> Corpus {
        let paper = |id: &str, title: &str, cites, authors: &[&str]| PaperRecord {
            paper_id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            authors: authors
                .iter()
                .enumerate()
                .map(|(i, a)| Authorship {
                    author_id: a.to_string(),
                    position: i + 1,
                })
                .collect(),
            references: vec![],
            n_citations: cites,
        };
        let author = |id: &str, tags: &[&str]| AuthorRecord {
            author_id: id.into(),
            name: id.to_uppercase(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
            paper_ids: vec![],
            n_pubs: 0,
        };
        Corpus::from_parts(
            [
                paper("p1", "Game theory of auctions", 100, &["a", "b"]),
                paper("p2", "Cooking recipes", 500, &["b"]),
                paper("p3", "Evolutionary game theory", 7, &["c"]),
            ]
            .into_iter()
            .map(|p| (p.paper_id.clone(), p))
            .collect(),
            [
                author("a", &["game theory"]),
                author("b", &["game theory", "cooking"]),
                author("c", &["game theory"]),
                author("d", &["game theory"]),
                author("e", &["cooking"]),
            ]
            .into_iter()
            .map(|a| (a.author_id.clone(), a))
            .collect(),
        )
    }

    #[test]
    fn ideal_ranking_uses_query_relevant_citations() {
        let j = build_ideal_ranking("Game Theory", &corpus(), &Stopwords::new(), RelevanceMode::Exact).unwrap();
        assert_eq!(j.query, "game theory");
        // a and b tie at 100 (p2 does not mention the query), c has 7, d none
        let ideal: Vec<_> = j.ideal.iter().map(|g| (g.author.as_str(), g.grade)).collect();
        assert_eq!(ideal, [("a", 3), ("b", 3), ("c", 1), ("d", 0)]);
        assert!((j.idcg10 - (7.0 + 7.0 / 3f64.log2() + 1.0 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn single_author_and_unusable_queries() {
        let j = build_ideal_ranking("cooking", &corpus(), &Stopwords::new(), RelevanceMode::Exact).unwrap();
        // e has no papers, so only b carries a proxy
        assert_eq!(j.ideal[0], GradedAuthor { author: "b".into(), grade: 3 });
        let none = build_ideal_ranking("astronomy", &corpus(), &Stopwords::new(), RelevanceMode::Exact).unwrap();
        assert!(!none.is_usable());
        assert!(none.ideal.is_empty());
    }

    #[test]
    fn judgments_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let mut js = build_judgments(&["game theory".into()], &corpus(), &Stopwords::new(), None).unwrap();
        js[0].approx = Some(vec!["a".into()]);
        write_judgments(&path, &js).unwrap();
        let back = read_judgments(&path).unwrap();
        assert_eq!(back["game theory"], js[0]);
    }

    #[test]
    fn malformed_judgments_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        std::fs::write(&path, "{\"query\":\"x\",\"ideal\":[{\"author\":\"a\",\"grade\":1},{\"author\":\"b\",\"grade\":2}],\"idcg10\":1.0}\n").unwrap();
        assert!(matches!(read_judgments(&path), Err(Error::Parse { line: 1, .. })));
    }
}
