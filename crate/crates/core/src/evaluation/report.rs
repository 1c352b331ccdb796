use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::judgment::QueryJudgment;
use super::metrics::{average_precision_at_n, ndcg_at_n, precision_at_n, reciprocal_rank_at_n};
use crate::corpus::normalize_tag;
use crate::error::{Error, Result};
use crate::voting::RunLine;

/// Binary-relevance metrics at cutoffs 5 and 10.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeMetrics {
    pub mrr5: f64,
    pub mrr10: f64,
    pub p5: f64,
    pub p10: f64,
    pub ap5: f64,
    pub ap10: f64,
}

impl ModeMetrics {
    pub fn from_relevance(relevance: &[bool]) -> ModeMetrics {
        ModeMetrics {
            mrr5: reciprocal_rank_at_n(relevance, 5).unwrap(),
            mrr10: reciprocal_rank_at_n(relevance, 10).unwrap(),
            p5: precision_at_n(relevance, 5).unwrap(),
            p10: precision_at_n(relevance, 10).unwrap(),
            ap5: average_precision_at_n(relevance, 5).unwrap(),
            ap10: average_precision_at_n(relevance, 10).unwrap(),
        }
    }

    fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("MRR@5", self.mrr5),
            ("MRR@10", self.mrr10),
            ("MP@5", self.p5),
            ("MP@10", self.p10),
            ("MAP@5", self.ap5),
            ("MAP@10", self.ap10),
        ]
    }

    fn mean<'a>(items: impl Iterator<Item = &'a ModeMetrics>) -> ModeMetrics {
        let mut sum = ModeMetrics::default();
        let mut n = 0usize;
        for m in items {
            sum.mrr5 += m.mrr5;
            sum.mrr10 += m.mrr10;
            sum.p5 += m.p5;
            sum.p10 += m.p10;
            sum.ap5 += m.ap5;
            sum.ap10 += m.ap10;
            n += 1;
        }
        if n == 0 {
            return sum;
        }
        let n = n as f64;
        ModeMetrics {
            mrr5: sum.mrr5 / n,
            mrr10: sum.mrr10 / n,
            p5: sum.p5 / n,
            p10: sum.p10 / n,
            ap5: sum.ap5 / n,
            ap10: sum.ap10 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub query: String,
    pub exact: ModeMetrics,
    pub approx: Option<ModeMetrics>,
    pub ndcg5: f64,
    pub ndcg10: f64,
    /// False when the query has no relevant authors; its metrics are 0.
    pub usable: bool,
}

/// Provenance recorded alongside the numbers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub embedder: String,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub header: ReportHeader,
    pub queries: Vec<QueryMetrics>,
    pub mean_exact: ModeMetrics,
    /// Present only when every judgment carries an approximate set.
    pub mean_approx: Option<ModeMetrics>,
    pub mean_ndcg5: f64,
    pub mean_ndcg10: f64,
    pub unusable_queries: usize,
}

/// Scores every run line against its judgment.
pub fn evaluate_run(
    run: &[RunLine],
    judgments: &BTreeMap<String, QueryJudgment>,
    header: ReportHeader,
) -> Result<MetricsReport> {
    let mut queries = Vec::with_capacity(run.len());
    for line in run {
        let key = normalize_tag(&line.query);
        let j = judgments.get(&key).ok_or_else(|| {
            Error::Validation(format!("no judgment for run query {:?}", line.query))
        })?;
        let ids: Vec<&str> = line.experts.iter().map(|e| e.author_id.as_str()).collect();
        let exact_set: BTreeSet<&str> = j.ideal.iter().map(|g| g.author.as_str()).collect();
        let exact: Vec<bool> = ids.iter().map(|id| exact_set.contains(id)).collect();
        let approx = j.approx.as_ref().map(|a| {
            let set: BTreeSet<&str> = a.iter().map(String::as_str).collect();
            let rel: Vec<bool> = ids.iter().map(|id| set.contains(id)).collect();
            ModeMetrics::from_relevance(&rel)
        });
        let grades: Vec<u8> = ids.iter().map(|id| j.grade_of(id)).collect();
        let (ndcg5, ndcg10) = if j.is_usable() {
            (ndcg_at_n(&grades, j.idcg10, 5)?, ndcg_at_n(&grades, j.idcg10, 10)?)
        } else {
            (0.0, 0.0)
        };
        queries.push(QueryMetrics {
            query: key,
            exact: ModeMetrics::from_relevance(&exact),
            approx,
            ndcg5,
            ndcg10,
            usable: j.is_usable(),
        });
    }
    let n = queries.len().max(1) as f64;
    let mean_approx = if !queries.is_empty() && queries.iter().all(|q| q.approx.is_some()) {
        Some(ModeMetrics::mean(queries.iter().filter_map(|q| q.approx.as_ref())))
    } else {
        None
    };
    Ok(MetricsReport {
        header,
        mean_exact: ModeMetrics::mean(queries.iter().map(|q| &q.exact)),
        mean_approx,
        mean_ndcg5: queries.iter().map(|q| q.ndcg5).sum::<f64>() / n,
        mean_ndcg10: queries.iter().map(|q| q.ndcg10).sum::<f64>() / n,
        unusable_queries: queries.iter().filter(|q| !q.usable).count(),
        queries,
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table of the means.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let threshold = self
            .header
            .threshold
            .map_or_else(|| "-".to_string(), |t| t.to_string());
        writeln!(s, "embedder: {}  threshold: {threshold}", self.header.embedder).unwrap();
        writeln!(
            s,
            "queries: {}  without relevant authors: {}",
            self.queries.len(),
            self.unusable_queries
        )
        .unwrap();
        writeln!(s, "{:<8} {:>8} {:>8}", "metric", "exact", "approx").unwrap();
        let approx = self.mean_approx.map(|m| m.values());
        for (i, (name, v)) in self.mean_exact.values().into_iter().enumerate() {
            let a = approx.map_or_else(|| "-".to_string(), |a| format!("{:.4}", a[i].1));
            writeln!(s, "{name:<8} {v:>8.4} {a:>8}").unwrap();
        }
        writeln!(s, "{:<8} {:>8.4} {:>8}", "nDCG@5", self.mean_ndcg5, "-").unwrap();
        writeln!(s, "{:<8} {:>8.4} {:>8}", "nDCG@10", self.mean_ndcg10, "-").unwrap();
        s
    }
}
