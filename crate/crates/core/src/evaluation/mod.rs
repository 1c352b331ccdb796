//! Judging expert rankings against field-of-work tags.
//!
//! Exact relevance is tag membership; approximate relevance is cosine
//! similarity between the query and a tag, both encoded by the same
//! [`TextEncoder`](crate::embedder::TextEncoder). Graded judgments for nDCG come from the citations an
//! author collected on papers that mention the query.

/// The bundled 100-query test set, one query per line.
pub const TEST_QUERIES: &str = include_str!("../../data/queries.txt");

mod judgment;
mod metrics;
mod relevance;
mod report;

pub use judgment::{
    build_ideal_ranking, build_judgments, is_query_relevant_paper, load_queries, quartile_grades,
    parse_queries, read_judgments, write_judgments, GradedAuthor, QueryJudgment, RelevanceMode,
};
pub use metrics::{
    average_precision_at_n, dcg_at_n, ndcg_at_n, precision_at_n, reciprocal_rank, reciprocal_rank_at_n,
};
pub use relevance::{exact_relevant_authors, is_relevant_approx, is_relevant_exact, ApproxJudge};
pub use report::{evaluate_run, MetricsReport, ModeMetrics, QueryMetrics, ReportHeader};
