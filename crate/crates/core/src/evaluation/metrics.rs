//! Rank-based metrics over relevance and grade sequences.
//!
//! Every function here sees only the judged sequence of a ranking, never the
//! raw scores.

use crate::error::{Error, Result};

fn check_cutoff(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Argument("cutoff must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `1 / rank` of the first relevant entry, 0 if there is none.
pub fn reciprocal_rank(relevance: &[bool]) -> f64 {
    relevance
        .iter()
        .position(|&r| r)
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Reciprocal rank restricted to the first `n` entries.
pub fn reciprocal_rank_at_n(relevance: &[bool], n: usize) -> Result<f64> {
    check_cutoff(n)?;
    Ok(reciprocal_rank(&relevance[..n.min(relevance.len())]))
}

/// Fraction of relevant entries among the first `n`; missing entries count
/// as irrelevant.
pub fn precision_at_n(relevance: &[bool], n: usize) -> Result<f64> {
    check_cutoff(n)?;
    let hits = relevance.iter().take(n).filter(|&&r| r).count();
    Ok(hits as f64 / n as f64)
}

/// Mean of precision@k over the relevant ranks `k <= n`, divided by the
/// number of relevant entries inside the window.
pub fn average_precision_at_n(relevance: &[bool], n: usize) -> Result<f64> {
    check_cutoff(n)?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, _) in relevance.iter().take(n).enumerate().filter(|(_, &r)| r) {
        hits += 1;
        sum += hits as f64 / (i + 1) as f64;
    }
    Ok(if hits == 0 { 0.0 } else { sum / hits as f64 })
}

/// `sum_{i=1..n} (2^g_i - 1) / log2(i + 1)`.
pub fn dcg_at_n(grades: &[u8], n: usize) -> f64 {
    grades
        .iter()
        .take(n)
        .enumerate()
        .map(|(i, &g)| (2f64.powi(g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

/// DCG@n over `idcg`, clamped to `[0, 1]`.
pub fn ndcg_at_n(grades: &[u8], idcg: f64, n: usize) -> Result<f64> {
    check_cutoff(n)?;
    if !(idcg > 0.0) {
        return Err(Error::Argument(format!("IDCG must be positive, got {idcg}")));
    }
    Ok((dcg_at_n(grades, n) / idcg).clamp(0.0, 1.0))
}
