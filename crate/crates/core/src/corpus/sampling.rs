//! Stratified author sampling by publication count.
//!
//! Authors are binned into four strata by profile length. Each stratum gets a
//! share of the sample proportional to its size (rounded down), and authors
//! are drawn uniformly at random without replacement inside each stratum.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AuthorRecord, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PublicationBin {
    /// 5 to 9 publications.
    Few,
    /// 10 to 49.
    Some,
    /// 50 to 99.
    Many,
    /// 100 or more.
    Prolific,
}

impl PublicationBin {
    pub const ALL: [PublicationBin; 4] = [
        PublicationBin::Few,
        PublicationBin::Some,
        PublicationBin::Many,
        PublicationBin::Prolific,
    ];

    /// Half-open publication-count range `[lo, hi)`.
    pub fn range(self) -> (usize, usize) {
        match self {
            PublicationBin::Few => (5, 10),
            PublicationBin::Some => (10, 50),
            PublicationBin::Many => (50, 100),
            PublicationBin::Prolific => (100, usize::MAX),
        }
    }
}

/// Stratum for a publication count; `None` below 5.
pub fn publication_bin(n_pubs: usize) -> Option<PublicationBin> {
    PublicationBin::ALL.into_iter().find(|b| {
        let (lo, hi) = b.range();
        n_pubs >= lo && n_pubs < hi
    })
}

/// `floor(bin_size * sample_size / total)`, computed exactly in integers.
pub fn proportional_allocation(bin_size: usize, total: usize, sample_size: usize) -> usize {
    if total == 0 {
        return 0;
    }
    ((bin_size as u128 * sample_size as u128) / total as u128) as usize
}

/// Authors with at least one paper that cites a paper present in the corpus.
pub fn sampling_eligible(corpus: &Corpus) -> Vec<AuthorRecord> {
    corpus
        .authors()
        .values()
        .filter(|a| {
            a.paper_ids.iter().any(|pid| {
                corpus.paper(pid).is_some_and(|p| {
                    p.references.iter().any(|r| corpus.paper(r).is_some())
                })
            })
        })
        .cloned()
        .collect()
}

/// Draws a proportionally allocated stratified sample of author ids.
///
/// Authors with fewer than five publications fall in no stratum and are never
/// sampled. When the strata hold no more than `sample_size` authors, all of
/// them are returned. The result is sorted by author id.
pub fn stratified_author_sample(
    authors: &[AuthorRecord],
    sample_size: usize,
    seed: u64,
) -> Result<Vec<String>> {
    if sample_size == 0 {
        return Err(Error::Argument("sample_size must be positive".into()));
    }
    let mut bins: [Vec<&str>; 4] = Default::default();
    for a in authors {
        if let Some(bin) = publication_bin(a.n_pubs) {
            bins[bin as usize].push(&a.author_id);
        }
    }
    for bin in bins.iter_mut() {
        bin.sort_unstable();
    }
    let total: usize = bins.iter().map(Vec::len).sum();

    let mut sample: Vec<String> = Vec::new();
    if total <= sample_size {
        sample.extend(bins.iter().flatten().map(|s| s.to_string()));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for bin in &bins {
            let take = proportional_allocation(bin.len(), total, sample_size);
            for i in index::sample(&mut rng, bin.len(), take) {
                sample.push(bin[i].to_string());
            }
        }
    }
    sample.sort_unstable();
    Ok(sample)
}
