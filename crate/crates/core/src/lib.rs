//! Expert search over a scholarly corpus.
//!
//! Papers are embedded, optionally pulled toward their citation neighbours,
//! and indexed for cosine retrieval. The authors of the retrieved papers are
//! ranked by a weighted vote over the document scores.

pub mod corpus;
pub mod embedder;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod retrofit;
pub mod synthetic;
pub mod vindex;
pub mod voting;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/retrofitting.md")]
    mod retrofitting {}
    #[doc = include_str!("../../../book/src/index.md")]
    mod index {}
    #[doc = include_str!("../../../book/src/voting.md")]
    mod voting {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
