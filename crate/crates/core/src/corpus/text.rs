use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::Corpus;
use crate::error::{Error, Result};

pub type Stopwords = BTreeSet<String>;

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\W*(?:[a-z][a-z0-9+.\-]*://|www\.)").unwrap());
static EMAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[^@\s]+@[^@\s]+\.[^@\s]+").unwrap());

fn fold_once(s: &str) -> String {
    let stripped: String = s.nfkd().filter(|c| !is_combining_mark(*c)).collect();
    stripped.to_lowercase()
}

/// Compatibility-decomposes, strips combining marks and lowercases until stable.
fn fold_unicode(s: &str) -> String {
    let mut current = fold_once(s);
    for _ in 0..8 {
        let next = fold_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Normalizes raw text for indexing.
///
/// Lowercases, folds Unicode to its compatibility form without combining
/// marks, drops URL and e-mail tokens and stopwords, and collapses whitespace.
pub fn clean_text(raw: &str, stopwords: &Stopwords) -> String {
    let folded = fold_unicode(raw);
    let mut out = String::with_capacity(folded.len());
    for token in folded.split_whitespace() {
        if URL.is_match(token) || EMAIL.is_match(token) || stopwords.contains(token) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Lowercases and collapses whitespace in a field-of-work tag or query.
pub fn normalize_tag(tag: &str) -> String {
    tag.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits text after `.`, `!` or `?` when followed by whitespace or the end.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_fragment(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_fragment(&mut out, &text[start..]);
    out
}

fn push_fragment(out: &mut Vec<String>, fragment: &str) {
    let trimmed = fragment.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// Reads a stopword file: UTF-8, one token per line.
pub fn load_stopwords(path: &Path) -> Result<Stopwords> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

pub fn write_stopwords(path: &Path, stopwords: &Stopwords) -> Result<()> {
    let mut body = String::new();
    for w in stopwords {
        body.push_str(w);
        body.push('\n');
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// The `k` most frequent tokens over all titles and abstracts.
///
/// Ties are broken by token so the list is deterministic.
pub fn corpus_stopwords(corpus: &Corpus, k: usize) -> Stopwords {
    let empty = Stopwords::new();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for paper in corpus.papers().values() {
        for token in clean_text(&paper.full_text(), &empty).split(' ') {
            if !token.is_empty() {
                *counts.entry(token.to_string()).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(k).map(|(t, _)| t).collect()
}
