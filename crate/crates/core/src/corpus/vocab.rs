use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use super::LabeledDocument;
use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// A fixed stopword list, one word per line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The English list bundled with the crate (`data/stopwords_en.txt`).
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(Into::into).collect())
    }
}

/// True when no character of `token` is alphanumeric.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Mergeable surface-form frequency counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenCounts(HashMap<String, u64>);

impl TokenCounts {
    pub fn add(&mut self, token: &str, n: u64) {
        match self.0.get_mut(token) {
            Some(c) => *c += n,
            None => {
                self.0.insert(token.to_string(), n);
            }
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (t, n) in other.0 {
            *self.0.entry(t).or_default() += n;
        }
    }

    pub fn get(&self, token: &str) -> u64 {
        self.0.get(token).copied().unwrap_or(0)
    }

    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a LabeledDocument>) -> Self {
        let mut counts = TokenCounts::default();
        for doc in docs {
            for tok in doc.tokens() {
                counts.add(&tok.surface, 1);
            }
        }
        counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(t, &n)| (t.as_str(), n))
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for TokenCounts {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut c = TokenCounts::default();
        for (t, n) in iter {
            c.add(t.as_ref(), n);
        }
        c
    }
}

/// Dense token ids ordered by descending corpus frequency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, usize>,
    max_size: usize,
    min_count: u64,
    stopwords: Stopwords,
}

/// Keeps tokens with frequency `>= min_count` that are neither stopwords nor
/// punctuation, then the `max_size` most frequent (ties lexicographic).
pub fn build_vocab(
    counts: &TokenCounts,
    max_size: usize,
    min_count: u64,
    stopwords: &Stopwords,
) -> Result<Vocabulary> {
    let mut kept: Vec<(&str, u64)> = counts
        .iter()
        .filter(|&(t, n)| n >= min_count && !stopwords.contains(t) && !is_punctuation(t))
        .collect();
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.truncate(max_size);
    if kept.is_empty() {
        return Err(Error::config(format!(
            "no token passes the vocabulary filters (min_count = {min_count}, max_size = {max_size})"
        )));
    }
    let mut vocab = Vocabulary::from_entries(kept.iter().map(|&(t, n)| (t.to_string(), n)));
    vocab.max_size = max_size;
    vocab.min_count = min_count;
    vocab.stopwords = stopwords.clone();
    Ok(vocab)
}

impl Vocabulary {
    fn from_entries(entries: impl IntoIterator<Item = (String, u64)>) -> Self {
        let (words, freqs): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let min_count = freqs.iter().copied().min().unwrap_or(0);
        Vocabulary {
            max_size: words.len(),
            words,
            freqs,
            index,
            min_count,
            stopwords: Stopwords::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn frequency(&self, id: usize) -> u64 {
        self.freqs[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    /// `token<TAB>id<TAB>frequency` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, (w, f)) in self.words.iter().zip(&self.freqs).enumerate() {
            writeln!(out, "{w}\t{i}\t{f}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Record {
                line: i + 1,
                message: m.to_string(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad("expected `token<TAB>id<TAB>frequency`"));
            }
            let id: usize = cols[1].parse().map_err(|_| bad("non-integer id"))?;
            if id != entries.len() {
                return Err(bad("ids must be dense and in order"));
            }
            let freq: u64 = cols[2].parse().map_err(|_| bad("non-integer frequency"))?;
            entries.push((cols[0].to_string(), freq));
        }
        Ok(Self::from_entries(entries))
    }
}
