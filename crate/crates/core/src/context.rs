//! Word-context pair extraction from dependency trees (neighbor words within
//! n hops plus sentence keywords) and from linear windows.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::{ParsedSentence, Vocabulary};
use crate::error::{Error, Result};

/// Relations whose dependents are keywords: UD core arguments plus `root`.
pub const CORE_RELATIONS: [&str; 7] = ["nsubj", "obj", "iobj", "csubj", "ccomp", "xcomp", "root"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HopWeight {
    /// `1 / d`
    #[default]
    Reciprocal,
    /// `1` at every distance.
    Constant,
}

impl HopWeight {
    pub fn at(self, distance: usize) -> f64 {
        match self {
            HopWeight::Reciprocal => 1.0 / distance as f64,
            HopWeight::Constant => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    pub n_hops: usize,
    pub hop_weight: HopWeight,
    pub keyword_weight: f64,
    pub use_keywords: bool,
    pub core_relations: BTreeSet<String>,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            n_hops: 3,
            hop_weight: HopWeight::Reciprocal,
            keyword_weight: 1.0,
            use_keywords: true,
            core_relations: CORE_RELATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ContextConfig {
    pub fn with_hops(n_hops: usize, use_keywords: bool) -> Self {
        ContextConfig {
            n_hops,
            use_keywords,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_hops == 0 {
            return Err(Error::config("n_hops must be at least 1"));
        }
        if !(self.keyword_weight >= 0.0 && self.keyword_weight.is_finite()) {
            return Err(Error::config("keyword_weight must be finite and nonnegative"));
        }
        if self.use_keywords && self.core_relations.is_empty() {
            return Err(Error::config("core_relations is empty but use_keywords is set"));
        }
        Ok(())
    }
}

/// One weighted co-occurrence contribution of `context` to `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedPair {
    pub target: usize,
    pub context: usize,
    pub weight: f64,
}

impl WeightedPair {
    pub fn new(target: usize, context: usize, weight: f64) -> Self {
        WeightedPair {
            target,
            context,
            weight,
        }
    }
}

/// Pairs of one sentence together with the number of raw context samples
/// (neighbor and keyword contributions counted separately) behind them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SentencePairs {
    pub pairs: Vec<WeightedPair>,
    pub samples: u64,
}

fn vocab_ids(s: &ParsedSentence, vocab: &Vocabulary) -> Vec<Option<usize>> {
    s.tokens.iter().map(|t| vocab.id(&t.surface)).collect()
}

/// 1-based indices of in-vocabulary tokens whose relation is a core relation.
pub fn extract_keywords(
    s: &ParsedSentence,
    vocab: &Vocabulary,
    cfg: &ContextConfig,
) -> BTreeSet<usize> {
    s.tokens
        .iter()
        .filter(|t| cfg.core_relations.contains(&t.deprel) && vocab.id(&t.surface).is_some())
        .map(|t| t.index)
        .collect()
}

/// Hop distance from position `from` to every token (0-based positions),
/// `usize::MAX` for unreachable ones, cut off after `radius` hops.
fn hop_distances(adj: &[Vec<usize>], from: usize, radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == radius {
            continue;
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// In-vocabulary tokens within `n_hops` of the target as `(index, distance)`,
/// sorted by distance then index. Paths run through the full tree.
pub fn neighbor_contexts(
    s: &ParsedSentence,
    target_index: usize,
    vocab: &Vocabulary,
    cfg: &ContextConfig,
) -> Vec<(usize, usize)> {
    let ids = vocab_ids(s, vocab);
    neighbors_with(&s.adjacency(), &ids, target_index - 1, cfg.n_hops)
}

fn neighbors_with(
    adj: &[Vec<usize>],
    ids: &[Option<usize>],
    from: usize,
    n_hops: usize,
) -> Vec<(usize, usize)> {
    let dist = hop_distances(adj, from, n_hops);
    let mut out: Vec<(usize, usize)> = dist
        .iter()
        .enumerate()
        .filter(|&(pos, &d)| d >= 1 && d <= n_hops && ids[pos].is_some())
        .map(|(pos, &d)| (pos + 1, d))
        .collect();
    out.sort_unstable_by_key(|&(i, d)| (d, i));
    out
}

/// All weighted pairs of a sentence: every in-vocabulary target receives
/// `hop_weight(d)` from each neighbor and `keyword_weight` from each keyword
/// other than itself. Contributions to one `(target, context)` are summed.
pub fn context_pairs(s: &ParsedSentence, vocab: &Vocabulary, cfg: &ContextConfig) -> Vec<WeightedPair> {
    sentence_pairs(s, vocab, cfg).pairs
}

pub fn sentence_pairs(s: &ParsedSentence, vocab: &Vocabulary, cfg: &ContextConfig) -> SentencePairs {
    let ids = vocab_ids(s, vocab);
    if ids.iter().all(Option::is_none) {
        return SentencePairs::default();
    }
    let adj = s.adjacency();
    let keywords: Vec<usize> = if cfg.use_keywords {
        extract_keywords(s, vocab, cfg)
            .into_iter()
            .map(|i| i - 1)
            .collect()
    } else {
        Vec::new()
    };

    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut samples = 0u64;
    for (pos, target) in ids.iter().enumerate() {
        let Some(target) = *target else { continue };
        // Per context token, so a dual-role keyword gets hop + keyword weight.
        let mut per_token: BTreeMap<usize, f64> = BTreeMap::new();
        for (index, d) in neighbors_with(&adj, &ids, pos, cfg.n_hops) {
            *per_token.entry(index - 1).or_default() += cfg.hop_weight.at(d);
            samples += 1;
        }
        for &k in &keywords {
            if k != pos {
                *per_token.entry(k).or_default() += cfg.keyword_weight;
                samples += 1;
            }
        }
        for (cpos, w) in per_token {
            if w > 0.0 {
                let context = ids[cpos].expect("context tokens are in vocabulary");
                *acc.entry((target, context)).or_default() += w;
            }
        }
    }
    SentencePairs {
        pairs: acc
            .into_iter()
            .map(|((t, c), w)| WeightedPair::new(t, c, w))
            .collect(),
        samples,
    }
}

/// Linear-window pairs: tokens at offset `o` (`1 <= |o| <= window`) contribute
/// `1 / |o|`. Offsets count every token, filtered or not.
pub fn linear_context_pairs<S: AsRef<str>>(
    tokens: &[S],
    window: usize,
    vocab: &Vocabulary,
) -> Vec<WeightedPair> {
    linear_sentence_pairs(tokens, window, vocab).pairs
}

pub fn linear_sentence_pairs<S: AsRef<str>>(
    tokens: &[S],
    window: usize,
    vocab: &Vocabulary,
) -> SentencePairs {
    let ids: Vec<Option<usize>> = tokens.iter().map(|t| vocab.id(t.as_ref())).collect();
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut samples = 0u64;
    for (pos, target) in ids.iter().enumerate() {
        let Some(target) = *target else { continue };
        let lo = pos.saturating_sub(window);
        let hi = (pos + window).min(ids.len().saturating_sub(1));
        for cpos in lo..=hi {
            if cpos == pos {
                continue;
            }
            if let Some(context) = ids[cpos] {
                *acc.entry((target, context)).or_default() += 1.0 / pos.abs_diff(cpos) as f64;
                samples += 1;
            }
        }
    }
    SentencePairs {
        pairs: acc
            .into_iter()
            .map(|((t, c), w)| WeightedPair::new(t, c, w))
            .collect(),
        samples,
    }
}
